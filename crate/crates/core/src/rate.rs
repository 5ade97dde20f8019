//! Computation rate of an integer linear combination over a real fading
//! channel, in bits per channel use (all outer logarithms are base 2).
//!
//! The rate of decoding `sum a_l x_l` over channel `h` at power `P` is
//!
//! ```text
//! R(h, a) = 1/2 log+ ( (|a|^2 - P (h.a)^2 / (1 + P |h|^2))^-1 )
//! ```
//!
//! The inner term is evaluated through the Lagrange identity
//! `|a|^2 |h|^2 - (h.a)^2 = sum_{i<j} (a_i h_j - a_j h_i)^2`, which keeps it
//! non-negative and free of cancellation:
//!
//! ```text
//! inner = (|a|^2 + P * cross(h, a)) / (1 + P |h|^2)
//! ```

use std::f64::consts::{FRAC_PI_2, LN_2};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Inner terms at or below this value are reported as [`Rate::Unbounded`].
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Real fading coefficients of a set of users.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelVector(Vec<f64>);

impl ChannelVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::usage("channel vector must have at least one entry"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::usage(format!("channel entry {i} is not finite")));
        }
        Ok(ChannelVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.0)
    }

    /// Sub-vector at the given user indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> ChannelVector {
        ChannelVector(indices.iter().map(|&i| self.0[i]).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Integer coefficient vector of a linear combination. Never all-zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CoeffVector(Vec<i64>);

impl CoeffVector {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::usage("coefficient vector must have at least one entry"));
        }
        if values.iter().all(|&v| v == 0) {
            return Err(Error::usage("coefficient vector must not be all-zero"));
        }
        Ok(CoeffVector(values))
    }

    /// `k` ones.
    pub fn ones(k: usize) -> Self {
        assert!(k >= 1);
        CoeffVector(vec![1; k])
    }

    /// The `i`-th standard basis vector of dimension `dim`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![0; dim];
        v[i] = 1;
        CoeffVector(v)
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Squared norm in exact integer arithmetic.
    pub fn norm2(&self) -> i64 {
        int_norm2(&self.0)
    }

    pub fn nnz(&self) -> usize {
        self.0.iter().filter(|&&v| v != 0).count()
    }

    pub fn is_unit(&self) -> bool {
        self.nnz() == 1 && self.norm2() == 1
    }

    pub fn negated(&self) -> CoeffVector {
        CoeffVector(self.0.iter().map(|v| -v).collect())
    }

    pub fn into_inner(self) -> Vec<i64> {
        self.0
    }

    pub(crate) fn from_raw(values: Vec<i64>) -> Self {
        debug_assert!(values.iter().any(|&v| v != 0));
        CoeffVector(values)
    }
}

impl fmt::Display for CoeffVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Transmit power constraint, linear scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Power(f64);

impl Power {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::usage(format!("power must be positive and finite, got {p}")));
        }
        Ok(Power(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A computation rate. `Unbounded` marks exact collinearity of `h` and `a`
/// in the limit where the rate formula diverges.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Rate {
    Finite(f64),
    Unbounded,
}

impl Rate {
    pub const ZERO: Rate = Rate::Finite(0.0);

    /// The rate as a float; `Unbounded` maps to `f64::INFINITY`.
    pub fn value(self) -> f64 {
        match self {
            Rate::Finite(r) => r,
            Rate::Unbounded => f64::INFINITY,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Rate::Unbounded)
    }

    /// `n` times this rate, exactly one float multiply.
    pub fn times(self, n: usize) -> Rate {
        match self {
            Rate::Finite(r) => Rate::Finite(n as f64 * r),
            Rate::Unbounded => Rate::Unbounded,
        }
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Rate::Finite(r) => s.serialize_f64(*r),
            Rate::Unbounded => s.serialize_str("inf"),
        }
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Finite(r) => write!(f, "{r}"),
            Rate::Unbounded => f.write_str("inf"),
        }
    }
}

/// Rate of one `(h, a, P)` triple along with the quantities derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateResult {
    pub rate: Rate,
    /// MMSE scaling of the received signal.
    pub alpha: f64,
    /// Angle between `h` and `a` in `[0, pi]`.
    pub angle: f64,
    pub nnz: usize,
    /// `nnz * rate`.
    pub sum_rate: Rate,
}

/// `max(log2 x, 0)`.
pub fn log_plus(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("log+ needs a positive argument, got {x}")));
    }
    Ok(x.log2().max(0.0))
}

pub(crate) fn norm2(h: &[f64]) -> f64 {
    h.iter().map(|v| v * v).sum()
}

pub(crate) fn int_norm2(a: &[i64]) -> i64 {
    a.iter().map(|v| v * v).sum()
}

pub(crate) fn dot(h: &[f64], a: &[i64]) -> f64 {
    h.iter().zip(a).map(|(x, &y)| x * y as f64).sum()
}

/// `|a|^2 |h|^2 - (h.a)^2` as a sum of squares.
pub(crate) fn cross(h: &[f64], a: &[i64]) -> f64 {
    let mut s = 0.0;
    for i in 0..h.len() {
        for j in (i + 1)..h.len() {
            let t = a[i] as f64 * h[j] - a[j] as f64 * h[i];
            s += t * t;
        }
    }
    s
}

/// `cross` specialised to the all-ones vector.
fn cross_ones(h: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..h.len() {
        for j in (i + 1)..h.len() {
            let t = h[j] - h[i];
            s += t * t;
        }
    }
    s
}

fn rate_from_parts(a2: f64, cross: f64, h2: f64, p: f64) -> Rate {
    let inner = (a2 + p * cross) / (1.0 + p * h2);
    if inner <= DEGENERATE_TOL {
        return Rate::Unbounded;
    }
    // log2((1 + P|h|^2) / (|a|^2 + P cross)) with log1p on both sides.
    let num = (p * h2).ln_1p();
    let den = a2.ln() + (p * cross / a2).ln_1p();
    Rate::Finite((0.5 * (num - den) / LN_2).max(0.0))
}

/// Rate on raw slices. Caller guarantees equal lengths and `a != 0`.
pub fn rate_slices(h: &[f64], a: &[i64], p: f64) -> Rate {
    debug_assert_eq!(h.len(), a.len());
    rate_from_parts(int_norm2(a) as f64, cross(h, a), norm2(h), p)
}

/// Rate of the all-ones coefficient vector on `h`.
pub fn rate_ones(h: &[f64], p: f64) -> Rate {
    rate_from_parts(h.len() as f64, cross_ones(h), norm2(h), p)
}

/// The value `|a|^2 - P (h.a)^2 / (1 + P|h|^2)` whose inverse sets the rate.
pub fn inner_term(h: &[f64], a: &[i64], p: f64) -> f64 {
    (int_norm2(a) as f64 + p * cross(h, a)) / (1.0 + p * norm2(h))
}

fn check_pair(h: &ChannelVector, a: &CoeffVector) -> Result<()> {
    if h.len() != a.len() {
        return Err(Error::usage(format!(
            "channel has {} entries but coefficients have {}",
            h.len(),
            a.len()
        )));
    }
    Ok(())
}

pub fn computation_rate(h: &ChannelVector, a: &CoeffVector, p: Power) -> Result<RateResult> {
    check_pair(h, a)?;
    let (hv, av) = (h.values(), a.values());
    let rate = rate_slices(hv, av, p.value());
    let nnz = a.nnz();
    let angle = if h.norm2() == 0.0 {
        FRAC_PI_2
    } else {
        angle_slices(hv, av)
    };
    Ok(RateResult {
        rate,
        alpha: mmse_alpha_slices(hv, av, p.value()),
        angle,
        nnz,
        sum_rate: rate.times(nnz),
    })
}

/// Rate for a caller-supplied scaling `alpha`, without maximising over it:
/// `1/2 log+ (P / (alpha^2 + P |alpha h - a|^2))`.
pub fn computation_rate_alpha(h: &ChannelVector, a: &CoeffVector, p: Power, alpha: f64) -> Result<Rate> {
    check_pair(h, a)?;
    if !alpha.is_finite() {
        return Err(Error::usage("alpha must be finite"));
    }
    let p = p.value();
    let dist2: f64 = h
        .values()
        .iter()
        .zip(a.values())
        .map(|(&x, &y)| {
            let d = alpha * x - y as f64;
            d * d
        })
        .sum();
    let den = alpha * alpha + p * dist2;
    if den <= 0.0 {
        return Ok(Rate::Unbounded);
    }
    Ok(Rate::Finite((0.5 * (p / den).log2()).max(0.0)))
}

fn mmse_alpha_slices(h: &[f64], a: &[i64], p: f64) -> f64 {
    p * dot(h, a) / (1.0 + p * norm2(h))
}

/// `P (h.a) / (1 + P |h|^2)`, the scaling that maximises the rate.
pub fn mmse_alpha(h: &ChannelVector, a: &CoeffVector, p: Power) -> Result<f64> {
    check_pair(h, a)?;
    Ok(mmse_alpha_slices(h.values(), a.values(), p.value()))
}

fn angle_slices(h: &[f64], a: &[i64]) -> f64 {
    // atan2 of (|h||a| sin, |h||a| cos) is exact at 0 and pi.
    cross(h, a).sqrt().atan2(dot(h, a))
}

pub fn angle_between(h: &ChannelVector, a: &CoeffVector) -> Result<f64> {
    check_pair(h, a)?;
    if h.norm2() == 0.0 {
        return Err(Error::usage("angle undefined for a zero channel vector"));
    }
    Ok(angle_slices(h.values(), a.values()))
}

/// Limit of the rate as `P -> infinity`: `1/2 log+ ((|a|^2 sin^2 theta)^-1)`.
pub fn high_snr_rate(h: &ChannelVector, a: &CoeffVector) -> Result<Rate> {
    check_pair(h, a)?;
    let h2 = h.norm2();
    if h2 == 0.0 {
        return Err(Error::usage("high-SNR rate undefined for a zero channel vector"));
    }
    Ok(high_snr_slices(h.values(), a.values(), h2))
}

pub(crate) fn high_snr_slices(h: &[f64], a: &[i64], h2: f64) -> Rate {
    // |a|^2 sin^2 theta = cross / |h|^2
    let x = cross(h, a) / h2;
    if x <= DEGENERATE_TOL {
        return Rate::Unbounded;
    }
    Rate::Finite((-0.5 * x.log2()).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn h(v: &[f64]) -> ChannelVector {
        ChannelVector::new(v.to_vec()).unwrap()
    }
    fn a(v: &[i64]) -> CoeffVector {
        CoeffVector::new(v.to_vec()).unwrap()
    }
    fn p(x: f64) -> Power {
        Power::new(x).unwrap()
    }

    #[test]
    fn log_plus_values() {
        assert_eq!(log_plus(1.0).unwrap(), 0.0);
        assert_eq!(log_plus(0.5).unwrap(), 0.0);
        assert_eq!(log_plus(8.0).unwrap(), 3.0);
        assert!(matches!(log_plus(0.0), Err(Error::Domain(_))));
        assert!(matches!(log_plus(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn rate_single_user() {
        let r = computation_rate(&h(&[0.5]), &a(&[1]), p(100.0)).unwrap();
        assert_relative_eq!(r.rate.value(), 0.5 * 26f64.log2(), max_relative = 1e-14);
        assert_eq!(r.nnz, 1);
    }

    #[test]
    fn rate_two_users_hand_value() {
        // inner = 2 - 10*4/21 = 2/21; rate = 1/2 log2(21/2)
        let r = computation_rate(&h(&[1.0, 1.0]), &a(&[1, 1]), p(10.0)).unwrap();
        assert_relative_eq!(r.rate.value(), 0.5 * 10.5f64.log2(), max_relative = 1e-14);
        assert_relative_eq!(r.rate.value(), 1.696_158_711_389_380_1, max_relative = 1e-14);
        assert_relative_eq!(r.alpha, 20.0 / 21.0, max_relative = 1e-15);
        assert_eq!(r.angle, 0.0);
        assert_eq!(r.sum_rate, r.rate.times(2));
    }

    #[test]
    fn rate_clamps_to_zero() {
        let r = computation_rate(&h(&[0.1, 0.1]), &a(&[3, 3]), p(1.0)).unwrap();
        assert_eq!(r.rate, Rate::ZERO);
        assert_eq!(r.sum_rate, Rate::ZERO);
    }

    #[test]
    fn rate_errors() {
        assert!(matches!(
            computation_rate(&h(&[1.0]), &a(&[1, 1]), p(1.0)),
            Err(Error::Usage(_))
        ));
        assert!(CoeffVector::new(vec![0, 0]).is_err());
        assert!(ChannelVector::new(vec![f64::NAN]).is_err());
        assert!(ChannelVector::new(vec![]).is_err());
        assert!(Power::new(0.0).is_err());
    }

    #[test]
    fn degenerate_collinear_is_unbounded() {
        // P|h|^2 huge and a parallel to h drives the inner term below tolerance.
        let r = computation_rate(&h(&[1.0, 1.0]), &a(&[1, 1]), p(1e13)).unwrap();
        assert!(r.rate.is_unbounded());
        assert!(r.sum_rate.is_unbounded());
    }

    #[test]
    fn alpha_form() {
        let (hh, aa, pp) = (h(&[1.0, 1.0]), a(&[1, 1]), p(10.0));
        assert_eq!(computation_rate_alpha(&hh, &aa, pp, 0.0).unwrap(), Rate::ZERO);
        let at_mmse = computation_rate_alpha(&hh, &aa, pp, 20.0 / 21.0).unwrap();
        let direct = computation_rate(&hh, &aa, pp).unwrap().rate;
        assert_relative_eq!(at_mmse.value(), direct.value(), max_relative = 1e-12);
        let off = computation_rate_alpha(&hh, &aa, pp, 0.5).unwrap();
        assert!(off.value() < direct.value());
    }

    #[test]
    fn mmse_alpha_values() {
        assert_relative_eq!(
            mmse_alpha(&h(&[1.0, 1.0]), &a(&[1, 1]), p(10.0)).unwrap(),
            20.0 / 21.0,
            max_relative = 1e-15
        );
        assert_eq!(mmse_alpha(&h(&[1.0, -1.0]), &a(&[1, 1]), p(5.0)).unwrap(), 0.0);
        let v = mmse_alpha(&h(&[0.7, 0.2]), &a(&[1, 0]), p(3.0)).unwrap();
        assert_relative_eq!(v, 3.0 * 0.7 / (1.0 + 3.0 * 0.53), max_relative = 1e-15);
    }

    #[test]
    fn angles() {
        assert_relative_eq!(angle_between(&h(&[1.0, 0.0]), &a(&[0, 1])).unwrap(), PI / 2.0);
        assert_eq!(angle_between(&h(&[2.0, 2.0]), &a(&[1, 1])).unwrap(), 0.0);
        assert_relative_eq!(
            angle_between(&h(&[1.0, 1.0, 0.0]), &a(&[1, 1, 1])).unwrap(),
            (2.0 / 6f64.sqrt()).acos(),
            max_relative = 1e-14
        );
        assert_relative_eq!(angle_between(&h(&[-1.0, -1.0]), &a(&[1, 1])).unwrap(), PI);
        assert!(angle_between(&h(&[0.0, 0.0]), &a(&[1, 1])).is_err());
    }

    #[test]
    fn high_snr() {
        // unit vector: cos theta = |h1|/|h|
        let hh = h(&[0.6, 0.8]);
        let sin2: f64 = 1.0 - 0.36;
        assert_relative_eq!(
            high_snr_rate(&hh, &a(&[1, 0])).unwrap().value(),
            0.5 * (1.0 / sin2).log2(),
            max_relative = 1e-14
        );
        assert!(high_snr_rate(&h(&[1.0, 1.0]), &a(&[1, 1])).unwrap().is_unbounded());
        let lim = high_snr_rate(&h(&[1.0, 2.0]), &a(&[1, 1])).unwrap().value();
        let finite = computation_rate(&h(&[1.0, 2.0]), &a(&[1, 1]), p(1e8)).unwrap().rate.value();
        assert!((lim - finite).abs() < 1e-3);
    }

    #[test]
    fn high_snr_gap_shrinks_with_power() {
        let (hh, aa) = (h(&[1.0, 2.0, -0.3]), a(&[1, 2, 0]));
        let lim = high_snr_rate(&hh, &aa).unwrap().value();
        let gaps: Vec<f64> = [1e2, 1e4, 1e6, 1e8]
            .iter()
            .map(|&pp| (computation_rate(&hh, &aa, p(pp)).unwrap().rate.value() - lim).abs())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    }

    #[test]
    fn unit_vector_closed_form() {
        let hh = h(&[0.3, -1.2, 0.8]);
        let pp = 7.0;
        let r = computation_rate(&hh, &a(&[0, 1, 0]), p(pp)).unwrap().rate.value();
        let rest = 0.09 + 0.64;
        let expect = 0.5 * (1.0 + pp * 1.44 / (1.0 + pp * rest)).log2();
        assert_relative_eq!(r, expect, max_relative = 1e-13);
    }

    #[test]
    fn rate_ones_matches_general() {
        let v = [0.4, 1.1, 0.9];
        assert_eq!(rate_ones(&v, 30.0), rate_slices(&v, &[1, 1, 1], 30.0));
    }
}
