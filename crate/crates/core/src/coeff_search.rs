//! Integer coefficient vectors: exhaustive enumeration of the admissible
//! ball, the rate-optimal vector for a channel, and the small helpers built
//! around sign alignment and unit vectors.
//!
//! The optimisers do not walk the whole ball `|a|^2 <= 1 + P|h|^2`. Maximising
//! the rate is minimising the positive definite form
//! `a^T (I - c h h^T) a` with `c = P / (1 + P|h|^2)`, so they run a
//! Fincke-Pohst enumeration whose radius shrinks to the incumbent. Every
//! vector with a strictly positive rate has form value below 1, which keeps
//! the enumerated set tiny. [`enumerate_candidates`] is the plain lexicographic
//! scan and serves as the reference in tests.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::rate::{self, ChannelVector, CoeffVector, Power, Rate, RateResult};

/// Two rates closer than this are treated as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Slack on the search radius so that near-ties are never pruned.
const RADIUS_SLACK: f64 = 1e-9;

/// The admissible ball for a channel: every non-zero integer `a` with
/// `|a|^2 <= 1 + P|h|^2`, one representative per `{a, -a}` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchDomain {
    pub dim: usize,
    pub norm_bound: f64,
}

impl SearchDomain {
    pub fn for_channel(h: &ChannelVector, p: Power) -> Self {
        SearchDomain {
            dim: h.len(),
            norm_bound: 1.0 + p.value() * h.norm2(),
        }
    }

    pub fn candidates(&self) -> Result<Candidates> {
        enumerate_candidates(self.dim, self.norm_bound)
    }
}

/// Lexicographic scan over `[-m, m]^dim`, `m = floor(sqrt(bound))`, keeping
/// vectors whose first non-zero entry is positive and whose squared norm fits.
#[derive(Debug, Clone)]
pub struct Candidates {
    m: i64,
    bound: i64,
    current: Vec<i64>,
    done: bool,
}

impl Candidates {
    fn advance(&mut self) -> bool {
        for i in (0..self.current.len()).rev() {
            if self.current[i] < self.m {
                self.current[i] += 1;
                return true;
            }
            self.current[i] = -self.m;
        }
        false
    }
}

impl Iterator for Candidates {
    type Item = CoeffVector;

    fn next(&mut self) -> Option<CoeffVector> {
        while !self.done {
            let v = self.current.clone();
            if !self.advance() {
                self.done = true;
            }
            if is_canonical(&v) && rate::int_norm2(&v) <= self.bound {
                return Some(CoeffVector::from_raw(v));
            }
        }
        None
    }
}

fn is_canonical(v: &[i64]) -> bool {
    v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

pub fn enumerate_candidates(dim: usize, norm_bound: f64) -> Result<Candidates> {
    if dim == 0 {
        return Err(Error::usage("dimension must be at least 1"));
    }
    if !(norm_bound >= 1.0) {
        return Err(Error::domain(format!(
            "norm bound {norm_bound} < 1 leaves the search domain empty"
        )));
    }
    if !norm_bound.is_finite() || norm_bound > 1e12 {
        return Err(Error::Resource(format!("norm bound {norm_bound} too large to enumerate")));
    }
    let bound = norm_bound.floor() as i64;
    let m = (bound as f64).sqrt().floor() as i64;
    Ok(Candidates {
        m,
        bound,
        current: vec![-m; dim],
        done: false,
    })
}

/// Incumbent comparison: higher value first (within [`TIE_TOL`]), then smaller
/// squared norm, then the lexicographically smaller canonical form.
fn beats(value: Rate, norm2: i64, canon: &[i64], best: &(Rate, i64, Vec<i64>)) -> bool {
    let tiebreak = || (norm2, canon).cmp(&(best.1, best.2.as_slice())) == Ordering::Less;
    match (value, best.0) {
        (Rate::Finite(x), Rate::Finite(y)) => {
            if x > y + TIE_TOL {
                true
            } else if (x - y).abs() <= TIE_TOL {
                tiebreak()
            } else {
                false
            }
        }
        (Rate::Unbounded, Rate::Unbounded) => tiebreak(),
        (Rate::Unbounded, Rate::Finite(_)) => true,
        (Rate::Finite(_), Rate::Unbounded) => false,
    }
}

fn canonical(v: &[i64]) -> Vec<i64> {
    if is_canonical(v) {
        v.to_vec()
    } else {
        v.iter().map(|x| -x).collect()
    }
}

/// Upper Cholesky factor in Fincke-Pohst form: diagonal `q[i][i]` and
/// off-diagonal `q[i][j] = r_ij / r_ii` for `j > i`.
fn fp_factor(gram: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = gram.len();
    let mut q: Vec<Vec<f64>> = gram.to_vec();
    for i in 0..n {
        for j in (i + 1)..n {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in (i + 1)..n {
            for l in k..n {
                q[k][l] -= q[k][i] * q[i][l];
            }
        }
        if !(q[i][i] > 0.0) {
            return None;
        }
    }
    Some(q)
}

/// Visit every non-zero integer vector `x` with `x^T G x <= radius`. The
/// visitor may return a smaller radius to prune the rest of the walk.
fn fincke_pohst(gram: &[Vec<f64>], mut radius: f64, mut visit: impl FnMut(&[i64]) -> Option<f64>) -> Result<()> {
    let n = gram.len();
    let q = fp_factor(gram).ok_or_else(|| Error::Resource("quadratic form is numerically singular".into()))?;
    let mut x = vec![0i64; n];
    let mut remaining = vec![0.0f64; n + 1];
    let mut center = vec![0.0f64; n];
    let mut upper = vec![0i64; n];

    // level i: choose x[i] given x[i+1..]
    fn bounds(q: &[Vec<f64>], x: &[i64], i: usize, rem: f64) -> (f64, i64, i64) {
        let n = q.len();
        let c: f64 = -((i + 1)..n).map(|j| q[i][j] * x[j] as f64).sum::<f64>();
        let w = (rem.max(0.0) / q[i][i]).sqrt();
        (c, (c - w).ceil() as i64, (c + w).floor() as i64)
    }

    let mut i = n - 1;
    remaining[n] = radius;
    let (c, lo, hi) = bounds(&q, &x, i, radius);
    center[i] = c;
    x[i] = lo;
    upper[i] = hi;
    loop {
        if x[i] > upper[i] {
            if i == n - 1 {
                return Ok(());
            }
            i += 1;
            x[i] += 1;
            continue;
        }
        let d = x[i] as f64 - center[i];
        let rem = remaining[i + 1] - q[i][i] * d * d;
        if rem < -1e-12 * radius.max(1e-300) {
            x[i] += 1;
            continue;
        }
        if i == 0 {
            if x.iter().any(|&v| v != 0) {
                if let Some(r) = visit(&x) {
                    if r < radius {
                        // Radii higher in the tree refer to the old ball and are only loose.
                        let shrink = radius - r;
                        radius = r;
                        for v in remaining.iter_mut() {
                            *v -= shrink;
                        }
                    }
                }
            }
            x[0] += 1;
            continue;
        }
        remaining[i] = rem;
        i -= 1;
        let (c, lo, hi) = bounds(&q, &x, i, remaining[i + 1]);
        center[i] = c;
        x[i] = lo;
        upper[i] = hi;
    }
}

/// Gram matrix `I - c h h^T` of the rate form.
fn rate_gram(h: &[f64], p: f64) -> Vec<Vec<f64>> {
    let c = p / (1.0 + p * rate::norm2(h));
    let n = h.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 1.0 } else { 0.0 } - c * h[i] * h[j])
                .collect()
        })
        .collect()
}

/// Shared search: maximise `weight(a) * R(h, a)` where `weight` is 1 for the
/// rate objective or `nnz(a)` for the sum-rate objective.
fn search(h: &[f64], p: f64, sum_objective: bool) -> Result<(Vec<i64>, Rate)> {
    let n = h.len();
    let value = |a: &[i64]| {
        let r = rate::rate_slices(h, a, p);
        if sum_objective {
            r.times(a.iter().filter(|&&v| v != 0).count())
        } else {
            r
        }
    };

    // Seed with the unit vectors, plus the sign-aligned all-ones vector for sums.
    let mut seeds: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            let mut e = vec![0; n];
            e[i] = 1;
            e
        })
        .collect();
    if sum_objective {
        seeds.push(h.iter().map(|&x| if x < 0.0 { -1 } else { 1 }).collect());
    }
    let mut best: Option<(Rate, i64, Vec<i64>)> = None;
    let consider = |a: &[i64], best: &mut Option<(Rate, i64, Vec<i64>)>| {
        let canon = canonical(a);
        let v = value(&canon);
        let n2 = rate::int_norm2(&canon);
        let take = match best {
            None => true,
            Some(b) => beats(v, n2, &canon, b),
        };
        if take {
            *best = Some((v, n2, canon));
        }
    };
    for s in &seeds {
        consider(s, &mut best);
    }

    // Largest form value a candidate may have and still reach the incumbent:
    // weight * (-1/2 log2 f) >= best  =>  f <= 2^(-2 best / weight_max).
    let weight_max = if sum_objective { n as f64 } else { 1.0 };
    let radius_for = |r: Rate| match r {
        Rate::Finite(x) => (2f64.powf(-2.0 * (x - TIE_TOL) / weight_max) * (1.0 + RADIUS_SLACK)).min(1.0 + RADIUS_SLACK),
        Rate::Unbounded => rate::DEGENERATE_TOL * (1.0 + RADIUS_SLACK),
    };
    let start = radius_for(best.as_ref().unwrap().0);
    let gram = rate_gram(h, p);
    fincke_pohst(&gram, start, |a| {
        if !is_canonical(a) {
            return None;
        }
        consider(a, &mut best);
        Some(radius_for(best.as_ref().unwrap().0))
    })?;
    let (v, _, a) = best.unwrap();
    Ok((a, v))
}

fn orient(mut a: Vec<i64>, h: &[f64]) -> Vec<i64> {
    if rate::dot(h, &a) < 0.0 {
        a.iter_mut().for_each(|v| *v = -*v);
    }
    a
}

/// Rate-maximising coefficient vector, oriented so that `h.a >= 0`.
pub fn optimal_coeff(h: &ChannelVector, p: Power) -> Result<(CoeffVector, RateResult)> {
    let (a, _) = search(h.values(), p.value(), false)?;
    let a = CoeffVector::from_raw(orient(a, h.values()));
    let r = rate::computation_rate(h, &a, p)?;
    Ok((a, r))
}

/// Coefficient vector maximising `nnz(a) * R(h, a)`, oriented so that `h.a >= 0`.
pub fn optimal_sum_rate_coeff(h: &ChannelVector, p: Power) -> Result<(CoeffVector, RateResult)> {
    let (a, _) = search(h.values(), p.value(), true)?;
    let a = CoeffVector::from_raw(orient(a, h.values()));
    let r = rate::computation_rate(h, &a, p)?;
    Ok((a, r))
}

/// Reference optimiser: scans every vector of [`enumerate_candidates`].
/// Exponential in the dimension; intended for small problems and tests.
pub fn optimal_coeff_exhaustive(h: &ChannelVector, p: Power, sum_objective: bool) -> Result<(CoeffVector, RateResult)> {
    let domain = SearchDomain::for_channel(h, p);
    let mut best: Option<(Rate, i64, Vec<i64>)> = None;
    for a in domain.candidates()? {
        let r = rate::rate_slices(h.values(), a.values(), p.value());
        let v = if sum_objective { r.times(a.nnz()) } else { r };
        let n2 = a.norm2();
        let take = match &best {
            None => true,
            Some(b) => beats(v, n2, a.values(), b),
        };
        if take {
            best = Some((v, n2, a.into_inner()));
        }
    }
    let (_, _, a) = best.expect("domain contains the unit vectors");
    let a = CoeffVector::from_raw(orient(a, h.values()));
    let r = rate::computation_rate(h, &a, p)?;
    Ok((a, r))
}

/// Copy the signs of `h` onto the magnitudes of `a`. Zero entries of either
/// vector leave the entry of `a` unchanged.
pub fn align_signs(a: &CoeffVector, h: &ChannelVector) -> Result<CoeffVector> {
    if a.len() != h.len() {
        return Err(Error::usage("align_signs: length mismatch"));
    }
    let v = a
        .values()
        .iter()
        .zip(h.values())
        .map(|(&ai, &hi)| {
            if ai == 0 || hi == 0.0 {
                ai
            } else if hi < 0.0 {
                -ai.abs()
            } else {
                ai.abs()
            }
        })
        .collect();
    Ok(CoeffVector::from_raw(v))
}

/// `e_i` at the strongest user (lowest index on ties), sign-aligned.
pub fn best_unit_vector(h: &ChannelVector, p: Power) -> Result<(CoeffVector, RateResult)> {
    let hv = h.values();
    let mut best = 0;
    for (i, v) in hv.iter().enumerate() {
        if v.abs() > hv[best].abs() {
            best = i;
        }
    }
    if hv[best] == 0.0 {
        return Err(Error::usage("best unit vector undefined for a zero channel"));
    }
    let mut e = vec![0; hv.len()];
    e[best] = if hv[best] < 0.0 { -1 } else { 1 };
    let a = CoeffVector::from_raw(e);
    let r = rate::computation_rate(h, &a, p)?;
    Ok((a, r))
}

/// `cos^2(theta) / (1 + 1/(P|h|^2))`; for a fixed `a`, maximising this over
/// channel subsets maximises the rate.
pub fn tradeoff_objective(h: &ChannelVector, a: &CoeffVector, p: Power) -> Result<f64> {
    if h.len() != a.len() {
        return Err(Error::usage("tradeoff_objective: length mismatch"));
    }
    let h2 = h.norm2();
    if h2 == 0.0 {
        return Err(Error::usage("tradeoff objective undefined for a zero channel"));
    }
    let d = rate::dot(h.values(), a.values());
    let cos2 = d * d / (h2 * a.norm2() as f64);
    Ok(cos2 / (1.0 + 1.0 / (p.value() * h2)))
}

/// Bound on the probability that a non-unit `a` beats every unit vector:
/// `min(1, exp(-L (1 - 3/L) ln|a|))`.
pub fn unit_prob_bound(l: usize, a: &CoeffVector) -> Result<f64> {
    if l == 0 {
        return Err(Error::usage("L must be at least 1"));
    }
    if a.is_unit() {
        return Err(Error::usage("bound is undefined for a unit vector"));
    }
    let exponent = (l as f64 - 3.0) * 0.5 * (a.norm2() as f64).ln();
    Ok((-exponent).exp().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn h(v: &[f64]) -> ChannelVector {
        ChannelVector::new(v.to_vec()).unwrap()
    }
    fn p(x: f64) -> Power {
        Power::new(x).unwrap()
    }
    fn list(dim: usize, b: f64) -> Vec<Vec<i64>> {
        enumerate_candidates(dim, b).unwrap().map(|a| a.into_inner()).collect()
    }

    #[test]
    fn enumerate_small_domains() {
        let mut got = list(2, 1.5);
        got.sort();
        assert_eq!(got, vec![vec![0, 1], vec![1, 0]]);

        let mut got = list(2, 2.0);
        got.sort();
        assert_eq!(got, vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]]);

        assert_eq!(list(1, 9.3), vec![vec![1], vec![2], vec![3]]);
        assert!(matches!(enumerate_candidates(2, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn enumeration_count_matches_double_loop() {
        for n in 1..=100i64 {
            let mut brute = 0;
            for x in -n..=n {
                for y in -n..=n {
                    if (x, y) != (0, 0) && x * x + y * y <= n {
                        brute += 1;
                    }
                }
            }
            assert_eq!(list(2, n as f64).len(), brute / 2, "n={n}");
        }
    }

    #[test]
    fn enumeration_has_no_antipodes() {
        let all = list(3, 6.0);
        let set: std::collections::HashSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), all.len());
        for v in &all {
            let neg: Vec<i64> = v.iter().map(|x| -x).collect();
            assert!(!set.contains(&neg));
        }
    }

    #[test]
    fn optimal_coeff_examples() {
        let (a, _) = optimal_coeff(&h(&[5.0, 0.01, 0.01]), p(1.0)).unwrap();
        assert_eq!(a.values(), &[1, 0, 0]);
        let (a, _) = optimal_coeff(&h(&[1.0, 1.0]), p(100.0)).unwrap();
        assert_eq!(a.values(), &[1, 1]);
        let (a, _) = optimal_coeff(&h(&[-2.3]), p(50.0)).unwrap();
        assert_eq!(a.values(), &[-1]);
        let (a, _) = optimal_coeff(&h(&[0.7]), p(50.0)).unwrap();
        assert_eq!(a.values(), &[1]);
    }

    #[test]
    fn optimal_coeff_agrees_with_exhaustive_scan() {
        let chans = [
            vec![0.3, -1.4, 0.9],
            vec![1.1, 2.05, -0.4],
            vec![-0.8, 0.81, 1.62, 0.2],
            vec![2.0, 1.0, 3.01],
        ];
        for c in &chans {
            for &pp in &[1.0, 10.0, 100.0] {
                let hh = h(c);
                for sum in [false, true] {
                    let fast = if sum {
                        optimal_sum_rate_coeff(&hh, p(pp)).unwrap()
                    } else {
                        optimal_coeff(&hh, p(pp)).unwrap()
                    };
                    let slow = optimal_coeff_exhaustive(&hh, p(pp), sum).unwrap();
                    assert_eq!(fast.0, slow.0, "h={c:?} P={pp} sum={sum}");
                }
            }
        }
    }

    #[test]
    fn align_signs_examples() {
        let a = CoeffVector::new(vec![1, 1, 1]).unwrap();
        assert_eq!(align_signs(&a, &h(&[-0.5, 2.0, -3.0])).unwrap().values(), &[-1, 1, -1]);
        let a = CoeffVector::new(vec![1, 0, 2]).unwrap();
        assert_eq!(align_signs(&a, &h(&[-1.0, -1.0, 1.0])).unwrap().values(), &[-1, 0, 2]);
        let a = CoeffVector::new(vec![1, 1]).unwrap();
        assert_eq!(align_signs(&a, &h(&[1.0, 1.0])).unwrap().values(), &[1, 1]);
    }

    #[test]
    fn best_unit_examples() {
        let (a, _) = best_unit_vector(&h(&[0.1, -7.0, 2.0]), p(1.0)).unwrap();
        assert_eq!(a.values(), &[0, -1, 0]);
        let (a, r) = best_unit_vector(&h(&[3.0]), p(2.0)).unwrap();
        assert_eq!(a.values(), &[1]);
        assert_relative_eq!(r.rate.value(), 0.5 * 19f64.log2(), max_relative = 1e-14);
        let (a, _) = best_unit_vector(&h(&[1.0, 1.0]), p(1.0)).unwrap();
        assert_eq!(a.values(), &[1, 0]);
    }

    #[test]
    fn tradeoff_examples() {
        let ones = CoeffVector::ones(2);
        assert_relative_eq!(
            tradeoff_objective(&h(&[1.0, 1.0]), &ones, p(10.0)).unwrap(),
            20.0 / 21.0,
            max_relative = 1e-15
        );
        assert_eq!(tradeoff_objective(&h(&[1.0, -1.0]), &ones, p(10.0)).unwrap(), 0.0);
        let big = tradeoff_objective(&h(&[1e4, 1e4]), &ones, p(10.0)).unwrap();
        assert!((big - 1.0).abs() < 1e-8);
        assert!(tradeoff_objective(&h(&[0.0, 0.0]), &ones, p(1.0)).is_err());
    }

    #[test]
    fn unit_prob_bound_examples() {
        let a = CoeffVector::new(vec![1, 1, 1]).unwrap();
        assert_eq!(unit_prob_bound(3, &a).unwrap(), 1.0);
        let a = CoeffVector::new(vec![1, 1, 0]).unwrap();
        assert_relative_eq!(
            unit_prob_bound(30, &a).unwrap(),
            (-27.0 * 0.5 * 2f64.ln()).exp(),
            max_relative = 1e-14
        );
        assert!((unit_prob_bound(30, &a).unwrap() - (-9.357_486_937_559_262f64).exp()).abs() < 1e-12);
        assert!(unit_prob_bound(100_000, &a).unwrap() < 1e-300);
        assert!(unit_prob_bound(10, &CoeffVector::unit(3, 1)).is_err());
    }
}
