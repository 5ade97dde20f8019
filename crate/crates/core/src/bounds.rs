//! Closed-form lower and upper bounds on the expected sum-rate of a
//! `k`-user schedule out of `L` users, and their `log log L` scaling ratios.
//!
//! Outer logarithms are base 2 (bits); the logarithms inside the extreme-value
//! terms (`2 ln L`, `ln ln L`, `ln(2 sqrt L)`) are natural.
//!
//! The lower bound picks `k` users whose magnitudes fall in the band
//! `[u, u + delta]` with `u = sqrt(2 ln(2 sqrt L)) - delta`. A user lands in the
//! band with probability `p(u, delta) = 2 (Phi(u + delta) - Phi(u))`, and a
//! Chernoff bound controls the chance that fewer than `k` do.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;
use libm::erfc;

use crate::error::{Error, Result};
use crate::rate::Power;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub l: u64,
    pub k: u32,
    pub p: Power,
    pub delta: f64,
}

impl BoundParams {
    pub fn new(l: u64, k: u32, p: Power, delta: f64) -> Result<Self> {
        if l < 2 {
            return Err(Error::usage("L must be at least 2"));
        }
        if k < 1 {
            return Err(Error::usage("k must be at least 1"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::usage(format!("delta must be a positive real, got {delta}")));
        }
        Ok(BoundParams { l, k, p, delta })
    }

    pub fn u(&self) -> Result<f64> {
        u_of_l(self.l, self.delta)
    }

    pub fn p_success(&self) -> Result<f64> {
        Ok(p_success(self.u()?, self.delta))
    }

    /// `k < delta / (2 sqrt(2 pi)) * sqrt(L) + 1`, the condition stated with the
    /// first-order approximation of `p(u, delta)`.
    pub fn satisfies_k_constraint(&self) -> bool {
        (self.k as f64) < self.delta / (2.0 * (2.0 * PI).sqrt()) * (self.l as f64).sqrt() + 1.0
    }

    /// Whether `L p(u, delta) > k - 1`, i.e. the Chernoff tail bound applies.
    pub fn chernoff_valid(&self) -> Result<bool> {
        Ok(self.l as f64 * self.p_success()? > (self.k - 1) as f64)
    }
}

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// `sqrt(2 ln(2 sqrt L)) - delta`.
pub fn u_of_l(l: u64, delta: f64) -> Result<f64> {
    if l < 1 {
        return Err(Error::domain("L must be at least 1"));
    }
    let u = (2.0 * (2.0 * (l as f64).sqrt()).ln()).sqrt() - delta;
    if !(u > 0.0) {
        return Err(Error::domain(format!("u = {u} is not positive for L = {l}, delta = {delta}")));
    }
    Ok(u)
}

/// Probability that a standard normal has magnitude in `[u, u + delta]`,
/// `2 (Phi(u + delta) - Phi(u))`, computed from upper tails for accuracy.
pub fn p_success(u: f64, delta: f64) -> f64 {
    debug_assert!(u >= 0.0 && delta >= 0.0);
    let hi = if delta.is_infinite() { 0.0 } else { erfc((u + delta) / SQRT_2) };
    erfc(u / SQRT_2) - hi
}

/// Chernoff bound on the probability that fewer than `k` of `L` independent
/// trials with success probability `p` succeed:
/// `exp(-(L p - (k - 1))^2 / (2 p L))`.
pub fn chernoff_failure(l: u64, k: u32, p: f64) -> Result<f64> {
    let lp = l as f64 * p;
    let km1 = (k as f64) - 1.0;
    if !(lp > km1) {
        return Err(Error::domain(format!(
            "Chernoff bound needs L p > k - 1, got L p = {lp:.6e}, k - 1 = {km1}"
        )));
    }
    let d = lp - km1;
    Ok((-(d * d) / (2.0 * p * l as f64)).exp())
}

/// `(k/2) log+ ( [k (1 - g_angle g_norm (1 - failure))]^-1 )`.
fn lower_bound_with(params: &BoundParams, failure: f64) -> Result<f64> {
    let u = params.u()?;
    let d = params.delta;
    let k = params.k as f64;
    let angle = 1.0 / (1.0 + 2.0 * d / u + d * d / (u * u));
    let norm = 1.0 / (1.0 / (params.p.value() * k * u * u) + 1.0);
    let x = angle * norm * (1.0 - failure);
    let inv = k * (1.0 - x);
    Ok(0.5 * k * (-inv.log2()).max(0.0))
}

/// Finite-`L` lower bound with the Chernoff failure term in place of the
/// vanishing correction. Where the Chernoff condition `L p > k - 1` does not
/// hold, the probability of finding `k` users in the band is only known to
/// be non-negative, the failure term is 1 and the bound is 0.
pub fn lower_bound_sumrate(params: &BoundParams) -> Result<f64> {
    let failure = if params.chernoff_valid()? {
        chernoff_failure(params.l, params.k, params.p_success()?)?
    } else {
        1.0
    };
    lower_bound_with(params, failure)
}

/// The lower bound with its vanishing correction set to zero:
/// `(k/2) log+ ( [k (1 - P k u^4 / ((u + delta)^2 (1 + P k u^2)))]^-1 )`.
pub fn asymptotic_lower_bound_sumrate(params: &BoundParams) -> Result<f64> {
    lower_bound_with(params, 0.0)
}

/// `(k/2) log2(1 + P (2 ln L - ln ln L - 2 ln Gamma(1/2) + gamma/2))`.
pub fn upper_bound_sumrate(l: u64, k: u32, p: Power) -> Result<f64> {
    if l < 3 {
        return Err(Error::domain("upper bound needs L >= 3"));
    }
    let ln_l = (l as f64).ln();
    // 2 ln Gamma(1/2) = ln pi
    let evt = 2.0 * ln_l - ln_l.ln() - PI.ln() + EULER_GAMMA / 2.0;
    Ok(0.5 * k as f64 * (1.0 + p.value() * evt).log2())
}

fn loglog2(l: u64) -> Result<f64> {
    if l < 5 {
        return Err(Error::domain("scaling ratios need L >= 5"));
    }
    Ok((l as f64).log2().log2())
}

/// Asymptotic lower bound divided by `(k/4) log2 log2 L`.
pub fn lower_scaling_ratio(params: &BoundParams) -> Result<f64> {
    let denom = params.k as f64 / 4.0 * loglog2(params.l)?;
    Ok(asymptotic_lower_bound_sumrate(params)? / denom)
}

/// Upper bound divided by `(k/2) log2 log2 L`.
pub fn upper_scaling_ratio(l: u64, k: u32, p: Power) -> Result<f64> {
    let denom = k as f64 / 2.0 * loglog2(l)?;
    Ok(upper_bound_sumrate(l, k, p)? / denom)
}
