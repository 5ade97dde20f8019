//! Choosing which `k` of the `L` users transmit.
//!
//! [`algorithm1`] is the sorted-window scheduler for the all-ones class of
//! coefficient vectors: sort `|h|`, score every run of `k` consecutive sorted
//! magnitudes against the all-ones vector, keep the best run and give each
//! chosen user the sign of its own channel. It costs `O(L log L + (L-k) k^2)`.
//! The exhaustive oracles below scan all `C(L, k)` subsets and are what the
//! window scheduler is validated against.

use rand::Rng;
use serde::Serialize;

use crate::coeff_search;
use crate::error::{Error, Result};
use crate::rate::{self, ChannelVector, CoeffVector, Power, Rate};

/// Largest number of subsets an exhaustive scan will visit.
pub const MAX_SUBSETS: f64 = 1e7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleResult {
    /// Indices into the full population, in the same order as `coeffs`.
    pub user_indices: Vec<usize>,
    pub sub_channel: ChannelVector,
    pub coeffs: CoeffVector,
    pub rate: Rate,
    /// `nnz(coeffs) * rate`.
    pub sum_rate: Rate,
}

impl ScheduleResult {
    fn new(h_l: &ChannelVector, user_indices: Vec<usize>, coeffs: CoeffVector, rate: Rate) -> Self {
        let sub_channel = h_l.select(&user_indices);
        let sum_rate = rate.times(coeffs.nnz());
        ScheduleResult {
            user_indices,
            sub_channel,
            coeffs,
            rate,
            sum_rate,
        }
    }
}

/// `C(n, k)` as a float, for guards.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_k(l: usize, k: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::usage("k must be at least 1"));
    }
    if k > l {
        return Err(Error::usage(format!("k = {k} exceeds the population size L = {l}")));
    }
    Ok(())
}

fn check_guard(l: usize, k: usize) -> Result<()> {
    check_k(l, k)?;
    let n = binomial(l, k);
    if n > MAX_SUBSETS {
        return Err(Error::Resource(format!(
            "C({l},{k}) = {n:.3e} subsets exceeds the limit of {MAX_SUBSETS:.0e}"
        )));
    }
    Ok(())
}

/// Call `f` on every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k == 0 || k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Indices of `h` ordered by ascending magnitude, ties by index.
fn magnitude_order(h: &[f64], idx: &mut [usize]) {
    idx.sort_by(|&i, &j| h[i].abs().total_cmp(&h[j].abs()).then(i.cmp(&j)));
}

fn signs(h: &[f64]) -> Vec<i64> {
    h.iter().map(|&x| if x < 0.0 { -1 } else { 1 }).collect()
}

/// Sorted-window scheduler over the all-ones coefficient class.
pub fn algorithm1(h_l: &ChannelVector, k: usize, p: Power) -> Result<ScheduleResult> {
    algorithm1_probed(h_l, k, p, |_, _| {})
}

/// [`algorithm1`] reporting every scored window `(start, rate)` to `probe`.
pub fn algorithm1_probed(
    h_l: &ChannelVector,
    k: usize,
    p: Power,
    mut probe: impl FnMut(usize, Rate),
) -> Result<ScheduleResult> {
    let l = h_l.len();
    check_k(l, k)?;
    let h = h_l.values();
    let mut order: Vec<usize> = (0..l).collect();
    magnitude_order(h, &mut order);
    let sorted: Vec<f64> = order.iter().map(|&i| h[i].abs()).collect();

    let mut best: Option<(usize, Rate)> = None;
    for start in 0..=(l - k) {
        let r = rate::rate_ones(&sorted[start..start + k], p.value());
        probe(start, r);
        if best.is_none_or(|(_, b)| r > b) {
            best = Some((start, r));
        }
    }
    let (start, r) = best.expect("at least one window");
    let users = order[start..start + k].to_vec();
    let coeffs = CoeffVector::from_raw(signs(&h_l.select(&users).into_inner()));
    Ok(ScheduleResult::new(h_l, users, coeffs, r))
}

/// Exhaustive scan of every `k`-subset with sign-aligned all-ones coefficients.
pub fn oracle_allones(h_l: &ChannelVector, k: usize, p: Power) -> Result<ScheduleResult> {
    check_guard(h_l.len(), k)?;
    let h = h_l.values();
    let mut best: Option<(Vec<usize>, Rate)> = None;
    let mut users = vec![0usize; k];
    let mut mags = vec![0.0f64; k];
    for_each_subset(h.len(), k, |s| {
        users.copy_from_slice(s);
        magnitude_order(h, &mut users);
        for (m, &u) in mags.iter_mut().zip(&users) {
            *m = h[u].abs();
        }
        let r = rate::rate_ones(&mags, p.value());
        if best.as_ref().is_none_or(|(_, b)| r > *b) {
            best = Some((users.clone(), r));
        }
    });
    let (users, r) = best.expect("at least one subset");
    let coeffs = CoeffVector::from_raw(signs(&h_l.select(&users).into_inner()));
    Ok(ScheduleResult::new(h_l, users, coeffs, r))
}

/// Ceiling on `nnz(a) * R(h, a)` over all `a` for a subset with squared
/// norm `s2`: `R <= 1/2 log+((1 + P s2) / |a|^2)` and `|a|^2 >= nnz(a)`.
fn sum_rate_ceiling(s2: f64, k: usize, p: f64) -> f64 {
    (1..=k)
        .map(|m| m as f64 * 0.5 * ((1.0 + p * s2) / m as f64).log2().max(0.0))
        .fold(0.0, f64::max)
}

/// Exhaustive scan over every subset and every admissible coefficient vector,
/// maximising `nnz(a) * R(h, a)`. Subsets whose norm alone rules them out
/// are skipped; the result is the same as a full scan.
pub fn oracle_full(h_l: &ChannelVector, k: usize, p: Power) -> Result<ScheduleResult> {
    oracle_full_with(h_l, k, p, true)
}

fn oracle_full_with(h_l: &ChannelVector, k: usize, p: Power, prune: bool) -> Result<ScheduleResult> {
    check_guard(h_l.len(), k)?;
    let h = h_l.values();
    let mut best: Option<(Vec<usize>, CoeffVector, Rate, Rate)> = None;
    let mut err = None;
    for_each_subset(h.len(), k, |s| {
        if err.is_some() {
            return;
        }
        if prune {
            if let Some(b) = &best {
                let s2: f64 = s.iter().map(|&i| h[i] * h[i]).sum();
                if sum_rate_ceiling(s2, k, p.value()) + 1e-9 < b.3.value() {
                    return;
                }
            }
        }
        let sub = h_l.select(s);
        match coeff_search::optimal_sum_rate_coeff(&sub, p) {
            Ok((a, r)) => {
                if best.as_ref().is_none_or(|b| r.sum_rate > b.3) {
                    best = Some((s.to_vec(), a, r.rate, r.sum_rate));
                }
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let (users, a, r, _) = best.expect("at least one subset");
    Ok(ScheduleResult::new(h_l, users, a, r))
}

/// Place the magnitudes `mags` (any order) against `a` so that the largest
/// `|h|` meets the largest `|a_i|`, and return the signed arrangement of
/// user indices. By the rearrangement inequality this maximises `|h.a|`
/// over orderings of the subset.
fn arrange(h: &[f64], subset: &[usize], a_rank: &[usize], out: &mut [usize]) {
    let mut users = subset.to_vec();
    magnitude_order(h, &mut users);
    for (rank, &pos) in a_rank.iter().enumerate() {
        out[pos] = users[rank];
    }
}

/// Positions of `a` ordered by ascending `|a_i|`, ties by position.
fn coeff_rank(a: &[i64]) -> Vec<usize> {
    let mut pos: Vec<usize> = (0..a.len()).collect();
    pos.sort_by(|&i, &j| a[i].abs().cmp(&a[j].abs()).then(i.cmp(&j)));
    pos
}

fn fixed_coeff_scan(
    h_l: &ChannelVector,
    a: &CoeffVector,
    mut score: impl FnMut(&[f64], &[i64]) -> f64,
) -> Result<(Vec<usize>, CoeffVector)> {
    let k = a.len();
    check_guard(h_l.len(), k)?;
    let h = h_l.values();
    let rank = coeff_rank(a.values());
    let mags: Vec<i64> = a.values().iter().map(|v| v.abs()).collect();
    let mut users = vec![0usize; k];
    let mut sub = vec![0.0f64; k];
    let mut best: Option<(Vec<usize>, f64)> = None;
    for_each_subset(h.len(), k, |s| {
        arrange(h, s, &rank, &mut users);
        for (x, &u) in sub.iter_mut().zip(&users) {
            *x = h[u].abs();
        }
        let v = score(&sub, &mags);
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((users.clone(), v));
        }
    });
    let (users, _) = best.expect("at least one subset");
    let coeffs = coeff_search::align_signs(a, &h_l.select(&users))?;
    Ok((users, coeffs))
}

/// Subset (and user-to-coefficient assignment) with the smallest angle to
/// the fixed vector `a`. Selection ignores power; the reported rate uses `p`
/// when given and the high-SNR limit otherwise.
pub fn min_angle_schedule(h_l: &ChannelVector, a: &CoeffVector, p: Option<Power>) -> Result<ScheduleResult> {
    let (users, coeffs) = fixed_coeff_scan(h_l, a, |h, a| {
        let d = rate::dot(h, a);
        d * d / rate::norm2(h)
    })?;
    let sub = h_l.select(&users);
    let r = match p {
        Some(p) => rate::computation_rate(&sub, &coeffs, p)?.rate,
        None => rate::high_snr_rate(&sub, &coeffs)?,
    };
    Ok(ScheduleResult::new(h_l, users, coeffs, r))
}

/// Subset maximising `R(h, a)` for the fixed vector `a`.
pub fn best_schedule_for_coeff(h_l: &ChannelVector, a: &CoeffVector, p: Power) -> Result<ScheduleResult> {
    let (users, coeffs) = fixed_coeff_scan(h_l, a, |h, a| -rate::inner_term(h, a, p.value()))?;
    let r = rate::computation_rate(&h_l.select(&users), &coeffs, p)?.rate;
    Ok(ScheduleResult::new(h_l, users, coeffs, r))
}

/// Uniformly random `k`-subset of `0..l`, ascending.
pub fn random_subset<R: Rng + ?Sized>(l: usize, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    check_k(l, k)?;
    let mut s = rand::seq::index::sample(rng, l, k).into_vec();
    s.sort_unstable();
    Ok(s)
}

/// Random subset with rate-optimal coefficients for it.
pub fn random_schedule<R: Rng + ?Sized>(h_l: &ChannelVector, k: usize, p: Power, rng: &mut R) -> Result<ScheduleResult> {
    let users = random_subset(h_l.len(), k, rng)?;
    let (a, r) = coeff_search::optimal_coeff(&h_l.select(&users), p)?;
    Ok(ScheduleResult::new(h_l, users, a, r.rate))
}

/// Random subset with the fixed vector `a`, sign-aligned to the subset.
pub fn random_schedule_fixed<R: Rng + ?Sized>(
    h_l: &ChannelVector,
    a: &CoeffVector,
    p: Power,
    rng: &mut R,
) -> Result<ScheduleResult> {
    let users = random_subset(h_l.len(), a.len(), rng)?;
    let sub = h_l.select(&users);
    let coeffs = coeff_search::align_signs(a, &sub)?;
    let r = rate::computation_rate(&sub, &coeffs, p)?.rate;
    Ok(ScheduleResult::new(h_l, users, coeffs, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn h(v: &[f64]) -> ChannelVector {
        ChannelVector::new(v.to_vec()).unwrap()
    }
    fn p(x: f64) -> Power {
        Power::new(x).unwrap()
    }

    #[test]
    fn subsets_enumerated_in_order() {
        let mut all = vec![];
        for_each_subset(5, 3, |s| all.push(s.to_vec()));
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[9], vec![2, 3, 4]);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(binomial(45, 3), 14190.0);
    }

    #[test]
    fn single_window_takes_everyone() {
        let hh = h(&[0.3, -1.2, 0.8]);
        let s = algorithm1(&hh, 3, p(10.0)).unwrap();
        let mut u = s.user_indices.clone();
        u.sort();
        assert_eq!(u, vec![0, 1, 2]);
        for (c, x) in s.coeffs.values().iter().zip(s.sub_channel.values()) {
            assert_eq!(*c, if *x < 0.0 { -1 } else { 1 });
        }
    }

    #[test]
    fn five_user_example() {
        let hh = h(&[0.2, -1.01, 3.0, 1.0, 0.98]);
        let s = algorithm1(&hh, 3, p(100.0)).unwrap();
        assert_eq!(s.user_indices, vec![4, 3, 1]);
        assert_eq!(s.sub_channel.values(), &[0.98, 1.0, -1.01]);
        assert_eq!(s.coeffs.values(), &[1, 1, -1]);
        assert_eq!(s.sum_rate, s.rate.times(3));
        let o = oracle_allones(&hh, 3, p(100.0)).unwrap();
        assert_eq!(o.rate, s.rate);
        assert_eq!(o.user_indices, s.user_indices);
    }

    #[test]
    fn window_count_probe() {
        let hh = h(&[0.5, -0.1, 2.0, 1.3, -0.7, 0.9, 1.1]);
        for k in 1..=7 {
            let mut n = 0;
            algorithm1_probed(&hh, k, p(5.0), |_, _| n += 1).unwrap();
            assert_eq!(n, 7 - k + 1);
        }
    }

    #[test]
    fn k_errors() {
        let hh = h(&[1.0, 2.0]);
        assert!(matches!(algorithm1(&hh, 3, p(1.0)), Err(Error::Usage(_))));
        assert!(matches!(algorithm1(&hh, 0, p(1.0)), Err(Error::Usage(_))));
        let big = ChannelVector::new(vec![1.0; 500]).unwrap();
        assert!(matches!(oracle_allones(&big, 4, p(1.0)), Err(Error::Resource(_))));
    }

    #[test]
    fn oracle_allones_k1_picks_strongest() {
        let hh = h(&[0.5, -2.5, 1.0]);
        let o = oracle_allones(&hh, 1, p(4.0)).unwrap();
        assert_eq!(o.user_indices, vec![1]);
        assert_eq!(o.coeffs.values(), &[-1]);
        assert!((o.rate.value() - 0.5 * (1.0f64 + 4.0 * 6.25).log2()).abs() < 1e-14);
    }

    #[test]
    fn pruned_oracle_matches_full_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for l in [4usize, 9, 16] {
            for _ in 0..20 {
                let hl = crate::experiments::sample_channel(l, &mut rng);
                for pw in [1.0, 100.0] {
                    let a = oracle_full_with(&hl, 3, p(pw), true).unwrap();
                    let b = oracle_full_with(&hl, 3, p(pw), false).unwrap();
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn oracle_full_prefers_pairs_when_channels_match() {
        let hh = h(&[10.0, 10.0, 0.01]);
        let o = oracle_full(&hh, 2, p(100.0)).unwrap();
        assert_eq!(o.user_indices, vec![0, 1]);
        assert_eq!(o.coeffs.values(), &[1, 1]);
        let unit = coeff_search::best_unit_vector(&hh, p(100.0)).unwrap().1;
        assert!(o.sum_rate.value() > unit.sum_rate.value());
        let single = oracle_full(&h(&[0.4]), 1, p(3.0)).unwrap();
        assert_eq!(single.user_indices, vec![0]);
    }

    #[test]
    fn min_angle_unit_like_picks_largest() {
        let hh = h(&[0.2, -3.0, 1.0, 0.5]);
        let a = CoeffVector::new(vec![1, 0, 0]).unwrap();
        let s = min_angle_schedule(&hh, &a, Some(p(10.0))).unwrap();
        assert_eq!(s.user_indices[0], 1);
        assert_eq!(s.coeffs.values()[0], -1);
    }

    #[test]
    fn random_schedule_full_population() {
        let hh = h(&[0.2, -3.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_schedule(&hh, 3, p(10.0), &mut rng).unwrap();
        assert_eq!(s.user_indices, vec![0, 1, 2]);
        let a = ChaCha8Rng::seed_from_u64(9);
        let b = ChaCha8Rng::seed_from_u64(9);
        let big = ChannelVector::new((0..30).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
        let s1 = random_schedule(&big, 4, p(10.0), &mut a.clone()).unwrap();
        let s2 = random_schedule(&big, 4, p(10.0), &mut b.clone()).unwrap();
        assert_eq!(s1, s2);
    }
}
