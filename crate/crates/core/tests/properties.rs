use proptest::prelude::*;

use cfsched::bounds::{self, BoundParams};
use cfsched::coeff_search;
use cfsched::experiments::RankTracker;
use cfsched::rate::{self, ChannelVector, CoeffVector, Power};
use cfsched::scheduler;

fn channel(dim: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = ChannelVector> {
    prop::collection::vec(-3.0f64..3.0, dim).prop_map(|v| ChannelVector::new(v).unwrap())
}

fn with_coeffs(dim: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (ChannelVector, CoeffVector)> {
    channel(dim).prop_flat_map(|h| {
        let n = h.len();
        (
            Just(h),
            prop::collection::vec(-4i64..=4, n).prop_filter_map("all zero", |v| CoeffVector::new(v).ok()),
        )
    })
}

fn power() -> impl Strategy<Value = Power> {
    (-1.0f64..4.0).prop_map(|e| Power::new(10f64.powf(e)).unwrap())
}

proptest! {
    #[test]
    fn rate_is_nonnegative_and_below_the_strongest_user((h, a) in with_coeffs(1..=5), p in power()) {
        let r = rate::computation_rate(&h, &a, p).unwrap().rate.value();
        let hmax = h.values().iter().fold(0.0f64, |m, x| m.max(x * x));
        prop_assert!(r >= 0.0);
        prop_assert!(r <= 0.5 * (1.0 + p.value() * hmax).log2() + 1e-12);
    }

    #[test]
    fn rate_grows_with_power((h, a) in with_coeffs(1..=4), p in power()) {
        let lo = rate::computation_rate(&h, &a, p).unwrap().rate.value();
        let hi = rate::computation_rate(&h, &a, Power::new(p.value() * 2.0).unwrap()).unwrap().rate.value();
        prop_assert!(hi >= lo - 1e-12);
    }

    #[test]
    fn rate_ignores_global_sign_and_joint_permutation((h, a) in with_coeffs(2..=4), p in power()) {
        let r = rate::computation_rate(&h, &a, p).unwrap().rate.value();
        let neg = rate::computation_rate(&h, &a.negated(), p).unwrap().rate.value();
        let mut hv = h.values().to_vec();
        let mut av = a.values().to_vec();
        hv.rotate_left(1);
        av.rotate_left(1);
        let rot = rate::computation_rate(&ChannelVector::new(hv).unwrap(), &CoeffVector::new(av).unwrap(), p)
            .unwrap()
            .rate
            .value();
        prop_assert_eq!(r, neg);
        prop_assert!((r - rot).abs() <= 1e-12 * r.max(1.0));
    }

    #[test]
    fn optimal_coeff_beats_every_small_vector((h, a) in with_coeffs(2..=3), p in power()) {
        let (best, res) = coeff_search::optimal_coeff(&h, p).unwrap();
        let other = rate::computation_rate(&h, &a, p).unwrap().rate.value();
        prop_assert!(res.rate.value() >= other - 1e-12);
        let dot: f64 = h.values().iter().zip(best.values()).map(|(x, &y)| x * y as f64).sum();
        prop_assert!(dot >= 0.0);
    }

    #[test]
    fn schedulers_agree_and_nest(h in channel(3..=9), k in 1usize..=3, p in power()) {
        let fast = scheduler::algorithm1(&h, k, p).unwrap();
        let ones = scheduler::oracle_allones(&h, k, p).unwrap();
        let full = scheduler::oracle_full(&h, k, p).unwrap();
        prop_assert_eq!(fast.rate.value().to_bits(), ones.rate.value().to_bits());
        prop_assert!(full.sum_rate.value() >= fast.sum_rate.value() - 1e-12);
        prop_assert_eq!(fast.coeffs.nnz(), k);
        let mut users = fast.user_indices.clone();
        users.sort_unstable();
        users.dedup();
        prop_assert_eq!(users.len(), k);
    }

    #[test]
    fn bounds_are_ordered(e in 3u32..13, k in 1u32..6, p in power(), delta in 0.001f64..0.05) {
        let l = 10u64.pow(e);
        let bp = BoundParams::new(l, k, p, delta).unwrap();
        let ub = bounds::upper_bound_sumrate(l, k, p).unwrap();
        prop_assert!(bounds::lower_bound_sumrate(&bp).unwrap() <= ub);
        prop_assert!(bounds::lower_bound_sumrate(&bp).unwrap() <= bounds::asymptotic_lower_bound_sumrate(&bp).unwrap());
    }

    #[test]
    fn rank_never_exceeds_dimensions(rows in prop::collection::vec(prop::collection::vec(-2i64..=2, 6), 0..10)) {
        let mut t = RankTracker::new(6);
        let mut gained = 0;
        for r in &rows {
            gained += t.insert(r) as usize;
        }
        prop_assert_eq!(gained, t.rank());
        prop_assert!(t.rank() <= rows.len().min(6));
    }

    #[test]
    fn candidates_are_canonical(dim in 1usize..=4, bound in 1.0f64..12.0) {
        for a in coeff_search::enumerate_candidates(dim, bound).unwrap() {
            let first = *a.values().iter().find(|&&x| x != 0).unwrap();
            prop_assert!(first > 0);
            prop_assert!(a.norm2() as f64 <= bound);
        }
    }
}
