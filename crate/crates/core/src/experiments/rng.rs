//! Seeded random streams.
//!
//! Every trial owns a ChaCha8 stream. The 256-bit key is expanded from
//! `mix(seed, key)`, where `key` names the experiment and grid point, and
//! the ChaCha stream id is the trial index. Trial `t` therefore draws the
//! same numbers no matter which thread runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::rate::ChannelVector;

/// SplitMix64 finaliser.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Stream key for one grid point of one experiment.
pub fn stream_key(tag: &str, point: u64) -> u64 {
    let t = tag.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01B3));
    splitmix64(t ^ splitmix64(point))
}

pub fn trial_rng(seed: u64, key: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed) ^ key);
    rng.set_stream(trial);
    rng
}

/// `L` i.i.d. standard normal fading coefficients.
pub fn sample_channel<R: rand::Rng + ?Sized>(l: usize, rng: &mut R) -> ChannelVector {
    assert!(l >= 1, "L must be at least 1");
    let v: Vec<f64> = (0..l).map(|_| StandardNormal.sample(rng)).collect();
    ChannelVector::new(v).expect("normal draws are finite")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = sample_channel(8, &mut trial_rng(7, stream_key("x", 1), 0));
        let b = sample_channel(8, &mut trial_rng(7, stream_key("x", 1), 0));
        let c = sample_channel(8, &mut trial_rng(7, stream_key("x", 1), 1));
        let d = sample_channel(8, &mut trial_rng(7, stream_key("x", 2), 0));
        let e = sample_channel(8, &mut trial_rng(8, stream_key("x", 1), 0));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
        assert_ne!(a, e);
    }

    #[test]
    fn normal_moments() {
        let n = 1_000_000;
        let h = sample_channel(n, &mut trial_rng(1, stream_key("moments", 0), 0));
        let v = h.values();
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }
}
