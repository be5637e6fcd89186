use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sample count behind the cached mean-distance constants.
pub const GEOMETRY_SAMPLES: usize = 2_000_000;

const GEOMETRY_SEED: u64 = 0x6d75_5f64_6973_7421;

static MEAN_DISTANCE: [OnceLock<f64>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];

/// Monte Carlo mean and standard error of the distance from a uniform point
/// of the unit `dimension`-cube to its center.
pub fn estimate_mean_center_distance(dimension: u8, samples: usize, seed: u64) -> (f64, f64) {
    assert!((1..=3).contains(&dimension), "dimension must be 1, 2 or 3");
    assert!(samples > 1, "need at least two samples");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = dimension as usize;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let mut r2 = 0.0;
        for _ in 0..d {
            let x: f64 = rng.gen::<f64>() - 0.5;
            r2 += x * x;
        }
        sum += r2.sqrt();
        sum_sq += r2;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Mean center distance of the unit `dimension`-cube, estimated once per
/// process with a fixed seed.
pub fn mean_center_distance(dimension: u8) -> f64 {
    assert!((1..=3).contains(&dimension), "dimension must be 1, 2 or 3");
    *MEAN_DISTANCE[dimension as usize - 1]
        .get_or_init(|| estimate_mean_center_distance(dimension, GEOMETRY_SAMPLES, GEOMETRY_SEED).0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_mean_is_a_quarter() {
        let (mean, se) = estimate_mean_center_distance(1, 200_000, 7);
        assert!((mean - 0.25).abs() < 4.0 * se, "{mean} +- {se}");
    }

    #[test]
    fn cached_value_is_stable() {
        assert_eq!(mean_center_distance(2), mean_center_distance(2));
        assert!(mean_center_distance(3) > mean_center_distance(2));
        assert!(mean_center_distance(2) > mean_center_distance(1));
    }
}
