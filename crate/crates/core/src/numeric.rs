//! Compensated accumulation helpers shared by the statistics pipeline.

/// Neumaier-compensated sum; accurate for long alternating-sign streams.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Two-pass mean and population (divide-by-n) variance with compensated sums.
pub fn mean_and_population_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(values.iter().copied()) / n;
    let ssq = compensated_sum(values.iter().map(|&v| {
        let d = v - mean;
        d * d
    }));
    (mean, (ssq / n).max(0.0))
}

/// Splitmix64-style seed derivation so nested experiments (cells,
/// repetitions) get independent, reproducible streams.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_beats_naive_on_adversarial_stream() {
        // 1.0 drowned out by huge cancelling pair
        let vals = [1e16, 1.0, -1e16];
        assert_eq!(compensated_sum(vals.iter().copied()), 1.0);
    }

    #[test]
    fn population_variance_matches_hand_computation() {
        let (mean, var) = mean_and_population_variance(&[1.0, 2.0, 3.0]);
        assert_eq!(mean, 2.0);
        assert!((var - 2.0 / 3.0).abs() < 1e-15);
    }
}
