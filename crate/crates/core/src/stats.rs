//! Single-pass distribution moments and the split-point geometry built on them.
//!
//! All moments use the population (1/N) convention. The accumulation shifts
//! every value by the first element before summing powers, which keeps the
//! power sums small relative to the data scale and avoids the catastrophic
//! cancellation a raw sum-of-cubes suffers when the mean is far from zero.

use serde::{Deserialize, Serialize};

/// Default skewness-to-multiplier scaling constant.
pub const DEFAULT_ALPHA: f64 = 0.25;
/// Default clipping bound on the skewness magnitude.
pub const DEFAULT_GAMMA_MAX: f64 = 2.0;

/// A standard deviation at or below this fraction of the value range counts
/// as zero spread.
const DEGENERATE_REL_TOL: f64 = 1e-12;

/// Population moments of one attribute over one set of rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttributeMoments {
    pub n: usize,
    pub mean: f64,
    /// Population standard deviation (divisor N, not N-1).
    pub stddev: f64,
    /// Third standardized moment; forced to zero when degenerate.
    pub skewness: f64,
}

/// Whether the moments describe a distribution with usable spread.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentsStatus {
    Ok,
    /// Fewer than two values, or spread indistinguishable from zero.
    Degenerate,
}

/// Computes mean, population standard deviation, and skewness in one pass.
///
/// Degenerate inputs (n < 2, or stddev within `1e-12` of zero relative to the
/// value range) report `skewness = 0.0` and must not have their skewness
/// consumed by callers.
pub fn compute_moments(values: &[f64]) -> (AttributeMoments, MomentsStatus) {
    let n = values.len();
    if n == 0 {
        let m = AttributeMoments { n: 0, mean: 0.0, stddev: 0.0, skewness: 0.0 };
        return (m, MomentsStatus::Degenerate);
    }
    let shift = values[0];
    let (mut s1, mut s2, mut s3) = (0.0f64, 0.0f64, 0.0f64);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in values {
        let d = x - shift;
        let d2 = d * d;
        s1 += d;
        s2 += d2;
        s3 += d2 * d;
        lo = lo.min(x);
        hi = hi.max(x);
    }
    let nf = n as f64;
    let m1 = s1 / nf;
    // Rounding can push the shifted variance a hair below zero; clamp it.
    let var = (s2 / nf - m1 * m1).max(0.0);
    let stddev = var.sqrt();
    let mean = shift + m1;
    if n < 2 || stddev <= DEGENERATE_REL_TOL * (hi - lo) {
        let m = AttributeMoments { n, mean, stddev, skewness: 0.0 };
        return (m, MomentsStatus::Degenerate);
    }
    // E[(x-mean)^3] expanded around the shifted first moments.
    let m3 = s3 / nf - 3.0 * m1 * (s2 / nf) + 2.0 * m1 * m1 * m1;
    let skewness = m3 / (var * stddev);
    (AttributeMoments { n, mean, stddev, skewness }, MomentsStatus::Ok)
}

/// Asymmetric widening factors for the outer split points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveMultipliers {
    pub k_lower: f64,
    pub k_upper: f64,
}

/// Maps skewness to the pair of outer-bound multipliers.
///
/// The shift `d = alpha * min(|skewness|, gamma_max)` narrows the bound on
/// the crowded side of a skewed distribution and widens it on the tail side;
/// zero skewness leaves both multipliers at exactly 1. The multipliers always
/// sum to 2.
pub fn adaptive_multipliers(skewness: f64, alpha: f64, gamma_max: f64) -> AdaptiveMultipliers {
    debug_assert!(alpha >= 0.0, "alpha must be non-negative");
    debug_assert!(gamma_max >= 0.0, "gamma_max must be non-negative");
    let d = alpha * skewness.abs().min(gamma_max);
    let (k_lower, k_upper) = if skewness > 0.0 {
        (1.0 - d, 1.0 + d)
    } else if skewness < 0.0 {
        (1.0 + d, 1.0 - d)
    } else {
        (1.0, 1.0)
    };
    AdaptiveMultipliers { k_lower, k_upper }
}

/// The three cut points of a four-bin discretization of one attribute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPoints {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl SplitPoints {
    /// True when the cut points can actually separate values into four bins.
    pub fn is_ordered(&self) -> bool {
        self.s1 < self.s2 && self.s2 < self.s3
    }
}

/// Symmetric cut points at one standard deviation around the mean.
pub fn split_points_msd(m: &AttributeMoments) -> SplitPoints {
    SplitPoints { s1: m.mean - m.stddev, s2: m.mean, s3: m.mean + m.stddev }
}

/// Skew-adjusted cut points; the center stays at the mean.
pub fn split_points_amsd(m: &AttributeMoments, k: &AdaptiveMultipliers) -> SplitPoints {
    SplitPoints {
        s1: m.mean - k.k_lower * m.stddev,
        s2: m.mean,
        s3: m.mean + k.k_upper * m.stddev,
    }
}

/// Bin index for a value under half-open intervals; each cut point belongs
/// to the bin above it.
pub fn assign_bin(x: f64, s: &SplitPoints) -> usize {
    if x < s.s1 {
        0
    } else if x < s.s2 {
        1
    } else if x < s.s3 {
        2
    } else {
        3
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    /// Two-pass reference: explicit mean, then explicit central sums.
    fn reference_moments(values: &[f64]) -> (f64, f64, f64) {
        let nf = values.len() as f64;
        let mean = values.iter().sum::<f64>() / nf;
        let mut c2 = 0.0;
        let mut c3 = 0.0;
        for &x in values {
            let d = x - mean;
            c2 += d * d;
            c3 += d * d * d;
        }
        let var = c2 / nf;
        let stddev = var.sqrt();
        let skew = if stddev > 0.0 { (c3 / nf) / (var * stddev) } else { 0.0 };
        (mean, stddev, skew)
    }

    #[test]
    fn spike_distribution_moments_are_exact() {
        // Sums of powers are small integers, so every step is exact in
        // binary floating point: mean 2, variance 16, skewness 96/64.
        let values = [0.0, 0.0, 0.0, 0.0, 10.0];
        let (m, status) = compute_moments(&values);
        assert_eq!(status, MomentsStatus::Ok);
        assert_eq!(m.n, 5);
        assert_eq!(m.mean, 2.0);
        assert_eq!(m.stddev, 4.0);
        assert_eq!(m.skewness, 1.5);
    }

    #[test]
    fn consecutive_integers_have_zero_skew() {
        // {x, x+1, x+2, x+3}: the central cubes cancel exactly.
        let values = [5.0, 6.0, 7.0, 8.0];
        let (m, status) = compute_moments(&values);
        assert_eq!(status, MomentsStatus::Ok);
        assert_eq!(m.mean, 6.5);
        assert_relative_eq!(m.stddev, (1.25f64).sqrt(), max_relative = 1e-15);
        assert_eq!(m.skewness, 0.0);
    }

    #[test]
    fn two_values_are_not_degenerate() {
        let (m, status) = compute_moments(&[1.0, 3.0]);
        assert_eq!(status, MomentsStatus::Ok);
        assert_eq!(m.mean, 2.0);
        assert_eq!(m.stddev, 1.0);
        assert_eq!(m.skewness, 0.0);
    }

    #[test]
    fn large_offset_does_not_cancel() {
        // Raw power sums at this offset would lose every significant digit.
        let offset = 1.0e12;
        let values: Vec<f64> = (0..100).map(|i| offset + (i % 10) as f64).collect();
        let (m, status) = compute_moments(&values);
        assert_eq!(status, MomentsStatus::Ok);
        assert_relative_eq!(m.mean, offset + 4.5, max_relative = 1e-15);
        assert_relative_eq!(m.stddev, (8.25f64).sqrt(), max_relative = 1e-12);
        assert_abs_diff_eq!(m.skewness, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_cases() {
        let (m, s) = compute_moments(&[]);
        assert_eq!(s, MomentsStatus::Degenerate);
        assert_eq!(m.n, 0);

        let (m, s) = compute_moments(&[7.25]);
        assert_eq!(s, MomentsStatus::Degenerate);
        assert_eq!(m.mean, 7.25);
        assert_eq!(m.skewness, 0.0);

        let (m, s) = compute_moments(&[3.5; 1000]);
        assert_eq!(s, MomentsStatus::Degenerate);
        assert_eq!(m.mean, 3.5);
        assert_eq!(m.stddev, 0.0);
        assert_eq!(m.skewness, 0.0);

        // Constant column far from zero: still exactly zero spread because
        // the shifted accumulation subtracts the first element first.
        let (_, s) = compute_moments(&[1.0e15; 50]);
        assert_eq!(s, MomentsStatus::Degenerate);
    }

    #[test]
    fn multipliers_follow_skew_sign() {
        let k = adaptive_multipliers(1.5, DEFAULT_ALPHA, DEFAULT_GAMMA_MAX);
        assert_eq!(k.k_lower, 0.625);
        assert_eq!(k.k_upper, 1.375);

        let k = adaptive_multipliers(-1.5, DEFAULT_ALPHA, DEFAULT_GAMMA_MAX);
        assert_eq!(k.k_lower, 1.375);
        assert_eq!(k.k_upper, 0.625);

        let k = adaptive_multipliers(0.0, DEFAULT_ALPHA, DEFAULT_GAMMA_MAX);
        assert_eq!(k.k_lower, 1.0);
        assert_eq!(k.k_upper, 1.0);
    }

    #[test]
    fn multipliers_clip_at_gamma_max() {
        // |skew| 5.0 clips to 2.0, so the shift is 0.25 * 2.0 = 0.5.
        let k = adaptive_multipliers(5.0, DEFAULT_ALPHA, DEFAULT_GAMMA_MAX);
        assert_eq!(k.k_lower, 0.5);
        assert_eq!(k.k_upper, 1.5);

        let k = adaptive_multipliers(-77.0, DEFAULT_ALPHA, DEFAULT_GAMMA_MAX);
        assert_eq!(k.k_lower, 1.5);
        assert_eq!(k.k_upper, 0.5);
    }

    #[test]
    fn gamma_max_zero_pins_multipliers_at_one() {
        for skew in [-3.0, -0.4, 0.0, 0.4, 3.0] {
            let k = adaptive_multipliers(skew, DEFAULT_ALPHA, 0.0);
            assert_eq!(k.k_lower, 1.0);
            assert_eq!(k.k_upper, 1.0);
        }
    }

    #[test]
    fn split_points_for_spike_distribution() {
        let values = [0.0, 0.0, 0.0, 0.0, 10.0];
        let (m, _) = compute_moments(&values);
        let sym = split_points_msd(&m);
        assert_eq!(sym, SplitPoints { s1: -2.0, s2: 2.0, s3: 6.0 });

        // Skew 1.5 gives multipliers (0.625, 1.375).
        let k = adaptive_multipliers(m.skewness, DEFAULT_ALPHA, DEFAULT_GAMMA_MAX);
        let adj = split_points_amsd(&m, &k);
        assert_eq!(adj, SplitPoints { s1: -0.5, s2: 2.0, s3: 7.5 });
        assert_eq!(assign_bin(0.0, &adj), 1);
        assert_eq!(assign_bin(10.0, &adj), 3);
    }

    #[test]
    fn bin_boundaries_belong_to_the_upper_bin() {
        let s = SplitPoints { s1: -1.0, s2: 0.0, s3: 1.0 };
        assert_eq!(assign_bin(-1.5, &s), 0);
        assert_eq!(assign_bin(-1.0, &s), 1);
        assert_eq!(assign_bin(-0.5, &s), 1);
        assert_eq!(assign_bin(0.0, &s), 2);
        assert_eq!(assign_bin(0.5, &s), 2);
        assert_eq!(assign_bin(1.0, &s), 3);
        assert_eq!(assign_bin(42.0, &s), 3);
    }

    #[test]
    fn unit_multipliers_reproduce_symmetric_points_bit_for_bit() {
        let values: Vec<f64> = (0..40).map(|i| (i as f64) * 1.37 - 11.0).collect();
        let (m, _) = compute_moments(&values);
        let k = AdaptiveMultipliers { k_lower: 1.0, k_upper: 1.0 };
        let sym = split_points_msd(&m);
        let adj = split_points_amsd(&m, &k);
        assert_eq!(sym.s1.to_bits(), adj.s1.to_bits());
        assert_eq!(sym.s2.to_bits(), adj.s2.to_bits());
        assert_eq!(sym.s3.to_bits(), adj.s3.to_bits());
    }

    proptest! {
        #[test]
        fn matches_two_pass_reference(
            values in proptest::collection::vec(-1.0e6f64..1.0e6, 2..300),
            scale in -3.0f64..6.0,
        ) {
            let scale = 10f64.powf(scale);
            let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
            let (m, status) = compute_moments(&scaled);
            let (mean, stddev, skew) = reference_moments(&scaled);
            prop_assert!((m.mean - mean).abs() <= 1e-9 * mean.abs().max(1e-3 * stddev.max(1e-300)));
            prop_assert!((m.stddev - stddev).abs() <= 1e-9 * stddev.max(1e-300));
            if status == MomentsStatus::Ok {
                prop_assert!((m.skewness - skew).abs() <= 1e-6 * skew.abs().max(1.0));
            }
        }

        #[test]
        fn multipliers_sum_to_two_and_stay_bounded(
            skew in -50.0f64..50.0,
            alpha in 0.0f64..0.49,
            gamma_max in 0.0f64..4.0,
        ) {
            let k = adaptive_multipliers(skew, alpha, gamma_max);
            prop_assert!((k.k_lower + k.k_upper - 2.0).abs() <= 1e-12);
            let d = alpha * gamma_max;
            prop_assert!(k.k_lower >= 1.0 - d - 1e-12 && k.k_lower <= 1.0 + d + 1e-12);
            prop_assert!(k.k_upper >= 1.0 - d - 1e-12 && k.k_upper <= 1.0 + d + 1e-12);
        }

        #[test]
        fn default_multipliers_stay_in_half_to_three_halves(skew in -100.0f64..100.0) {
            let k = adaptive_multipliers(skew, DEFAULT_ALPHA, DEFAULT_GAMMA_MAX);
            prop_assert!(k.k_lower >= 0.5 && k.k_lower <= 1.5);
            prop_assert!(k.k_upper >= 0.5 && k.k_upper <= 1.5);
        }

        #[test]
        fn skewness_sign_tracks_tail_direction(tail in 5.0f64..500.0, n in 5usize..60) {
            // One far value above a cluster of zeros: right tail, positive skew.
            let mut values = vec![0.0; n];
            values.push(tail);
            let (m, status) = compute_moments(&values);
            prop_assert_eq!(status, MomentsStatus::Ok);
            prop_assert!(m.skewness > 0.0);
            let mirrored: Vec<f64> = values.iter().map(|v| -v).collect();
            let (mm, _) = compute_moments(&mirrored);
            prop_assert!(mm.skewness < 0.0);
            prop_assert!((m.skewness + mm.skewness).abs() <= 1e-9 * m.skewness.abs());
        }

        #[test]
        fn assign_bin_is_monotone(xs in proptest::collection::vec(-1.0e4f64..1.0e4, 2..50)) {
            let s = SplitPoints { s1: -100.0, s2: 0.0, s3: 100.0 };
            let mut sorted = xs.clone();
            sorted.sort_by(f64::total_cmp);
            let bins: Vec<usize> = sorted.iter().map(|&x| assign_bin(x, &s)).collect();
            prop_assert!(bins.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
