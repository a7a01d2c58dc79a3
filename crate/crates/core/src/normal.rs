//! Standard normal tail probabilities.
//!
//! Everything goes through `erfc`, which keeps relative accuracy in the upper
//! tail where `1 - cdf(x)` would cancel catastrophically.

use std::f64::consts::FRAC_1_SQRT_2;

/// Standard normal CDF.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - cdf(x)`, computed without cancellation.
pub fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Two-sided tail `2 * (1 - cdf(|x|))`.
pub fn two_sided_tail(x: f64) -> f64 {
    libm::erfc(x.abs() * FRAC_1_SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    // (x, cdf(x), erfc(|x|/sqrt 2)) at 40-digit precision.
    const REFERENCE: &[(f64, f64, f64)] = &[
        (0.1, 0.539_827_837_277_028_981_5, 0.920_344_325_445_942_037_1),
        (0.5, 0.691_462_461_274_013_103_6, 0.617_075_077_451_973_792_7),
        (1.0, 0.841_344_746_068_542_948_6, 0.317_310_507_862_914_102_8),
        (2.0, 0.977_249_868_051_820_792_8, 0.045_500_263_896_358_414_40),
        (3.0, 0.998_650_101_968_369_905_5, 0.002_699_796_063_260_189_053),
        (4.5, 0.999_996_602_326_875_269_9, 6.795_346_249_460_120_804e-6),
        (6.0, 0.999_999_999_013_412_355_0, 1.973_175_290_075_396_281e-9),
        (8.25, 0.999_999_999_999_999_920_8, 1.583_945_262_928_495_468e-16),
        (10.0, 1.0, 1.523_970_604_832_105_213e-23),
        (-0.7, 0.241_963_652_223_073_014_7, 0.483_927_304_446_146_029_5),
        (-2.5, 0.006_209_665_325_776_135_167, 0.012_419_330_651_552_270_33),
    ];

    #[test]
    fn cdf_matches_reference_to_1e12() {
        for &(x, want, _) in REFERENCE {
            assert!((cdf(x) - want).abs() <= 1e-12, "cdf({x}) = {} want {want}", cdf(x));
            assert!((sf(-x) - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn tail_has_relative_accuracy() {
        for &(x, _, want) in REFERENCE {
            let got = two_sided_tail(x);
            assert!(((got - want) / want).abs() < 1e-13, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn center_and_symmetry() {
        assert_eq!(cdf(0.0), 0.5);
        assert_eq!(two_sided_tail(0.0), 1.0);
        for x in [0.3, 1.7, 4.0] {
            assert!((cdf(x) + cdf(-x) - 1.0).abs() < 1e-15);
        }
    }
}
