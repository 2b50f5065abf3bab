//! Entire functions `phi1(z) = (e^z - 1)/z` and `phi2(z) = (e^z - 1 - z)/z^2`
//! used by the exact modal step and the exponential Riccati sweep.

/// Series threshold below which the removable singularity is evaluated by
/// a truncated Taylor expansion instead of the explicit quotient.
const PHI1_SERIES_THRESHOLD: f64 = 1e-4;
const PHI2_SERIES_THRESHOLD: f64 = 1e-2;

/// `(e^z - 1)/z`, continuously extended by 1 at z = 0.
///
/// Below |z| = 1e-4 a six-term series keeps the relative error at the
/// roundoff level; elsewhere `exp_m1` avoids the cancellation in `e^z - 1`.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < PHI1_SERIES_THRESHOLD {
        // 1 + z/2 + z^2/6 + z^3/24 + z^4/120 + z^5/720
        let mut acc = 1.0 / 720.0;
        for k in [120.0, 24.0, 6.0, 2.0] {
            acc = acc * z + 1.0 / k;
        }
        acc * z + 1.0
    } else {
        z.exp_m1() / z
    }
}

/// `(e^z - 1 - z)/z^2`, continuously extended by 1/2 at z = 0.
pub fn phi2(z: f64) -> f64 {
    if z.abs() < PHI2_SERIES_THRESHOLD {
        // 1/2 + z/6 + z^2/24 + ... + z^6/40320
        let mut acc = 1.0 / 40320.0;
        for k in [5040.0, 720.0, 120.0, 24.0, 6.0, 2.0] {
            acc = acc * z + 1.0 / k;
        }
        acc
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn phi1_at_zero_is_one() {
        assert_eq!(phi1(0.0), 1.0);
        assert!((phi1(1e-12) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn phi2_at_zero_is_half() {
        assert_eq!(phi2(0.0), 0.5);
    }

    #[test]
    fn phi1_known_values() {
        assert!((phi1(1.0) - (1f64.exp() - 1.0)).abs() < 1e-15);
        assert!((phi1(-1.0) - (1.0 - (-1f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn phi2_consistent_with_phi1() {
        // z*phi2(z) = phi1(z) - 1
        for &z in &[-3.0, -0.5, 0.3, 2.0, 1e-3, -1e-3] {
            assert!((z * phi2(z) - (phi1(z) - 1.0)).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn phi1_series_matches_direct_near_threshold(z in -2e-4f64..2e-4) {
            // Continuity across the series/direct branch switch.
            let direct = if z == 0.0 { 1.0 } else { z.exp_m1() / z };
            prop_assert!((phi1(z) - direct).abs() <= 1e-14);
        }

        #[test]
        fn phi1_bounded_on_left_half_line(z in -1e6f64..=0.0) {
            // On (-inf, 0]: 0 < phi1(z) <= 1.
            let v = phi1(z);
            prop_assert!(v > 0.0 && v <= 1.0);
        }
    }
}
