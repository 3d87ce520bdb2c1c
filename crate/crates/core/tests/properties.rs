use approx::assert_abs_diff_eq;
use mpfio::partition::*;
use mpfio::phase::{homogeneity_residual, Phase};
use proptest::prelude::*;

fn layout() -> SubspaceLayout {
    SubspaceLayout::new(vec![2, 2]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pieces_sum_to_one(xi in prop::collection::vec(-60.0f64..60.0, 4)) {
        let layout = layout();
        let total: f64 = enumerate_pieces(2, 8).iter().map(|s| product_window(&layout, s, &xi)).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn cone_windows_sum_to_one(xi in prop::collection::vec(-60.0f64..60.0, 4)) {
        let layout = layout();
        let mut total = 0.0;
        for a in 0..=8 {
            for b in 0..=8 {
                if a.min(b) == 0 {
                    total += cone_window(&layout, &ConeIndex::new(vec![a, b]).unwrap(), &xi, 8);
                }
            }
        }
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn angular_weights_sum_to_one(theta in 0.0f64..std::f64::consts::TAU, j in 0u32..8) {
        let grid = sphere_grid(j, 2, 1.0).unwrap();
        let xi = [theta.cos() * 5.0, theta.sin() * 5.0];
        let s: f64 = angular_weights(&grid, &xi).unwrap().iter().map(|(_, w)| w).sum();
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mollifier_is_even_and_bounded(t in -3.0f64..3.0) {
        prop_assert_eq!(mollifier(t), mollifier(-t));
        prop_assert!((0.0..=1.0).contains(&mollifier(t)));
    }

    #[test]
    fn perturbed_phase_is_homogeneous(
        x in prop::collection::vec(-1.0f64..1.0, 4),
        xi in prop::collection::vec(-20.0f64..20.0, 4),
        lambda in 0.1f64..10.0,
    ) {
        let phase = Phase::perturbed(layout(), 0.1);
        let r = homogeneity_residual(&phase, &[(x, xi)], &[lambda]).unwrap();
        prop_assert!(r < 1e-10, "residual {}", r);
    }
}
