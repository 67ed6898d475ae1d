mod common;

use common::checks::*;
use common::random_matrix;
use lapssl::graph::{degree_stats, laplacian, LaplacianKind};
use lapssl::prox::{l21_shrink, soft_threshold_matrix, svt};
use lapssl::spectral::{lambda_max_estimate, lambda_max_measured};
use lapssl::weights::{local_gram, lle_row_weights, DEFAULT_GRAM_REGULARIZATION};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn propagation_iterate_matches_closed_form(seed in any::<u64>()) {
        let err = lp_iterate_vs_closed_form(seed);
        prop_assert!(err <= 1e-8, "{err}");
    }

    #[test]
    fn harmonic_matches_gaussian_conditional_mean(seed in any::<u64>()) {
        let err = harmonic_vs_crf(seed);
        prop_assert!(err <= 1e-10, "{err}");
    }

    #[test]
    fn lle_matches_kkt_solve(seed in any::<u64>()) {
        let err = lle_vs_kkt(seed);
        prop_assert!(err <= 1e-6, "{err}");
    }

    #[test]
    fn nonnegative_weights_match_interior_closed_form(seed in any::<u64>()) {
        let err = nmf_vs_closed_form(seed);
        prop_assert!(err <= 1e-3, "{err}");
    }

    #[test]
    fn ar_series_matches_direct_solve(seed in any::<u64>()) {
        let err = ar_iterative_vs_direct(seed);
        prop_assert!(err <= 1e-6, "{err}");
    }

    #[test]
    fn heat_kernel_is_a_semigroup(seed in any::<u64>()) {
        let err = heat_semigroup(seed);
        prop_assert!(err <= 1e-8, "{err}");
    }

    #[test]
    fn normalized_spectrum_in_zero_two(seed in any::<u64>()) {
        let err = normalized_spectrum_violation(seed);
        prop_assert!(err <= 1e-10, "{err}");
    }

    #[test]
    fn prox_outputs_are_minimizers(seed in 0u64..1_000_000) {
        let err = prox_optimality_violation(seed);
        prop_assert!(err <= 1e-10, "{err}");
    }

    #[test]
    fn prox_maps_are_nonexpansive(seed in 0u64..1_000_000, lam in 0.0f64..2.0) {
        let a = random_matrix(5, 4, seed) * 3.0;
        let b = random_matrix(5, 4, seed + 1) * 3.0;
        let d = (&a - &b).norm();
        prop_assert!((soft_threshold_matrix(&a, lam) - soft_threshold_matrix(&b, lam)).norm() <= d + 1e-10);
        prop_assert!((l21_shrink(&a, lam) - l21_shrink(&b, lam)).norm() <= d + 1e-10);
        prop_assert!((svt(&a, lam).unwrap() - svt(&b, lam).unwrap()).norm() <= d + 1e-10);
    }

    #[test]
    fn svt_commutes_with_rotations(seed in 0u64..1_000_000, lam in 0.0f64..2.0) {
        let a = random_matrix(5, 4, seed) * 2.0;
        let u = random_matrix(5, 5, seed + 1).qr().q();
        let v = random_matrix(4, 4, seed + 2).qr().q();
        let lhs = svt(&(&u * &a * v.transpose()), lam).unwrap();
        let rhs = &u * svt(&a, lam).unwrap() * v.transpose();
        prop_assert!((lhs - rhs).amax() <= 1e-10);
    }

    #[test]
    fn l21_commutes_with_left_rotations(seed in 0u64..1_000_000, lam in 0.0f64..2.0) {
        let a = random_matrix(5, 4, seed) * 2.0;
        let u = random_matrix(5, 5, seed + 1).qr().q();
        let lhs = l21_shrink(&(&u * &a), lam);
        let rhs = &u * l21_shrink(&a, lam);
        prop_assert!((lhs - rhs).amax() <= 1e-12);
    }

    #[test]
    fn lle_reconstructs_no_worse_than_uniform(seed in 0u64..1_000_000, k in 2usize..7) {
        let x = random_matrix(k + 1, 8, seed);
        let list: Vec<usize> = (1..=k).collect();
        let g = local_gram(&x, 0, &list);
        let w = lle_row_weights(&g, DEFAULT_GRAM_REGULARIZATION).unwrap();
        prop_assert!((w.sum() - 1.0).abs() <= 1e-12);
        let uniform = lapssl::linalg::DenseVector::from_element(k, 1.0 / k as f64);
        prop_assert!(w.dot(&(&g * &w)) <= uniform.dot(&(&g * &uniform)) + 1e-12);
    }

    #[test]
    fn measured_top_eigenvalue_is_within_bounds(seed in 0u64..1_000_000, n in 4usize..30) {
        let g = random_connected_graph(n, seed);
        let (pair, report) = lambda_max_measured(&g, 1.0, 1e-10, 100_000).unwrap();
        prop_assert!(report.converged);
        let l = laplacian(&g, LaplacianKind::sym_normalized(1.0)).unwrap().to_dense();
        let top = lapssl::linalg::symmetric_eigen(&l).unwrap().0.into_iter().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((pair.value - top).abs() <= 1e-8, "{} vs {top}", pair.value);
        prop_assert!(pair.value < 2.0);
        prop_assert!(lambda_max_estimate(&degree_stats(&g), 1.0) > 0.0);
    }
}

#[test]
fn even_cycles_reach_two_and_odd_cycles_do_not() {
    for n in 3..16 {
        let l = laplacian(&cycle(n), LaplacianKind::sym_normalized(0.0)).unwrap().to_dense();
        let top = lapssl::linalg::symmetric_eigen(&l).unwrap().0.into_iter().fold(f64::NEG_INFINITY, f64::max);
        if n % 2 == 0 {
            assert!((top - 2.0).abs() <= 1e-12, "{n}: {top}");
        } else {
            assert!(top < 2.0 - 1e-3, "{n}: {top}");
        }
    }
}
