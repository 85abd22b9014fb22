use coherence::matcore::{
    check_diag_majorization, eig_hermitian, singular_values, trace_norm, ComplexMatrix, HermitianMatrix,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_complex(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows * cols)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    ComplexMatrix::new(rows, cols, data).unwrap()
}

fn random_hermitian(dim: usize, seed: u64) -> HermitianMatrix {
    let g = random_complex(dim, dim, seed);
    let sum = &g + &g.adjoint();
    HermitianMatrix::new(sum.scale(Complex64::new(0.5 / dim as f64, 0.0))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eig_reconstructs_and_is_unitary(dim in 1usize..=16, seed in any::<u64>()) {
        let h = random_hermitian(dim, seed);
        let eig = eig_hermitian(&h).unwrap();
        prop_assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(eig.reconstruct().max_abs_diff(h.matrix()) <= 1e-10);
        let gram = &eig.vectors.adjoint() * &eig.vectors;
        prop_assert!(gram.max_abs_diff(&ComplexMatrix::identity(dim)) <= 1e-10);
    }

    #[test]
    fn hermitian_trace_norm_two_routes(dim in 1usize..=12, seed in any::<u64>()) {
        let h = random_hermitian(dim, seed);
        let by_eigen = h.trace_norm().unwrap();
        let by_svd = trace_norm(h.matrix()).unwrap();
        prop_assert!((by_eigen - by_svd).abs() <= 1e-10, "{} vs {}", by_eigen, by_svd);
    }

    #[test]
    fn singular_values_match_gram_eigenvalues(rows in 1usize..=6, cols in 1usize..=6, seed in any::<u64>()) {
        let m = random_complex(rows, cols, seed);
        let sigma = singular_values(&m).unwrap();
        prop_assert_eq!(sigma.len(), rows.min(cols));
        prop_assert!(sigma.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(sigma.iter().all(|&s| s >= 0.0));
        // Squared singular values are the leading eigenvalues of M†M (or MM†).
        let gram = if rows >= cols { &m.adjoint() * &m } else { &m * &m.adjoint() };
        let gram_eig = HermitianMatrix::with_tolerance(gram, 1e-9).unwrap().eigenvalues().unwrap();
        for (s, l) in sigma.iter().zip(&gram_eig) {
            prop_assert!((s * s - l).abs() <= 1e-9 * (1.0 + l.abs()));
        }
    }

    #[test]
    fn trace_norm_subadditive(dim in 1usize..=8, seed in any::<u64>()) {
        let a = random_complex(dim, dim, seed);
        let b = random_complex(dim, dim, seed.wrapping_add(1));
        let lhs = trace_norm(&(&a + &b)).unwrap();
        prop_assert!(lhs <= trace_norm(&a).unwrap() + trace_norm(&b).unwrap() + 1e-10);
    }

    #[test]
    fn majorization_holds_for_rectangular(rows in 1usize..=6, cols in 1usize..=6, seed in any::<u64>()) {
        let check = check_diag_majorization(&random_complex(rows, cols, seed)).unwrap();
        prop_assert!(check.holds, "gaps {:?}", check.prefix_gaps);
        prop_assert_eq!(check.prefix_gaps.len(), rows.min(cols));
    }
}

#[test]
fn majorization_on_thousand_random_4x4() {
    for seed in 0..1000 {
        let check = check_diag_majorization(&random_complex(4, 4, seed)).unwrap();
        assert!(check.holds, "seed {seed}: {:?}", check.prefix_gaps);
    }
}

#[test]
fn majorization_detects_violation_when_slack_is_negative() {
    // Sanity check on the comparison itself: a diagonal matrix has zero gaps, so
    // demanding a strictly positive margin must fail.
    let m = ComplexMatrix::from_diagonal(&[0.5, 0.25]);
    let check = coherence::matcore::check_diag_majorization_with(&m, -1e-3).unwrap();
    assert!(!check.holds);
}
