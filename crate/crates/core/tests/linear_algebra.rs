use ndarray::Array2;
use proptest::prelude::*;
use shiftsign::sampling::{matrix_with_spectrum, rng};
use shiftsign::sign_engine::{exact_sign, ns_error, ns_matrix_sign, ns_scalar, min_depth};
use shiftsign::symlin::{eigh, norms, SymmetricMatrix};

fn symmetric(d: usize, values: &[f64]) -> SymmetricMatrix {
    let a = Array2::from_shape_fn((d, d), |(i, j)| values[i * d + j]);
    SymmetricMatrix::new(&a + &a.t()).unwrap()
}

fn arb_symmetric() -> impl Strategy<Value = SymmetricMatrix> {
    (1usize..12).prop_flat_map(|d| {
        prop::collection::vec(-10.0f64..10.0, d * d).prop_map(move |v| symmetric(d, &v))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigh_reconstructs(h in arb_symmetric()) {
        let eig = eigh(&h).unwrap();
        let scale = h.max_norm().max(1.0);
        prop_assert!(eig.reconstruct().max_abs_diff(&h) <= 1e-10 * scale);
        prop_assert!(eig.orthonormality_defect() <= 1e-10);
        prop_assert!(eig.eigenvalues.windows(2).into_iter().all(|w| w[0] <= w[1]));
        // trace is the eigenvalue sum
        prop_assert!((eig.eigenvalues.sum() - h.trace()).abs() <= 1e-9 * scale * h.dim() as f64);
    }

    #[test]
    fn norm_inequalities(h in arb_symmetric()) {
        let n = norms(&h).unwrap();
        let slack = 1e-10 * n.max_norm.max(1.0);
        prop_assert!(n.max_norm <= n.two_norm + slack);
        prop_assert!(n.two_norm <= n.inf_norm + slack);
        prop_assert!((n.inf_norm - n.one_norm).abs() <= slack);
        prop_assert!(n.two_norm <= h.frobenius_norm() + slack);
    }

    #[test]
    fn weyl_eigenvalue_perturbation(h in arb_symmetric(), scale in 1e-6f64..1.0) {
        let d = h.dim();
        let e = shiftsign::sampling::random_symmetric(d, 3).scale(scale);
        let moved = h.add(&e).unwrap();
        let (a, b) = (eigh(&h).unwrap(), eigh(&moved).unwrap());
        let bound = e.two_norm().unwrap();
        for (x, y) in a.eigenvalues.iter().zip(b.eigenvalues.iter()) {
            prop_assert!((x - y).abs() <= bound + 1e-9 * h.max_norm().max(1.0));
        }
    }

    #[test]
    fn scalar_error_monotone_in_margin(g1 in 1e-3f64..1.0, g2 in 1e-3f64..1.0, m in 0usize..10) {
        let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
        prop_assert!(ns_error(lo, m).unwrap() >= ns_error(hi, m).unwrap());
    }

    #[test]
    fn min_depth_is_minimal(gamma in 1e-4f64..1.0, tol in 1e-12f64..0.5) {
        let m = min_depth(gamma, tol).unwrap();
        prop_assert!(ns_error(gamma, m).unwrap() <= tol);
        if m > 0 {
            prop_assert!(ns_error(gamma, m - 1).unwrap() > tol);
        }
    }
}

/// The matrix iteration equals the scalar polynomial applied to the
/// eigenvalues.
#[test]
fn matrix_newton_schulz_matches_scalar_polynomial() {
    let spectrum = [-0.9, -0.31, -0.05, 0.02, 0.4, 0.77, 1.0];
    let a = matrix_with_spectrum(&spectrum, &mut rng(21));
    let eig = eigh(&a).unwrap();
    for m in 0..8 {
        let matrix = ns_matrix_sign(&a, 1.0, m).unwrap();
        let spectral = eig.apply(|t| ns_scalar(t, m)).unwrap();
        assert!(matrix.max_abs_diff(&spectral) <= 1e-12, "m={m}");
    }
}

#[test]
fn deep_iteration_reaches_exact_sign() {
    let spectrum = [-3.0, -0.2, 0.1, 2.5];
    let a = matrix_with_spectrum(&spectrum, &mut rng(5));
    let alpha = 1.0 / 3.0;
    let m = min_depth(0.1 * alpha, 1e-13).unwrap();
    let approx = ns_matrix_sign(&a, alpha, m).unwrap();
    assert!(approx.max_abs_diff(&exact_sign(&a).unwrap()) <= 1e-12);
}
