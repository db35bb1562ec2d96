use ndarray::Array1;
use shiftsign::problems::{
    allen_cahn_1d, fd_check, muller_brown, rotated_quartic, synthetic_matrix, EnergyModel,
    SyntheticSpectrumSpec,
};
use shiftsign::reflector::morse_index;
use shiftsign::sampling::{gaussian_vector, rng};
use shiftsign::eigh;

#[test]
fn finite_difference_consistency() {
    let mut r = rng(2);
    let models: Vec<(Box<dyn EnergyModel>, f64)> = vec![
        (Box::new(muller_brown()), 0.5),
        (Box::new(rotated_quartic(2, 9, 4).unwrap()), 1.0),
        (Box::new(allen_cahn_1d(0.4, 41).unwrap()), 1.0),
    ];
    for (model, scale) in &models {
        for _ in 0..5 {
            let x = gaussian_vector(model.dim(), &mut r) * *scale;
            let report = fd_check(model.as_ref(), &x);
            assert!(report.gradient_error <= 1e-6, "{}: {report:?}", model.name());
            assert!(report.hessian_error <= 1e-6, "{}: {report:?}", model.name());
        }
    }
}

#[test]
fn muller_brown_reference_points() {
    let mb = muller_brown();
    // Published minima and saddles of the surface.
    let points = [
        ([-0.558224, 1.441726], 0, -146.699517),
        ([0.623499, 0.028038], 0, -108.166724),
        ([-0.050011, 0.466694], 0, -80.767818),
        ([-0.822002, 0.624313], 1, -40.664843),
        ([0.212487, 0.292988], 1, -72.248940),
    ];
    for (p, index, energy) in points {
        let x = Array1::from(p.to_vec());
        assert!((mb.energy(&x) - energy).abs() < 1e-4);
        let g = mb.gradient(&x);
        assert!(g.dot(&g).sqrt() < 1e-2, "{p:?}");
        assert_eq!(morse_index(&eigh(&mb.hessian(&x)).unwrap()), index);
    }
}

#[test]
fn quartic_energy_is_rotation_invariant() {
    let q = rotated_quartic(3, 10, 8).unwrap();
    let x = gaussian_vector(10, &mut rng(1));
    let y = q.to_y(&x);
    assert!((q.energy(&x) - q.energy_in_y(&y)).abs() <= 1e-12);
    let h = q.hessian(&Array1::zeros(10));
    assert_eq!(morse_index(&eigh(&h).unwrap()), 3);
}

#[test]
fn allen_cahn_zero_state_is_index_one() {
    let ac = allen_cahn_1d(0.4, 41).unwrap();
    let zero = Array1::zeros(41);
    let g = ac.gradient(&zero);
    assert!(g.iter().all(|v| *v == 0.0));
    assert_eq!(morse_index(&eigh(&ac.hessian(&zero)).unwrap()), 1);
    // constant states ±1 are minima
    let one = Array1::from_elem(41, 1.0);
    assert!(ac.gradient(&one).iter().all(|v| v.abs() < 1e-12));
    assert_eq!(morse_index(&eigh(&ac.hessian(&one)).unwrap()), 0);
}

#[test]
fn synthetic_spectra_are_realized() {
    for (dim, k) in [(8, 3), (32, 1), (64, 16)] {
        let spec = SyntheticSpectrumSpec {
            dim,
            k,
            lambda_k: -0.2,
            lambda_k1: 0.3,
            radius: 5.0,
            rotation_seed: Some(dim as u64),
        };
        let s = synthetic_matrix(&spec).unwrap();
        let eig = eigh(&s.matrix).unwrap();
        for (a, b) in eig.eigenvalues.iter().zip(&s.eigenvalues) {
            assert!((a - b).abs() <= 1e-12 * 5.0 * dim as f64);
        }
        assert!((eig.lambda(k) + 0.2).abs() < 1e-10);
        assert!((eig.lambda(k + 1) - 0.3).abs() < 1e-10);
        assert!((eig.spectral_radius() - 5.0).abs() < 1e-10);
    }
}
