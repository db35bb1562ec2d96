//! Seeded random matrices for tests, experiments and model construction.

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::symlin::SymmetricMatrix;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for cell `index` of a scenario seeded with `seed`.
pub fn cell_rng(seed: u64, index: u64) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

pub fn gaussian_vector(dim: usize, rng: &mut Rng) -> Array1<f64> {
    Array1::from_shape_simple_fn(dim, || StandardNormal.sample(rng))
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || StandardNormal.sample(rng))
}

/// Symmetric matrix with standard normal entries (upper triangle mirrored).
pub fn random_symmetric(dim: usize, seed: u64) -> SymmetricMatrix {
    let mut r = rng(seed);
    let g = gaussian_matrix(dim, dim, &mut r);
    SymmetricMatrix::from_fn(dim, |i, j| if i <= j { g[[i, j]] } else { g[[j, i]] })
        .expect("gaussian entries are finite")
}

/// Orthonormal factor of a Gaussian matrix by modified Gram–Schmidt, so
/// the triangular factor has a positive diagonal.
pub fn random_orthogonal(dim: usize, rng: &mut Rng) -> Array2<f64> {
    let g = gaussian_matrix(dim, dim, rng);
    orthonormalize_columns(g).expect("gaussian matrices have full rank almost surely")
}

/// Modified Gram–Schmidt with one re-orthogonalization pass per column.
pub fn orthonormalize_columns(mut a: Array2<f64>) -> Result<Array2<f64>> {
    let cols = a.ncols();
    for j in 0..cols {
        let original = a.column(j).dot(&a.column(j)).sqrt();
        for _pass in 0..2 {
            for i in 0..j {
                let proj = a.column(i).dot(&a.column(j));
                let qi = a.column(i).to_owned();
                a.column_mut(j).scaled_add(-proj, &qi);
            }
        }
        let norm = a.column(j).dot(&a.column(j)).sqrt();
        if !(norm > 1e-12 * original.max(f64::MIN_POSITIVE)) {
            return Err(Error::RankDeficient { column: j });
        }
        a.column_mut(j).mapv_inplace(|v| v / norm);
    }
    Ok(a)
}

/// `Q diag(eigenvalues) Qᵀ` for a seeded Haar-like orthogonal `Q`.
pub fn matrix_with_spectrum(eigenvalues: &[f64], rng: &mut Rng) -> SymmetricMatrix {
    let q = random_orthogonal(eigenvalues.len(), rng);
    conjugate_diagonal(&q, eigenvalues)
}

pub fn conjugate_diagonal(q: &Array2<f64>, diag: &[f64]) -> SymmetricMatrix {
    let mut scaled = q.clone();
    for (mut col, &d) in scaled.columns_mut().into_iter().zip(diag) {
        col *= d;
    }
    SymmetricMatrix::new(scaled.dot(&q.t())).expect("finite spectrum gives finite matrix")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_is_orthonormal() {
        let q = random_orthogonal(16, &mut rng(4));
        let gram = q.t().dot(&q);
        for ((i, j), v) in gram.indexed_iter() {
            let t = if i == j { 1.0 } else { 0.0 };
            assert!((v - t).abs() < 1e-12);
        }
    }

    #[test]
    fn cell_streams_differ() {
        let a = gaussian_vector(3, &mut cell_rng(1, 0));
        let b = gaussian_vector(3, &mut cell_rng(1, 1));
        assert_ne!(a, b);
        assert_eq!(a, gaussian_vector(3, &mut cell_rng(1, 0)));
    }

    #[test]
    fn rank_deficiency_detected() {
        let a = Array2::from_shape_vec((3, 2), vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0]).unwrap();
        assert!(matches!(orthonormalize_columns(a), Err(Error::RankDeficient { column: 1 })));
    }
}
