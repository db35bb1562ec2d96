//! Dense symmetric linear algebra: storage, products, norms, a cyclic Jacobi
//! eigensolver and spectral functional calculus.
//!
//! Everything downstream (reflectors, sign filters, local analysis) is built
//! from `f(A) = V diag(f(λ)) Vᵀ` on top of [`eigh`].

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

/// Relative off-diagonal Frobenius tolerance at which Jacobi sweeps stop.
pub const EIGH_REL_TOL: f64 = 1e-13;
/// Sweep budget of the cyclic Jacobi eigensolver.
pub const EIGH_MAX_SWEEPS: usize = 60;
/// Orthonormality tolerance on eigenvector matrices, `‖VᵀV − I‖_max`.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Relative reconstruction tolerance, `‖VΛVᵀ − A‖_max ≤ tol·(1 + ‖A‖_max)`.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;
/// Multiply-add flops charged per Jacobi rotation, per unit of dimension
/// (two rows of the working matrix plus two columns of the eigenvector
/// accumulator, six flops per entry each).
pub const JACOBI_FLOPS_PER_ROTATION_PER_DIM: u64 = 12;

/// Dense real symmetric matrix. Entries are exactly symmetric and finite.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    data: Array2<f64>,
}

impl SymmetricMatrix {
    /// Builds a symmetric matrix from a square array, symmetrizing by
    /// averaging `a_ij` and `a_ji`.
    pub fn new(a: Array2<f64>) -> Result<Self> {
        let (rows, cols) = a.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::Degenerate("empty matrix".into()));
        }
        for ((row, col), v) in a.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
        }
        let mut data = a;
        symmetrize_in_place(&mut data);
        Ok(Self { data })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        Self::new(Array2::from_shape_fn((dim, dim), |(i, j)| f(i, j)))
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: Array2::zeros((dim, dim)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            data: Array2::eye(dim),
        }
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        let mut data = Array2::zeros((diag.len(), diag.len()));
        for (i, &d) in diag.iter().enumerate() {
            data[[i, i]] = d;
        }
        Self::new(data)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_array(self) -> Array2<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[[i, j]]
    }

    pub fn diag(&self) -> Array1<f64> {
        self.data.diag().to_owned()
    }

    pub fn trace(&self) -> f64 {
        self.data.diag().sum()
    }

    /// `A + c·I`.
    pub fn add_identity(&self, c: f64) -> Self {
        let mut data = self.data.clone();
        data.diag_mut().mapv_inplace(|v| v + c);
        Self { data }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            data: &self.data * c,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            data: &self.data + &other.data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            data: &self.data - &other.data,
        })
    }

    pub fn matvec(&self, x: &Array1<f64>) -> Result<Array1<f64>> {
        check_dims(self.dim(), x.len())?;
        Ok(self.data.dot(x))
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Maximum absolute row sum (equal to the one-norm by symmetry).
    pub fn inf_norm(&self) -> f64 {
        self.data
            .axis_iter(Axis(0))
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Spectral norm via [`eigh`].
    pub fn two_norm(&self) -> Result<f64> {
        Ok(eigh(self)?.spectral_radius())
    }
}

fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn symmetrize_in_place(a: &mut Array2<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[[i, j]] + a[[j, i]]);
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
}

/// Eigenvalues in ascending order with an orthonormal eigenvector matrix
/// whose columns match the eigenvalue order.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Array1<f64>,
    pub vectors: Array2<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Eigenvalue with 1-based index `i` (so `lambda(1)` is the smallest).
    pub fn lambda(&self, i: usize) -> f64 {
        self.eigenvalues[i - 1]
    }

    pub fn vector(&self, i: usize) -> ArrayView1<'_, f64> {
        self.vectors.column(i)
    }

    /// `V diag(f(λ_i)) Vᵀ`, rejecting non-finite values of `f`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Result<SymmetricMatrix> {
        let mut values = Array1::zeros(self.dim());
        for (slot, &lambda) in values.iter_mut().zip(self.eigenvalues.iter()) {
            let v = f(lambda);
            if !v.is_finite() {
                return Err(Error::NonFiniteSpectralValue {
                    eigenvalue: lambda,
                    value: v,
                });
            }
            *slot = v;
        }
        Ok(self.apply_values(&values))
    }

    /// `V diag(values) Vᵀ` for precomputed per-eigenvalue values.
    pub fn apply_values(&self, values: &Array1<f64>) -> SymmetricMatrix {
        let mut scaled = self.vectors.clone();
        for (mut col, &v) in scaled.axis_iter_mut(Axis(1)).zip(values.iter()) {
            col *= v;
        }
        let mut data = scaled.dot(&self.vectors.t());
        symmetrize_in_place(&mut data);
        SymmetricMatrix { data }
    }

    pub fn reconstruct(&self) -> SymmetricMatrix {
        self.apply_values(&self.eigenvalues)
    }

    /// `‖VᵀV − I‖_max`.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.vectors.t().dot(&self.vectors);
        gram.indexed_iter().fold(0.0, |m, ((i, j), v)| {
            let target = if i == j { 1.0 } else { 0.0 };
            m.max((v - target).abs())
        })
    }
}

/// Work counters from one Jacobi solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct JacobiStats {
    pub sweeps: usize,
    pub rotations: u64,
}

impl JacobiStats {
    /// Counted flops: per-rotation updates plus one off-diagonal norm
    /// evaluation (`d²` flops) per convergence check.
    pub fn flops(&self, dim: usize) -> u64 {
        let d = dim as u64;
        self.rotations * JACOBI_FLOPS_PER_ROTATION_PER_DIM * d + (self.sweeps as u64 + 1) * d * d
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn eigh(a: &SymmetricMatrix) -> Result<EigenDecomposition> {
    eigh_with_stats(a).map(|(eig, _)| eig)
}

pub fn eigh_with_stats(a: &SymmetricMatrix) -> Result<(EigenDecomposition, JacobiStats)> {
    let n = a.dim();
    // Row-major working copy with an odd row stride, which keeps the
    // column updates of power-of-two sizes from aliasing in cache. `vt`
    // holds eigenvectors as rows.
    let ld = n | 1;
    let mut m = vec![0.0; n * ld];
    for ((i, j), v) in a.data.indexed_iter() {
        m[i * ld + j] = *v;
    }
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        vt[i * n + i] = 1.0;
    }
    let target = EIGH_REL_TOL * a.frobenius_norm();
    let mut stats = JacobiStats::default();

    loop {
        let off = off_diagonal_norm(&m, n, ld);
        if off <= target {
            break;
        }
        if stats.sweeps == EIGH_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps: stats.sweeps,
                off_norm: off,
            });
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m[p * ld + q];
                if apq == 0.0 {
                    continue;
                }
                rotate(&mut m, &mut vt, n, ld, p, q);
                stats.rotations += 1;
            }
        }
        stats.sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * ld + i].total_cmp(&m[j * ld + j]));
    let eigenvalues = Array1::from_iter(order.iter().map(|&i| m[i * ld + i]));
    let mut vectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[[row, col]] = vt[src * n + row];
        }
    }
    Ok((
        EigenDecomposition {
            eigenvalues,
            vectors,
        },
        stats,
    ))
}

fn off_diagonal_norm(m: &[f64], n: usize, ld: usize) -> f64 {
    let mut sum = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            let v = m[p * ld + q];
            sum += v * v;
        }
    }
    (2.0 * sum).sqrt()
}

/// Applies the rotation that annihilates `m[p][q]` to both sides of `m`
/// and accumulates it into the eigenvector rows `vt`.
fn rotate(m: &mut [f64], vt: &mut [f64], n: usize, ld: usize, p: usize, q: usize) {
    let apq = m[p * ld + q];
    let app = m[p * ld + p];
    let aqq = m[q * ld + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + theta.hypot(1.0))
    };
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = m[p * ld + k];
        let akq = m[q * ld + k];
        let new_p = c * akp - s * akq;
        let new_q = s * akp + c * akq;
        m[p * ld + k] = new_p;
        m[k * ld + p] = new_p;
        m[q * ld + k] = new_q;
        m[k * ld + q] = new_q;
    }
    m[p * ld + p] = app - t * apq;
    m[q * ld + q] = aqq + t * apq;
    m[p * ld + q] = 0.0;
    m[q * ld + p] = 0.0;

    let (head, tail) = vt.split_at_mut(q * n);
    let row_p = &mut head[p * n..(p + 1) * n];
    let row_q = &mut tail[..n];
    for (vp, vq) in row_p.iter_mut().zip(row_q.iter_mut()) {
        let a = *vp;
        let b = *vq;
        *vp = c * a - s * b;
        *vq = s * a + c * b;
    }
}

/// `V diag(f(λ_i)) Vᵀ` for the eigendecomposition of `a`.
pub fn apply_spectral_function(
    a: &SymmetricMatrix,
    f: impl Fn(f64) -> f64,
) -> Result<SymmetricMatrix> {
    eigh(a)?.apply(f)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    pub two_norm: f64,
    pub inf_norm: f64,
    pub one_norm: f64,
    pub max_norm: f64,
}

pub fn norms(a: &SymmetricMatrix) -> Result<Norms> {
    let inf_norm = a.inf_norm();
    let one_norm = a
        .data
        .axis_iter(Axis(1))
        .map(|col| col.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    Ok(Norms {
        two_norm: a.two_norm()?,
        inf_norm,
        one_norm,
        max_norm: a.max_norm(),
    })
}

/// Dense product with shape checking.
pub fn matmul(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    if a.ncols() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            got: b.nrows(),
        });
    }
    Ok(a.dot(b))
}

/// Symmetric part `(X + Xᵀ)/2` of a square product.
pub fn sym_from_product(x: Array2<f64>) -> Result<SymmetricMatrix> {
    SymmetricMatrix::new(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_symmetric;
    use ndarray::array;

    #[test]
    fn diagonal_input_sorted() {
        let a = SymmetricMatrix::from_diag(&[3.0, 1.0, 2.0]).unwrap();
        let eig = eigh(&a).unwrap();
        assert_eq!(eig.eigenvalues.to_vec(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn identity_has_unit_spectrum() {
        for d in [1, 2, 7] {
            let eig = eigh(&SymmetricMatrix::identity(d)).unwrap();
            assert!(eig.eigenvalues.iter().all(|&v| v == 1.0));
            assert_eq!(eig.reconstruct().max_abs_diff(&SymmetricMatrix::identity(d)), 0.0);
        }
    }

    #[test]
    fn random_reconstruction() {
        let a = random_symmetric(8, 11);
        let eig = eigh(&a).unwrap();
        assert!(eig.reconstruct().max_abs_diff(&a) <= 1e-10);
        assert!(eig.orthonormality_defect() <= ORTHONORMAL_TOL);
        assert!(eig.eigenvalues.windows(2).into_iter().all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigh_is_deterministic() {
        let a = random_symmetric(12, 3);
        let e1 = eigh(&a).unwrap();
        let e2 = eigh(&a).unwrap();
        assert_eq!(e1.eigenvalues, e2.eigenvalues);
        assert_eq!(e1.vectors, e2.vectors);
    }

    #[test]
    fn zero_matrix_converges_immediately() {
        let (eig, stats) = eigh_with_stats(&SymmetricMatrix::zeros(4)).unwrap();
        assert_eq!(stats.rotations, 0);
        assert!(eig.eigenvalues.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn spectral_functions() {
        let a = random_symmetric(6, 5);
        let id = apply_spectral_function(&a, |t| t).unwrap();
        assert!(id.max_abs_diff(&a) <= 1e-10);

        let sq = apply_spectral_function(&a, |t| t * t).unwrap();
        let direct = a.as_array().dot(a.as_array());
        assert!(sq.as_array().iter().zip(direct.iter()).all(|(x, y)| (x - y).abs() <= 1e-9));

        let d = SymmetricMatrix::from_diag(&[-2.0, 3.0]).unwrap();
        let s = apply_spectral_function(&d, f64::signum).unwrap();
        assert_eq!(s, SymmetricMatrix::from_diag(&[-1.0, 1.0]).unwrap());
    }

    #[test]
    fn non_finite_spectral_value_names_eigenvalue() {
        let d = SymmetricMatrix::from_diag(&[0.0, 2.0]).unwrap();
        match apply_spectral_function(&d, |t| 1.0 / t) {
            Err(Error::NonFiniteSpectralValue { eigenvalue, .. }) => assert_eq!(eigenvalue, 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn norm_examples() {
        let n = norms(&SymmetricMatrix::from_diag(&[-3.0, 2.0]).unwrap()).unwrap();
        assert!((n.two_norm - 3.0).abs() <= 1e-12);
        assert_eq!(n.inf_norm, 3.0);
        let swap = SymmetricMatrix::new(array![[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let n = norms(&swap).unwrap();
        assert!((n.two_norm - 1.0).abs() <= 1e-12);
        assert_eq!(n.inf_norm, 1.0);

        let a = random_symmetric(10, 8);
        let n = norms(&a).unwrap();
        assert!(n.two_norm <= n.inf_norm + 1e-12);
        assert_eq!(n.inf_norm, n.one_norm);
    }

    #[test]
    fn products() {
        let a = random_symmetric(5, 1).into_array();
        let b = random_symmetric(5, 2).into_array() + Array2::from_shape_fn((5, 5), |(i, j)| (i * 5 + j) as f64 * 0.01);
        let eye = Array2::eye(5);
        assert_eq!(matmul(&eye, &a).unwrap(), a);
        let ab_t = matmul(&a, &b).unwrap().reversed_axes();
        let bt_at = matmul(&b.t().to_owned(), &a.t().to_owned()).unwrap();
        assert!(ab_t.iter().zip(bt_at.iter()).all(|(x, y)| (x - y).abs() <= 1e-12));

        let d = array![[2.0, 0.0], [0.0, 3.0]];
        assert_eq!(matmul(&d, &d).unwrap(), array![[4.0, 0.0], [0.0, 9.0]]);
        assert!(matches!(
            matmul(&d, &Array2::zeros((3, 3))),
            Err(Error::DimensionMismatch { .. })
        ));
        let s = sym_from_product(array![[1.0, 2.0], [4.0, 1.0]]).unwrap();
        assert_eq!(s.get(0, 1), 3.0);
        assert_eq!(s.get(1, 0), 3.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            SymmetricMatrix::new(Array2::zeros((2, 3))),
            Err(Error::NotSquare { .. })
        ));
        assert!(matches!(
            SymmetricMatrix::new(array![[1.0, f64::NAN], [0.0, 1.0]]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
    }
}
