//! Energy models with analytic gradients and Hessians, the synthetic gapped
//! spectrum generator, and finite-difference consistency checks.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::sampling::{conjugate_diagonal, random_orthogonal, rng};
use crate::symlin::SymmetricMatrix;

/// Smooth energy with explicit gradient and symmetric Hessian.
pub trait EnergyModel: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn energy(&self, x: &Array1<f64>) -> f64;
    fn gradient(&self, x: &Array1<f64>) -> Array1<f64>;
    fn hessian(&self, x: &Array1<f64>) -> SymmetricMatrix;
}

/// Positive-definite quadratic `½xᵀAx`.
#[derive(Clone, Debug)]
pub struct Quadratic {
    a: SymmetricMatrix,
}

impl Quadratic {
    pub fn new(a: SymmetricMatrix) -> Self {
        Self { a }
    }
}

impl EnergyModel for Quadratic {
    fn name(&self) -> String {
        "quadratic".into()
    }

    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn energy(&self, x: &Array1<f64>) -> f64 {
        0.5 * x.dot(&self.a.as_array().dot(x))
    }

    fn gradient(&self, x: &Array1<f64>) -> Array1<f64> {
        self.a.as_array().dot(x)
    }

    fn hessian(&self, _x: &Array1<f64>) -> SymmetricMatrix {
        self.a.clone()
    }
}

/// The Müller–Brown surface: four anisotropic Gaussians in the plane.
#[derive(Clone, Copy, Debug, Default)]
pub struct MullerBrown;

const MB_A: [f64; 4] = [-200.0, -100.0, -170.0, 15.0];
const MB_LA: [f64; 4] = [-1.0, -1.0, -6.5, 0.7];
const MB_LB: [f64; 4] = [0.0, 0.0, 11.0, 0.6];
const MB_LC: [f64; 4] = [-10.0, -10.0, -6.5, 0.7];
const MB_X0: [f64; 4] = [1.0, 0.0, -0.5, -1.0];
const MB_Y0: [f64; 4] = [0.0, 0.5, 1.5, 1.0];

pub fn muller_brown() -> MullerBrown {
    MullerBrown
}

impl MullerBrown {
    /// Per-term value and exponent gradient at `(x, y)`.
    fn terms(&self, x: &Array1<f64>) -> [(f64, f64, f64); 4] {
        let mut out = [(0.0, 0.0, 0.0); 4];
        for (i, slot) in out.iter_mut().enumerate() {
            let dx = x[0] - MB_X0[i];
            let dy = x[1] - MB_Y0[i];
            let e = MB_A[i]
                * (MB_LA[i] * dx * dx + MB_LB[i] * dx * dy + MB_LC[i] * dy * dy).exp();
            let gx = 2.0 * MB_LA[i] * dx + MB_LB[i] * dy;
            let gy = MB_LB[i] * dx + 2.0 * MB_LC[i] * dy;
            *slot = (e, gx, gy);
        }
        out
    }
}

impl EnergyModel for MullerBrown {
    fn name(&self) -> String {
        "muller_brown".into()
    }

    fn dim(&self) -> usize {
        2
    }

    fn energy(&self, x: &Array1<f64>) -> f64 {
        self.terms(x).iter().map(|t| t.0).sum()
    }

    fn gradient(&self, x: &Array1<f64>) -> Array1<f64> {
        let mut g = Array1::zeros(2);
        for (e, gx, gy) in self.terms(x) {
            g[0] += e * gx;
            g[1] += e * gy;
        }
        g
    }

    fn hessian(&self, x: &Array1<f64>) -> SymmetricMatrix {
        let mut h = Array2::zeros((2, 2));
        for (i, (e, gx, gy)) in self.terms(x).into_iter().enumerate() {
            h[[0, 0]] += e * (gx * gx + 2.0 * MB_LA[i]);
            h[[0, 1]] += e * (gx * gy + MB_LB[i]);
            h[[1, 1]] += e * (gy * gy + 2.0 * MB_LC[i]);
        }
        h[[1, 0]] = h[[0, 1]];
        SymmetricMatrix::new(h).expect("finite Hessian")
    }
}

/// Dense rotated quartic `E = ¼Σy_i⁴ + ½Σc_iy_i²` with `y = Qᵀx`. With `k`
/// negative curvatures the origin is an index-`k` saddle.
#[derive(Clone, Debug)]
pub struct RotatedQuartic {
    q: Array2<f64>,
    c: Vec<f64>,
    k: usize,
}

/// Unit curvatures: `c_i = −1` for `i ≤ k`, `+1` otherwise.
pub fn rotated_quartic(k: usize, d: usize, seed: u64) -> Result<RotatedQuartic> {
    if k == 0 || k >= d {
        return Err(Error::InvalidIndex { k, max: d.saturating_sub(1) });
    }
    let c = (0..d).map(|i| if i < k { -1.0 } else { 1.0 }).collect();
    RotatedQuartic::with_curvatures(c, seed)
}

impl RotatedQuartic {
    /// Arbitrary nonzero curvatures; the origin's Morse index is the number
    /// of negative entries.
    pub fn with_curvatures(c: Vec<f64>, seed: u64) -> Result<Self> {
        if c.iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return Err(Error::Degenerate("curvatures must be finite and nonzero".into()));
        }
        let q = random_orthogonal(c.len(), &mut rng(seed));
        let k = c.iter().filter(|v| **v < 0.0).count();
        Ok(Self { q, c, k })
    }

    pub fn saddle_index(&self) -> usize {
        self.k
    }

    pub fn curvatures(&self) -> &[f64] {
        &self.c
    }

    pub fn rotation(&self) -> &Array2<f64> {
        &self.q
    }

    pub fn to_y(&self, x: &Array1<f64>) -> Array1<f64> {
        self.q.t().dot(x)
    }

    pub fn energy_in_y(&self, y: &Array1<f64>) -> f64 {
        y.iter()
            .zip(&self.c)
            .map(|(&v, &c)| 0.25 * v.powi(4) + 0.5 * c * v * v)
            .sum()
    }
}

impl EnergyModel for RotatedQuartic {
    fn name(&self) -> String {
        format!("rotated_quartic_k{}_d{}", self.k, self.c.len())
    }

    fn dim(&self) -> usize {
        self.c.len()
    }

    fn energy(&self, x: &Array1<f64>) -> f64 {
        self.energy_in_y(&self.to_y(x))
    }

    fn gradient(&self, x: &Array1<f64>) -> Array1<f64> {
        let y = self.to_y(x);
        let gy = Array1::from_iter(y.iter().zip(&self.c).map(|(&v, &c)| v * v * v + c * v));
        self.q.dot(&gy)
    }

    fn hessian(&self, x: &Array1<f64>) -> SymmetricMatrix {
        let y = self.to_y(x);
        let d: Vec<f64> = y.iter().zip(&self.c).map(|(&v, &c)| 3.0 * v * v + c).collect();
        conjugate_diagonal(&self.q, &d)
    }
}

/// Semidiscrete 1-D Allen–Cahn energy on `n` nodes of `[0, 1]` with the
/// ghost-point Neumann Laplacian.
///
/// The ghost-point operator `Δ_h` is not symmetric, but `WΔ_h` is for the
/// trapezoid weights `W = diag(½, 1, …, 1, ½)`. The implemented energy is
/// `ε²/(2h²)·Σ(u_{i+1} − u_i)² + Σ w_i(u_i² − 1)²/4`, whose Euclidean
/// gradient is `W(−ε²Δ_h u + u³ − u)` and whose Hessian is the symmetric
/// tridiagonal `W(−ε²Δ_h + diag(3u_i² − 1))`. Its critical points and their
/// inertia coincide with those of the unweighted form.
#[derive(Clone, Debug)]
pub struct AllenCahn1d {
    epsilon: f64,
    n: usize,
    h: f64,
}

pub fn allen_cahn_1d(epsilon: f64, n: usize) -> Result<AllenCahn1d> {
    if n < 3 {
        return Err(Error::Domain {
            value: n as f64,
            domain: "n >= 3",
        });
    }
    if !(epsilon > 0.0) {
        return Err(Error::Domain {
            value: epsilon,
            domain: "epsilon > 0",
        });
    }
    Ok(AllenCahn1d {
        epsilon,
        n,
        h: 1.0 / (n - 1) as f64,
    })
}

impl AllenCahn1d {
    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn weights(&self) -> Array1<f64> {
        let mut w = Array1::ones(self.n);
        w[0] = 0.5;
        w[self.n - 1] = 0.5;
        w
    }

    /// Ghost-point Neumann Laplacian `Δ_h u`.
    pub fn laplacian(&self, u: &Array1<f64>) -> Array1<f64> {
        let n = self.n;
        let h2 = self.h * self.h;
        Array1::from_shape_fn(n, |i| {
            if i == 0 {
                2.0 * (u[1] - u[0]) / h2
            } else if i == n - 1 {
                2.0 * (u[n - 2] - u[n - 1]) / h2
            } else {
                (u[i - 1] - 2.0 * u[i] + u[i + 1]) / h2
            }
        })
    }

    /// `−ε²Δ_h u + u³ − u`, the unweighted gradient form.
    pub fn nodal_gradient(&self, u: &Array1<f64>) -> Array1<f64> {
        let eps2 = self.epsilon * self.epsilon;
        let lap = self.laplacian(u);
        Array1::from_shape_fn(self.n, |i| -eps2 * lap[i] + u[i].powi(3) - u[i])
    }
}

impl EnergyModel for AllenCahn1d {
    fn name(&self) -> String {
        format!("allen_cahn_eps{}_n{}", self.epsilon, self.n)
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn energy(&self, u: &Array1<f64>) -> f64 {
        let c = self.epsilon * self.epsilon / (2.0 * self.h * self.h);
        let w = self.weights();
        let bonds: f64 = u.windows(2).into_iter().map(|p| (p[1] - p[0]).powi(2)).sum();
        let wells: f64 = u
            .iter()
            .zip(w.iter())
            .map(|(&v, &wi)| wi * (v * v - 1.0).powi(2) / 4.0)
            .sum();
        c * bonds + wells
    }

    fn gradient(&self, u: &Array1<f64>) -> Array1<f64> {
        self.nodal_gradient(u) * &self.weights()
    }

    fn hessian(&self, u: &Array1<f64>) -> SymmetricMatrix {
        let n = self.n;
        let c = self.epsilon * self.epsilon / (self.h * self.h);
        let w = self.weights();
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            let bonds = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
            m[[i, i]] = c * bonds + w[i] * (3.0 * u[i] * u[i] - 1.0);
            if i + 1 < n {
                m[[i, i + 1]] = -c;
                m[[i + 1, i]] = -c;
            }
        }
        SymmetricMatrix::new(m).expect("finite Hessian")
    }
}

/// Layout of a synthetic gapped spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticSpectrumSpec {
    pub dim: usize,
    pub k: usize,
    pub lambda_k: f64,
    pub lambda_k1: f64,
    /// Spectrum lies in `[-radius, radius]`.
    pub radius: f64,
    pub rotation_seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct SyntheticMatrix {
    pub matrix: SymmetricMatrix,
    /// Exact eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
}

/// `count` values from `near` out to `far` (same sign, `|near| ≤ |far|`),
/// geometrically spaced in magnitude; linear when the endpoints straddle or
/// touch zero.
fn spaced(near: f64, far: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![near];
    }
    let geometric = near * far > 0.0;
    (0..count)
        .map(|j| {
            let t = j as f64 / (count - 1) as f64;
            if geometric {
                near * (far / near).powf(t)
            } else {
                near + (far - near) * t
            }
        })
        .collect()
}

pub fn synthetic_matrix(spec: &SyntheticSpectrumSpec) -> Result<SyntheticMatrix> {
    let SyntheticSpectrumSpec {
        dim,
        k,
        lambda_k,
        lambda_k1,
        radius,
        rotation_seed,
    } = *spec;
    if k == 0 || k >= dim {
        return Err(Error::InvalidIndex { k, max: dim.saturating_sub(1) });
    }
    if !(lambda_k < lambda_k1) {
        return Err(Error::GapClosed {
            lower: lambda_k,
            upper: lambda_k1,
        });
    }
    if radius < lambda_k.abs() || radius < lambda_k1.abs() || !radius.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "radius {radius} smaller than gap endpoints ({lambda_k}, {lambda_k1})"
        )));
    }
    let mut eigenvalues = spaced(lambda_k, -radius, k);
    eigenvalues.extend(spaced(lambda_k1, radius, dim - k));
    eigenvalues.sort_by(f64::total_cmp);
    let matrix = match rotation_seed {
        None => SymmetricMatrix::from_diag(&eigenvalues)?,
        Some(seed) => {
            let q = random_orthogonal(dim, &mut rng(seed));
            conjugate_diagonal(&q, &eigenvalues)
        }
    };
    Ok(SyntheticMatrix {
        matrix,
        eigenvalues,
    })
}

/// Finite-difference step used by [`fd_check`].
pub const FD_STEP: f64 = 1e-5;

/// Relative discrepancies of the analytic gradient and Hessian against
/// central differences of the energy and gradient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdReport {
    pub gradient_error: f64,
    pub hessian_error: f64,
}

pub fn fd_gradient(model: &dyn EnergyModel, x: &Array1<f64>, step: f64) -> Array1<f64> {
    Array1::from_shape_fn(model.dim(), |i| {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += step;
        xm[i] -= step;
        (model.energy(&xp) - model.energy(&xm)) / (2.0 * step)
    })
}

/// Central-difference Jacobian of an arbitrary vector map.
pub fn fd_jacobian(
    f: impl Fn(&Array1<f64>) -> Array1<f64>,
    x: &Array1<f64>,
    step: f64,
) -> Array2<f64> {
    let n = x.len();
    let mut jac = Array2::zeros((f(x).len(), n));
    for j in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += step;
        xm[j] -= step;
        let col = (f(&xp) - f(&xm)) / (2.0 * step);
        jac.column_mut(j).assign(&col);
    }
    jac
}

pub fn fd_check(model: &dyn EnergyModel, x: &Array1<f64>) -> FdReport {
    let g = model.gradient(x);
    let g_fd = fd_gradient(model, x, FD_STEP);
    let g_scale = g.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let gradient_error = (&g - &g_fd).iter().fold(0.0_f64, |m, v| m.max(v.abs())) / g_scale;

    let h = model.hessian(x);
    let h_fd = fd_jacobian(|y| model.gradient(y), x, FD_STEP);
    let h_scale = h.max_norm().max(1.0);
    let hessian_error = (h.as_array() - &h_fd)
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        / h_scale;
    FdReport {
        gradient_error,
        hessian_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symlin::eigh;

    #[test]
    fn quartic_at_origin() {
        for (k, d) in [(1, 4), (3, 8), (5, 6)] {
            let m = rotated_quartic(k, d, 7).unwrap();
            let x = Array1::zeros(d);
            assert!(m.gradient(&x).iter().all(|v| *v == 0.0));
            let eig = eigh(&m.hessian(&x)).unwrap();
            let neg = eig.eigenvalues.iter().filter(|v| **v < 0.0).count();
            assert_eq!(neg, k);
            for (i, l) in eig.eigenvalues.iter().enumerate() {
                let expected = if i < k { -1.0 } else { 1.0 };
                assert!((l - expected).abs() < 1e-12);
            }
        }
        assert!(rotated_quartic(0, 4, 1).is_err());
    }

    #[test]
    fn quartic_energy_coordinates_agree() {
        let m = rotated_quartic(2, 8, 3).unwrap();
        let x = crate::sampling::gaussian_vector(8, &mut rng(9));
        let y = m.to_y(&x);
        assert!((m.energy(&x) - m.energy_in_y(&y)).abs() <= 1e-12);
    }

    #[test]
    fn allen_cahn_structure() {
        let ac = allen_cahn_1d(0.4, 41).unwrap();
        let zero = Array1::zeros(41);
        assert!(ac.gradient(&zero).iter().all(|v| *v == 0.0));
        let h0 = ac.hessian(&zero);
        let neg = eigh(&h0).unwrap().eigenvalues.iter().filter(|v| **v < 0.0).count();
        assert_eq!(neg, 1);

        // W⁻¹H(0) is the displayed form −ε²Δ_h − I.
        let w = ac.weights();
        for j in 0..41 {
            let mut e = Array1::zeros(41);
            e[j] = 1.0;
            let displayed = ac.laplacian(&e) * (-0.16) - &e;
            for i in 0..41 {
                assert!((h0.get(i, j) / w[i] - displayed[i]).abs() < 1e-9);
            }
        }

        for c in [1.0, -1.0] {
            let u = Array1::from_elem(41, c);
            assert!(ac.gradient(&u).iter().all(|v| v.abs() < 1e-12));
            assert!(eigh(&ac.hessian(&u)).unwrap().lambda(1) > 0.0);
        }

        let u = crate::sampling::gaussian_vector(41, &mut rng(1));
        let h = ac.hessian(&u);
        for i in 0..41usize {
            for j in 0..41 {
                if i.abs_diff(j) > 1 {
                    assert_eq!(h.get(i, j), 0.0);
                }
            }
        }
        assert!(allen_cahn_1d(0.4, 2).is_err());
    }

    #[test]
    fn models_pass_fd_checks() {
        let mut r = rng(123);
        let models: Vec<Box<dyn EnergyModel>> = vec![
            Box::new(muller_brown()),
            Box::new(rotated_quartic(3, 8, 2).unwrap()),
            Box::new(allen_cahn_1d(0.4, 41).unwrap()),
        ];
        for m in &models {
            for _ in 0..5 {
                let x = crate::sampling::gaussian_vector(m.dim(), &mut r) * 0.5;
                let rep = fd_check(m.as_ref(), &x);
                assert!(rep.gradient_error <= 1e-5, "{} {rep:?}", m.name());
                assert!(rep.hessian_error <= 1e-4, "{} {rep:?}", m.name());
            }
        }
        for p in [[0.0, 0.0], [-0.5, 1.5], [0.6, 0.03]] {
            let rep = fd_check(&muller_brown(), &Array1::from(p.to_vec()));
            assert!(rep.gradient_error <= 1e-5);
        }
    }

    #[test]
    fn synthetic_layout() {
        let spec = SyntheticSpectrumSpec {
            dim: 4,
            k: 2,
            lambda_k: -0.5,
            lambda_k1: 0.5,
            radius: 1.0,
            rotation_seed: None,
        };
        let s = synthetic_matrix(&spec).unwrap();
        assert_eq!(s.matrix, SymmetricMatrix::from_diag(&[-1.0, -0.5, 0.5, 1.0]).unwrap());

        let rotated = synthetic_matrix(&SyntheticSpectrumSpec {
            dim: 12,
            k: 5,
            rotation_seed: Some(4),
            ..spec
        })
        .unwrap();
        let eig = eigh(&rotated.matrix).unwrap();
        for (a, b) in eig.eigenvalues.iter().zip(&rotated.eigenvalues) {
            assert!((a - b).abs() <= 1e-10);
        }
        assert_eq!(rotated.eigenvalues.iter().filter(|&&l| l <= -0.5).count(), 5);

        assert!(synthetic_matrix(&SyntheticSpectrumSpec { radius: 0.3, ..spec }).is_err());
    }
}
