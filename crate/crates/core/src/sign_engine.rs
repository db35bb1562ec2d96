//! Scalar and matrix sign filters.
//!
//! The principal engine is the scaled Newton–Schulz recurrence
//! `X ← ½X(3I − X²)` started from `αA`, whose scalar form is the polynomial
//! `p_m`. On the design interval `[-1, 1]` every `p_m` is odd and preserves
//! sign, so it can stand in for the exact spectral sign.

use std::fmt;
use std::sync::Arc;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::symlin::{eigh, EigenDecomposition, SymmetricMatrix};

/// Largest Newton–Schulz depth [`min_depth`] will return.
pub const MAX_NS_DEPTH: usize = 64;
/// Slack allowed on the scaled spectral radius before Newton–Schulz refuses.
pub const SCALING_SLACK: f64 = 1e-8;
/// Relative size below which an eigenvalue counts as lying on the spectrum's
/// singular point for the exact sign.
pub const SIGN_GAP_TOL: f64 = 1e-10;

/// Scalar Newton–Schulz polynomial `p_m(t)`.
pub fn ns_scalar(t: f64, m: usize) -> f64 {
    let mut p = t;
    for _ in 0..m {
        p = 0.5 * p * (3.0 - p * p);
    }
    p
}

/// Scalar sign error `ε_m(γ) = 1 − p_m(γ)` through the error recurrence
/// `ε_{m+1} = ½ε_m²(3 − ε_m)`.
///
/// For small `γ` the first steps run on `p_m` directly, since `1 − γ` rounds
/// to one and the error recurrence would then never leave its fixed point.
pub fn ns_error(gamma: f64, m: usize) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(ns_error_sequence(gamma, m)[m])
}

/// `[ε_0(γ), …, ε_m(γ)]`.
pub fn ns_error_sequence(gamma: f64, m: usize) -> Vec<f64> {
    let mut seq = Vec::with_capacity(m + 1);
    let mut p = gamma;
    let mut e = 1.0 - gamma;
    seq.push(e);
    for _ in 0..m {
        if p < 0.5 {
            p = 0.5 * p * (3.0 - p * p);
            e = 1.0 - p;
        } else {
            e = 0.5 * e * e * (3.0 - e);
            p = 1.0 - e;
        }
        seq.push(e);
    }
    seq
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Domain {
            value: gamma,
            domain: "(0, 1]",
        });
    }
    Ok(())
}

/// Smallest depth `m` with `ε_m(γ) ≤ tol`.
pub fn min_depth(gamma: f64, tol: f64) -> Result<usize> {
    check_gamma(gamma)?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain {
            value: tol,
            domain: "(0, 1)",
        });
    }
    ns_error_sequence(gamma, MAX_NS_DEPTH)
        .iter()
        .position(|&e| e <= tol)
        .ok_or(Error::DepthCapExceeded {
            gamma,
            tol,
            cap: MAX_NS_DEPTH,
        })
}

/// Scaled margin, depth and the resulting worst-case scalar sign error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarginReport {
    pub gamma: f64,
    pub depth: usize,
    pub scalar_error: f64,
}

impl MarginReport {
    pub fn new(gamma: f64, depth: usize) -> Result<Self> {
        Ok(Self {
            gamma,
            depth,
            scalar_error: ns_error(gamma, depth)?,
        })
    }
}

/// Flops of `depth` Newton–Schulz steps on a `dim × dim` matrix: two dense
/// products (`2d³` each) plus `3d²` of elementwise work per step.
pub fn ns_step_flops(dim: usize, depth: usize) -> u64 {
    let d = dim as u64;
    depth as u64 * (4 * d * d * d + 3 * d * d)
}

/// `depth` scaled Newton–Schulz steps `X_{m+1} = ½X_m(3I − X_m²)`, `X_0 = αA`.
///
/// The caller certifies `α·ρ(A) ≤ 1`; see [`ns_matrix_sign_checked`] for the
/// variant that verifies it against an eigendecomposition.
pub fn ns_matrix_sign(a: &SymmetricMatrix, alpha: f64, depth: usize) -> Result<SymmetricMatrix> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Domain {
            value: alpha,
            domain: "alpha > 0",
        });
    }
    let n = a.dim();
    let mut x: Array2<f64> = a.as_array() * alpha;
    for _ in 0..depth {
        let mut y = x.dot(&x);
        y.mapv_inplace(|v| -v);
        y.diag_mut().mapv_inplace(|v| v + 3.0);
        let mut next = x.dot(&y);
        next.mapv_inplace(|v| 0.5 * v);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (next[[i, j]] + next[[j, i]]);
                next[[i, j]] = v;
                next[[j, i]] = v;
            }
        }
        x = next;
    }
    SymmetricMatrix::new(x).map_err(|_| Error::ScalingViolation {
        radius: f64::INFINITY,
    })
}

/// [`ns_matrix_sign`] after checking `α·ρ(A) ≤ 1 + 1e-8` on `eig`.
pub fn ns_matrix_sign_checked(
    a: &SymmetricMatrix,
    alpha: f64,
    depth: usize,
    eig: &EigenDecomposition,
) -> Result<SymmetricMatrix> {
    let radius = alpha * eig.spectral_radius();
    if radius > 1.0 + SCALING_SLACK {
        return Err(Error::ScalingViolation { radius });
    }
    ns_matrix_sign(a, alpha, depth)
}

/// Exact matrix sign through the spectral decomposition.
pub fn exact_sign(a: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    exact_sign_from(&eigh(a)?)
}

/// Exact sign from an existing eigendecomposition of the argument.
pub fn exact_sign_from(eig: &EigenDecomposition) -> Result<SymmetricMatrix> {
    let radius = eig.spectral_radius();
    let tol = SIGN_GAP_TOL * radius;
    if let Some(&bad) = eig
        .eigenvalues
        .iter()
        .find(|v| v.abs() < tol || **v == 0.0)
    {
        return Err(Error::ShiftOnSpectrum {
            eigenvalue: bad,
            tol,
        });
    }
    Ok(eig.apply_values(&eig.eigenvalues.mapv(f64::signum)))
}

/// Depth of a filter: a number of polynomial steps or the exact sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Depth {
    Exact,
    Steps(usize),
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::Exact => write!(f, "exact"),
            Depth::Steps(m) => write!(f, "{m}"),
        }
    }
}

impl std::str::FromStr for Depth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Depth::Exact),
            other => other.parse().map(Depth::Steps).map_err(|_| Error::Domain {
                value: f64::NAN,
                domain: "depth: 'exact' or a step count",
            }),
        }
    }
}

impl Depth {
    /// The exact sign or the Newton–Schulz polynomial of this depth.
    pub fn filter(self) -> OddFilter {
        match self {
            Depth::Exact => OddFilter::exact_sign(),
            Depth::Steps(m) => OddFilter::newton_schulz(m),
        }
    }
}

#[derive(Clone)]
enum FilterKind {
    ExactSign,
    NewtonSchulz(usize),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// Continuous odd scalar filter `φ` with a symmetric design interval
/// `[-b, b]`, applied spectrally to a scaled shifted matrix.
#[derive(Clone)]
pub struct OddFilter {
    name: String,
    depth: Depth,
    half_width: f64,
    kind: FilterKind,
}

impl fmt::Debug for OddFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OddFilter")
            .field("name", &self.name)
            .field("depth", &self.depth)
            .field("half_width", &self.half_width)
            .finish()
    }
}

impl OddFilter {
    /// The exact sign; its design interval is the whole line.
    pub fn exact_sign() -> Self {
        Self {
            name: "exact".into(),
            depth: Depth::Exact,
            half_width: f64::INFINITY,
            kind: FilterKind::ExactSign,
        }
    }

    /// `p_m` on `[-1, 1]`.
    pub fn newton_schulz(depth: usize) -> Self {
        Self {
            name: format!("ns{depth}"),
            depth: Depth::Steps(depth),
            half_width: 1.0,
            kind: FilterKind::NewtonSchulz(depth),
        }
    }

    pub fn custom(
        name: impl Into<String>,
        half_width: f64,
        depth: Depth,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::Domain {
                value: half_width,
                domain: "half width > 0",
            });
        }
        Ok(Self {
            name: name.into(),
            depth,
            half_width,
            kind: FilterKind::Custom(Arc::new(f)),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn depth(&self) -> Depth {
        self.depth
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.kind, FilterKind::ExactSign)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            FilterKind::ExactSign => {
                if t == 0.0 {
                    0.0
                } else {
                    t.signum()
                }
            }
            FilterKind::NewtonSchulz(m) => ns_scalar(t, *m),
            FilterKind::Custom(f) => f(t),
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        t.abs() <= self.half_width * (1.0 + 1e-12)
    }

    /// `φ(X)` for a symmetric argument. Newton–Schulz runs its matrix
    /// recurrence; the other filters go through the eigendecomposition.
    pub fn apply(&self, x: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        match &self.kind {
            FilterKind::ExactSign => exact_sign(x),
            FilterKind::NewtonSchulz(m) => ns_matrix_sign(x, 1.0, *m),
            FilterKind::Custom(f) => eigh(x)?.apply(|t| f(t)),
        }
    }
}

/// Outcome of a sampled sign-preservation check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignCheck {
    pub preserving: bool,
    /// First sampled point (in increasing order) that breaks oddness or sign.
    pub first_violation: Option<f64>,
    /// Sample minimizing `φ(t)·t` among violations.
    pub worst_offender: Option<f64>,
}

const ODDNESS_TOL: f64 = 1e-12;
const SIGN_SAMPLE_FLOOR: f64 = 1e-8;

/// Deterministic sampled check of oddness and `φ(t)·t > 0` on the design
/// interval (on `[-1, 1]` when the interval is unbounded). This is a
/// surrogate for a proof, not a proof.
pub fn check_sign_preserving(filter: &OddFilter, samples: usize) -> Result<SignCheck> {
    if samples < 2 {
        return Err(Error::Domain {
            value: samples as f64,
            domain: "samples >= 2",
        });
    }
    let b = if filter.half_width.is_finite() {
        filter.half_width
    } else {
        1.0
    };
    let mut first = None;
    let mut worst: Option<(f64, f64)> = None;
    for i in 0..samples {
        let t = -b + 2.0 * b * i as f64 / (samples - 1) as f64;
        let ft = filter.eval(t);
        let fm = filter.eval(-t);
        let odd_ok = (ft + fm).abs() <= ODDNESS_TOL * ft.abs().max(1.0);
        let product = ft * t;
        let sign_ok = t.abs() < SIGN_SAMPLE_FLOOR || product > 0.0;
        if !(odd_ok && sign_ok) {
            first.get_or_insert(t);
            if worst.is_none_or(|(_, p)| product < p) {
                worst = Some((t, product));
            }
        }
    }
    Ok(SignCheck {
        preserving: first.is_none(),
        first_violation: first,
        worst_offender: worst.map(|(t, _)| t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{matrix_with_spectrum, rng};

    #[test]
    fn scalar_fixed_points_and_values() {
        for m in 0..10 {
            assert_eq!(ns_scalar(1.0, m), 1.0);
            assert_eq!(ns_scalar(-1.0, m), -1.0);
            assert_eq!(ns_scalar(0.0, m), 0.0);
        }
        assert_eq!(ns_scalar(0.5, 1), 0.6875);
    }

    #[test]
    fn error_values() {
        for m in 0..10 {
            assert_eq!(ns_error(1.0, m).unwrap(), 0.0);
        }
        assert_eq!(ns_error(0.5, 0).unwrap(), 0.5);
        assert_eq!(ns_error(0.5, 1).unwrap(), 0.3125);
        assert!(ns_error(0.0, 1).is_err());
        assert!(ns_error(1.5, 1).is_err());
    }

    #[test]
    fn error_matches_polynomial() {
        for &g in &[1e-3, 0.05, 0.3, 0.5, 0.77, 0.99] {
            for m in 0..12 {
                let e = ns_error(g, m).unwrap();
                assert!((e - (1.0 - ns_scalar(g, m))).abs() <= 1e-12, "g={g} m={m}");
                if m > 0 {
                    let prev = ns_error(g, m - 1).unwrap();
                    assert!(e <= 1.5 * prev * prev + 1e-15);
                }
            }
        }
    }

    #[test]
    fn min_depth_examples() {
        assert_eq!(min_depth(1.0, 0.1).unwrap(), 0);
        assert_eq!(min_depth(0.5, 0.32).unwrap(), 1);
        assert_eq!(min_depth(0.5, 0.3).unwrap(), 2);
        match min_depth(1e-30, 1e-3) {
            Err(Error::DepthCapExceeded { gamma, .. }) => assert_eq!(gamma, 1e-30),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn small_gamma_leaves_the_fixed_point() {
        // 1 - 1e-20 rounds to 1, but p_m(1e-20) still grows geometrically.
        let e = ns_error(1e-20, 64).unwrap();
        assert!(e < 1.0);
        assert!(matches!(min_depth(1e-20, 0.5), Err(Error::DepthCapExceeded { .. })));
    }

    #[test]
    fn matrix_fixed_points() {
        let a = SymmetricMatrix::from_diag(&[-1.0, 1.0]).unwrap();
        for m in 0..6 {
            assert_eq!(ns_matrix_sign(&a, 1.0, m).unwrap(), a);
        }
        let z = SymmetricMatrix::zeros(3);
        assert_eq!(ns_matrix_sign(&z, 1.0, 4).unwrap(), z);
    }

    #[test]
    fn matrix_matches_spectral_calculus() {
        let eigs = [-1.0, -0.7, -0.4, -0.3, 0.25, 0.5, 0.8, 0.95];
        let a = matrix_with_spectrum(&eigs, &mut rng(21));
        let eig = eigh(&a).unwrap();
        let alpha = 0.9;
        let ns = ns_matrix_sign_checked(&a, alpha, 3, &eig).unwrap();
        let oracle = eig.apply(|t| ns_scalar(alpha * t, 3)).unwrap();
        assert!(ns.max_abs_diff(&oracle) <= 1e-9);
    }

    #[test]
    fn diagonal_scalar_consistency() {
        let diag = [-0.9, -0.2, 0.05, 0.6];
        let a = SymmetricMatrix::from_diag(&diag).unwrap();
        for m in 0..8 {
            let x = ns_matrix_sign(&a, 0.8, m).unwrap();
            for (i, &d) in diag.iter().enumerate() {
                assert!((x.get(i, i) - ns_scalar(0.8 * d, m)).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn scaling_violation_detected() {
        let a = SymmetricMatrix::from_diag(&[-2.0, 1.0]).unwrap();
        let eig = eigh(&a).unwrap();
        assert!(matches!(
            ns_matrix_sign_checked(&a, 1.0, 2, &eig),
            Err(Error::ScalingViolation { .. })
        ));
        assert!(ns_matrix_sign_checked(&a, 0.5, 2, &eig).is_ok());
    }

    #[test]
    fn exact_sign_examples() {
        let d = SymmetricMatrix::from_diag(&[-2.0, 5.0]).unwrap();
        assert_eq!(exact_sign(&d).unwrap(), SymmetricMatrix::from_diag(&[-1.0, 1.0]).unwrap());

        let eigs = [-3.0, -1.0, -0.5, 0.5, 2.0, 4.0];
        let a = matrix_with_spectrum(&eigs, &mut rng(2));
        let s = exact_sign(&a).unwrap();
        let s7 = exact_sign(&a.scale(7.0)).unwrap();
        assert!(s.max_abs_diff(&s7) <= 1e-9);
        let sq = s.as_array().dot(s.as_array());
        assert!(sq.indexed_iter().all(|((i, j), v)| (v - if i == j { 1.0 } else { 0.0 }).abs() <= 1e-9));
        let abs = SymmetricMatrix::new(s.as_array().dot(a.as_array())).unwrap();
        let mut abs_eigs = eigh(&abs).unwrap().eigenvalues.to_vec();
        abs_eigs.sort_by(f64::total_cmp);
        let mut expected: Vec<f64> = eigs.iter().map(|v| v.abs()).collect();
        expected.sort_by(f64::total_cmp);
        for (x, y) in abs_eigs.iter().zip(&expected) {
            assert!((x - y).abs() <= 1e-9);
        }

        let singular = SymmetricMatrix::from_diag(&[0.0, 1.0]).unwrap();
        assert!(matches!(exact_sign(&singular), Err(Error::ShiftOnSpectrum { .. })));
        assert!(exact_sign(&SymmetricMatrix::zeros(2)).is_err());
    }

    #[test]
    fn sign_preservation_checks() {
        for m in 0..9 {
            assert!(check_sign_preserving(&OddFilter::newton_schulz(m), 1001).unwrap().preserving);
        }
        let cube = OddFilter::custom("cube", 1.0, Depth::Exact, |t| t * t * t).unwrap();
        assert!(check_sign_preserving(&cube, 1001).unwrap().preserving);

        let bad = OddFilter::custom("notch", 1.0, Depth::Exact, |t| t * (t * t - 0.25)).unwrap();
        let check = check_sign_preserving(&bad, 1001).unwrap();
        assert!(!check.preserving);
        let worst = check.worst_offender.unwrap().abs();
        assert!((0.3..0.4).contains(&worst), "worst offender {worst}");
        assert!(check.first_violation.unwrap().abs() <= 0.5);
        assert!(check_sign_preserving(&cube, 1).is_err());
    }

    #[test]
    fn monotone_on_unit_interval() {
        for m in 0..=8 {
            let mut prev = ns_scalar(0.0, m);
            for i in 1..=1000 {
                let v = ns_scalar(i as f64 / 1000.0, m);
                assert!(v >= prev - 4.0 * f64::EPSILON, "m={m} t={i}");
                prev = v;
            }
        }
    }
}
