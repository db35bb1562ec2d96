//! Exact and filtered prescribed-index reflectors, their error metrics, and
//! the local linearization of the reflected gradient flow and its discrete
//! map at a nondegenerate critical point.

use ndarray::{s, Array2};

use crate::error::{Error, Result};
use crate::sign_engine::{exact_sign, OddFilter};
use crate::symlin::{eigh, EigenDecomposition, SymmetricMatrix};

/// Eigenvalues below `-MORSE_REL_TOL·‖H‖₂` count toward the Morse index.
pub const MORSE_REL_TOL: f64 = 1e-10;
/// Minimum relative width of a target gap for the exact reflector.
pub const GAP_REL_TOL: f64 = 1e-10;

/// Number of eigenvalues below `-1e-10·‖H‖₂`.
pub fn morse_index(eig: &EigenDecomposition) -> usize {
    let tol = MORSE_REL_TOL * eig.spectral_radius();
    eig.eigenvalues.iter().filter(|&&l| l < -tol).count()
}

/// `I − 2P_k` with `P_k` the projector onto the bottom-`k` eigenvectors.
pub fn exact_reflector(h: &SymmetricMatrix, k: usize) -> Result<SymmetricMatrix> {
    exact_reflector_from(&eigh(h)?, k)
}

pub fn exact_reflector_from(eig: &EigenDecomposition, k: usize) -> Result<SymmetricMatrix> {
    let d = eig.dim();
    if k == 0 || k >= d {
        return Err(Error::InvalidIndex {
            k,
            max: d.saturating_sub(1),
        });
    }
    let (lower, upper) = (eig.lambda(k), eig.lambda(k + 1));
    let scale = eig.spectral_radius().max(f64::MIN_POSITIVE);
    if !(upper - lower >= GAP_REL_TOL * scale) {
        return Err(Error::DegenerateGap { k, lower, upper });
    }
    let frame = eig.vectors.slice(s![.., ..k]);
    let mut r = frame.dot(&frame.t());
    r.mapv_inplace(|v| -2.0 * v);
    r.diag_mut().mapv_inplace(|v| v + 1.0);
    SymmetricMatrix::new(r)
}

/// Filtered reflector `φ(α(H − sI))` with its operator error against the
/// exact shifted sign.
#[derive(Clone, Debug)]
pub struct ReflectorReport {
    pub reflector: SymmetricMatrix,
    pub shift: f64,
    pub alpha: f64,
    pub filter_name: String,
    /// `max_i |φ(α(λ_i − s)) − sgn(λ_i − s)|`, equal to `‖R̃ − sgn(H − sI)‖₂`.
    pub operator_error: f64,
    /// Scaled margin `α·min_i |λ_i − s|`.
    pub gamma: f64,
}

pub fn filtered_reflector(
    h: &SymmetricMatrix,
    shift: f64,
    alpha: f64,
    filter: &OddFilter,
) -> Result<ReflectorReport> {
    filtered_reflector_from(h, &eigh(h)?, shift, alpha, filter)
}

/// [`filtered_reflector`] with a precomputed eigendecomposition of `h`.
pub fn filtered_reflector_from(
    h: &SymmetricMatrix,
    eig: &EigenDecomposition,
    shift: f64,
    alpha: f64,
    filter: &OddFilter,
) -> Result<ReflectorReport> {
    check_off_spectrum(eig, shift)?;
    for &l in eig.eigenvalues.iter() {
        let t = alpha * (l - shift);
        if !filter.contains(t) {
            return Err(Error::OutsideDesignInterval {
                eigenvalue: l,
                value: t,
                half_width: filter.half_width(),
            });
        }
    }
    let reflector = if filter.is_exact() {
        eig.apply_values(&eig.eigenvalues.mapv(|l| (l - shift).signum()))
    } else {
        filter.apply(&h.add_identity(-shift).scale(alpha))?
    };
    Ok(ReflectorReport {
        reflector,
        shift,
        alpha,
        filter_name: filter.name().to_string(),
        operator_error: spectral_sign_error(eig, shift, alpha, filter),
        gamma: alpha
            * eig
                .eigenvalues
                .iter()
                .fold(f64::INFINITY, |m, &l| m.min((l - shift).abs())),
    })
}

/// Worst scalar sign error `max_i |φ(α(λ_i − s)) − sgn(λ_i − s)|` over the
/// spectrum.
pub fn spectral_sign_error(
    eig: &EigenDecomposition,
    shift: f64,
    alpha: f64,
    filter: &OddFilter,
) -> f64 {
    eig.eigenvalues.iter().fold(0.0, |m, &l| {
        let u = l - shift;
        m.max((filter.eval(alpha * u) - u.signum()).abs())
    })
}

fn check_off_spectrum(eig: &EigenDecomposition, shift: f64) -> Result<()> {
    let scale = eig
        .eigenvalues
        .iter()
        .fold(0.0_f64, |m, &l| m.max((l - shift).abs()));
    let tol = crate::sign_engine::SIGN_GAP_TOL * scale;
    match eig
        .eigenvalues
        .iter()
        .find(|&&l| (l - shift).abs() <= tol)
    {
        Some(&eigenvalue) => Err(Error::ShiftOnSpectrum { eigenvalue, tol }),
        None => Ok(()),
    }
}

/// `‖R̃ − sgn(H − sI)‖₂`, computed from the eigenvalues of the difference.
pub fn operator_error(r_tilde: &SymmetricMatrix, h: &SymmetricMatrix, shift: f64) -> Result<f64> {
    let exact = exact_sign(&h.add_identity(-shift))?;
    r_tilde.sub(&exact)?.two_norm()
}

/// `‖R̃ − R‖·‖g‖`, an upper bound on `‖(R̃ − R)g‖`.
pub fn direction_error_bound(op_err: f64, grad_norm: f64) -> f64 {
    op_err * grad_norm
}

/// Local linearization data at a nondegenerate critical point.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalAnalysis {
    /// Morse index `j` of the critical point.
    pub morse_index: usize,
    /// Target index `k = #{λ_i < s}` inferred from the shift.
    pub target_index: usize,
    /// Number of positive eigenvalues of the flow linearization.
    pub positive_count: usize,
    /// Discrete-map eigenvalues `μ_i(η)`, empty unless a step was given.
    pub mu: Vec<f64>,
    /// Step-size threshold `2 / max_i φ_iλ_i` when `j = k`.
    pub eta_max: Option<f64>,
    /// `max_i |φ(α(λ_i − s)) − sgn(λ_i − s)|`.
    pub delta_star: f64,
    pub beta_eta: Option<f64>,
}

impl LocalAnalysis {
    /// Fails unless the inferred target index equals `declared`.
    pub fn require_target(self, declared: usize) -> Result<Self> {
        if self.target_index != declared {
            return Err(Error::IndexMismatch {
                inferred: self.target_index,
                declared,
            });
        }
        Ok(self)
    }

    pub fn matched(&self) -> bool {
        self.morse_index == self.target_index
    }

    /// Number of discrete-map eigenvalues with `|μ_i| > 1`.
    pub fn expanding_count(&self) -> usize {
        self.mu.iter().filter(|m| m.abs() > 1.0).count()
    }
}

struct LocalSpectrum {
    eigenvalues: Vec<f64>,
    /// `φ(α(λ_i − s))·λ_i`.
    products: Vec<f64>,
    morse_index: usize,
    target_index: usize,
    delta_star: f64,
}

fn nondegenerate_eigen(h: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let eig = eigh(h)?;
    let radius = eig.spectral_radius();
    let tol = MORSE_REL_TOL * radius;
    if radius == 0.0 {
        return Err(Error::Degenerate("zero Hessian".into()));
    }
    if let Some(l) = eig.eigenvalues.iter().find(|l| l.abs() <= tol) {
        return Err(Error::Degenerate(format!(
            "Hessian eigenvalue {l:e} is within {tol:e} of zero"
        )));
    }
    Ok(eig)
}

fn local_spectrum(
    h: &SymmetricMatrix,
    shift: f64,
    alpha: f64,
    filter: &OddFilter,
) -> Result<LocalSpectrum> {
    let eig = nondegenerate_eigen(h)?;
    check_off_spectrum(&eig, shift)?;
    let eigenvalues = eig.eigenvalues.to_vec();
    let products = eigenvalues
        .iter()
        .map(|&l| filter.eval(alpha * (l - shift)) * l)
        .collect();
    Ok(LocalSpectrum {
        morse_index: morse_index(&eig),
        target_index: eigenvalues.iter().filter(|&&l| l < shift).count(),
        delta_star: spectral_sign_error(&eig, shift, alpha, filter),
        eigenvalues,
        products,
    })
}

/// Counts the unstable directions of the filtered reflector flow
/// `ẋ = −φ(α(H − sI))∇E` at a critical point with Hessian `h_star`.
pub fn flow_inertia(
    h_star: &SymmetricMatrix,
    shift: f64,
    alpha: f64,
    filter: &OddFilter,
) -> Result<LocalAnalysis> {
    let local = local_spectrum(h_star, shift, alpha, filter)?;
    Ok(LocalAnalysis {
        morse_index: local.morse_index,
        target_index: local.target_index,
        positive_count: local.products.iter().filter(|&&p| p < 0.0).count(),
        mu: Vec::new(),
        eta_max: None,
        delta_star: local.delta_star,
        beta_eta: None,
    })
}

/// Linearization `−|H⋆|` of the raw sign flow `ẋ = −sgn(H)∇E`.
pub fn raw_sign_linearization(h_star: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let eig = nondegenerate_eigen(h_star)?;
    Ok(eig.apply_values(&eig.eigenvalues.mapv(|l| -l.abs())))
}

/// Eigenvalues `μ_i(η) = 1 − η·φ(α(λ_i − s))·λ_i` of the Jacobian of the
/// frozen discrete map `x ↦ x − η·φ(α(H − sI))∇E(x)`.
pub fn discrete_eigenvalues(
    h_star: &SymmetricMatrix,
    shift: f64,
    alpha: f64,
    filter: &OddFilter,
    eta: f64,
) -> Result<LocalAnalysis> {
    let local = local_spectrum(h_star, shift, alpha, filter)?;
    let matched = local.morse_index == local.target_index;
    let eta_max = if matched {
        let top = local.products.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (top > 0.0).then(|| 2.0 / top)
    } else {
        None
    };
    let beta_eta = local
        .eigenvalues
        .iter()
        .fold(0.0_f64, |m, &l| m.max((1.0 - eta * l.abs()).abs()));
    Ok(LocalAnalysis {
        morse_index: local.morse_index,
        target_index: local.target_index,
        positive_count: local.products.iter().filter(|&&p| p < 0.0).count(),
        mu: local.products.iter().map(|&p| 1.0 - eta * p).collect(),
        eta_max,
        delta_star: local.delta_star,
        beta_eta: Some(1.0 - beta_eta),
    })
}

/// Sufficient step bound `2 / ((1 + δ⋆)‖H⋆‖₂)` at a matched-index point.
pub fn step_size_window(h_star: &SymmetricMatrix, delta_star: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&delta_star) {
        return Err(Error::Domain {
            value: delta_star,
            domain: "delta_star in [0, 1)",
        });
    }
    let norm = h_star.two_norm()?;
    if norm == 0.0 {
        return Err(Error::Degenerate("zero Hessian".into()));
    }
    Ok(2.0 / ((1.0 + delta_star) * norm))
}

/// Jacobian `I − ηR̃H⋆` of the frozen map at a critical point.
pub fn frozen_map_jacobian(h_star: &SymmetricMatrix, r_tilde: &SymmetricMatrix, eta: f64) -> Array2<f64> {
    let mut j = r_tilde.as_array().dot(h_star.as_array());
    j.mapv_inplace(|v| -eta * v);
    j.diag_mut().mapv_inplace(|v| v + 1.0);
    j
}

/// Contraction margin of the frozen reflected step under reflector error.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionReport {
    /// `β_η = 1 − max_i |1 − η|λ_i||`.
    pub beta_eta: f64,
    /// `η‖R̃ − R⋆‖₂‖H⋆‖₂`.
    pub perturbation: f64,
    /// Sufficient condition `perturbation < β_η` (with `η < 2/‖H⋆‖₂`).
    pub attracting: bool,
    pub reason: Option<String>,
    /// `‖I − ηR̃H⋆‖₂`, an upper bound on its spectral radius.
    pub jacobian_norm: f64,
}

/// Checks whether the approximate frozen map `x − ηR̃∇E` stays locally
/// attracting at a critical point whose Morse index equals the target.
pub fn contraction_check(
    h_star: &SymmetricMatrix,
    r_tilde: &SymmetricMatrix,
    eta: f64,
) -> Result<ContractionReport> {
    let eig = nondegenerate_eigen(h_star)?;
    let r_star = eig.apply_values(&eig.eigenvalues.mapv(f64::signum));
    let h_norm = eig.spectral_radius();
    let beta_eta = 1.0
        - eig
            .eigenvalues
            .iter()
            .fold(0.0_f64, |m, &l| m.max((1.0 - eta * l.abs()).abs()));
    let perturbation = eta * r_tilde.sub(&r_star)?.two_norm()? * h_norm;

    let jac = frozen_map_jacobian(h_star, r_tilde, eta);
    let gram = SymmetricMatrix::new(jac.t().dot(&jac))?;
    let jacobian_norm = eigh(&gram)?.spectral_radius().sqrt();

    let (attracting, reason) = if !(eta > 0.0 && eta < 2.0 / h_norm) {
        (
            false,
            Some(format!(
                "step {eta} outside (0, 2/‖H‖₂) = (0, {}); beta_eta = {beta_eta} <= 0",
                2.0 / h_norm
            )),
        )
    } else if perturbation < beta_eta {
        (true, None)
    } else {
        (
            false,
            Some(format!(
                "perturbation {perturbation} >= beta_eta {beta_eta}; no claim"
            )),
        )
    };
    Ok(ContractionReport {
        beta_eta,
        perturbation,
        attracting,
        reason,
        jacobian_norm,
    })
}
