//! Shift placement inside the target gap, scaling policies, and the
//! deterministic admissibility certificates for fresh and reused shifts.

use crate::error::{Error, Result};
use crate::symlin::{eigh, EigenDecomposition, SymmetricMatrix};

/// Blend coefficient of the damped-midpoint policy.
pub const DEFAULT_BLEND: f64 = 0.5;
/// Reuse/refresh: refresh once the certified margin drops below this
/// fraction of the estimated half gap.
pub const DEFAULT_REFRESH_FRACTION: f64 = 0.1;

/// Estimated endpoints `λ̂_k ≤ λ̂_{k+1}` of the target gap, each within `eps`
/// of the true endpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapEstimate {
    pub lambda_k: f64,
    pub lambda_k1: f64,
    pub eps: f64,
    pub k: usize,
}

impl GapEstimate {
    pub fn new(lambda_k: f64, lambda_k1: f64, eps: f64, k: usize) -> Result<Self> {
        if !(lambda_k <= lambda_k1) {
            return Err(Error::GapClosed {
                lower: lambda_k,
                upper: lambda_k1,
            });
        }
        if !(eps >= 0.0) {
            return Err(Error::Domain {
                value: eps,
                domain: "eps >= 0",
            });
        }
        Ok(Self {
            lambda_k,
            lambda_k1,
            eps,
            k,
        })
    }

    /// Exact endpoints read off an eigendecomposition (1-based `k`).
    pub fn from_eigen(eig: &EigenDecomposition, k: usize) -> Result<Self> {
        if k == 0 || k >= eig.dim() {
            return Err(Error::InvalidIndex {
                k,
                max: eig.dim().saturating_sub(1),
            });
        }
        Self::new(eig.lambda(k), eig.lambda(k + 1), 0.0, k)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lambda_k + self.lambda_k1)
    }

    pub fn half_gap(&self) -> f64 {
        0.5 * (self.lambda_k1 - self.lambda_k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateStatus {
    FreshMidpoint,
    Reused,
    Rejected,
}

/// Margin bookkeeping for a candidate shift: the estimated margin
/// `m̂ = min(s − λ̂_k, λ̂_{k+1} − s)` and the certified lower bound on the
/// true margin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftCertificate {
    pub shift: f64,
    pub estimated_margin: f64,
    pub certified_margin: f64,
    pub status: CertificateStatus,
}

impl ShiftCertificate {
    pub fn is_admissible(&self) -> bool {
        self.status != CertificateStatus::Rejected
    }
}

/// Midpoint of the gap and its half width, the unique maximizer of the
/// distance to the nearer endpoint.
pub fn midpoint_shift(lambda_k: f64, lambda_k1: f64) -> Result<(f64, f64)> {
    if !(lambda_k < lambda_k1) {
        return Err(Error::GapClosed {
            lower: lambda_k,
            upper: lambda_k1,
        });
    }
    Ok((0.5 * (lambda_k + lambda_k1), 0.5 * (lambda_k1 - lambda_k)))
}

/// Distance from `shift` to the nearer of two endpoints (negative outside).
pub fn margin(lambda_k: f64, lambda_k1: f64, shift: f64) -> f64 {
    (shift - lambda_k).min(lambda_k1 - shift)
}

/// Certifies `shift` against estimated endpoints: if `m̂ > ε` the true
/// margin is at least `m̂ − ε`.
pub fn certify(gap: &GapEstimate, shift: f64) -> ShiftCertificate {
    let estimated_margin = margin(gap.lambda_k, gap.lambda_k1, shift);
    let certified_margin = estimated_margin - gap.eps;
    let status = if certified_margin > 0.0 {
        CertificateStatus::FreshMidpoint
    } else {
        CertificateStatus::Rejected
    };
    ShiftCertificate {
        shift,
        estimated_margin,
        certified_margin,
        status,
    }
}

/// Carries a certificate across a Hessian update whose eigenvalues moved by
/// at most `drift_bound`.
pub fn reuse_margin(cert: &ShiftCertificate, drift_bound: f64) -> ShiftCertificate {
    let certified_margin = cert.certified_margin - drift_bound;
    let status = if cert.status != CertificateStatus::Rejected && certified_margin > 0.0 {
        CertificateStatus::Reused
    } else {
        CertificateStatus::Rejected
    };
    ShiftCertificate {
        certified_margin,
        status,
        ..*cert
    }
}

/// `‖H_next − H_prev‖₂`, which bounds every eigenvalue displacement.
pub fn weyl_drift_bound(h_prev: &SymmetricMatrix, h_next: &SymmetricMatrix) -> Result<f64> {
    h_next.sub(h_prev)?.two_norm()
}

/// Blends the previous shift with the new estimated midpoint and clips into
/// `[λ̂_k + ε, λ̂_{k+1} − ε]`. Returns `None` when that interval is empty.
pub fn damped_midpoint(prev_shift: f64, gap: &GapEstimate, blend: f64) -> Option<f64> {
    let lo = gap.lambda_k + gap.eps;
    let hi = gap.lambda_k1 - gap.eps;
    if lo > hi {
        return None;
    }
    let s = (1.0 - blend) * prev_shift + blend * gap.midpoint();
    Some(s.clamp(lo, hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScalingPolicy {
    /// `α = ‖H − sI‖₂⁻¹`.
    SpectralInverse,
    /// `α = ‖H − sI‖_∞⁻¹`.
    InfInverse,
}

impl ScalingPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            ScalingPolicy::SpectralInverse => "spectral_inverse",
            ScalingPolicy::InfInverse => "inf_inverse",
        }
    }
}

impl std::str::FromStr for ScalingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral_inverse" | "spectral" => Ok(Self::SpectralInverse),
            "inf_inverse" | "inf" => Ok(Self::InfInverse),
            other => Err(Error::InvalidConfig(format!("unknown scaling policy '{other}'"))),
        }
    }
}

/// Scaling `α` for `H − sI` under `policy`.
pub fn make_scaling(h: &SymmetricMatrix, shift: f64, policy: ScalingPolicy) -> Result<f64> {
    let shifted = h.add_identity(-shift);
    let norm = match policy {
        ScalingPolicy::SpectralInverse => eigh(&shifted)?.spectral_radius(),
        ScalingPolicy::InfInverse => shifted.inf_norm(),
    };
    inverse_norm(norm)
}

/// [`make_scaling`] reusing an eigendecomposition of `h` for the spectral
/// norm.
pub fn make_scaling_with_eigen(
    h: &SymmetricMatrix,
    eig: &EigenDecomposition,
    shift: f64,
    policy: ScalingPolicy,
) -> Result<f64> {
    let norm = match policy {
        ScalingPolicy::SpectralInverse => eig
            .eigenvalues
            .iter()
            .fold(0.0_f64, |m, &l| m.max((l - shift).abs())),
        ScalingPolicy::InfInverse => h.add_identity(-shift).inf_norm(),
    };
    inverse_norm(norm)
}

fn inverse_norm(norm: f64) -> Result<f64> {
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Degenerate(format!(
            "cannot scale H - sI with norm {norm}"
        )));
    }
    Ok(1.0 / norm)
}

/// Scaled margin `γ = α·min_i |λ_i − s|`.
pub fn scaled_margin(eigenvalues: &[f64], shift: f64, alpha: f64) -> f64 {
    alpha
        * eigenvalues
            .iter()
            .fold(f64::INFINITY, |m, &l| m.min((l - shift).abs()))
}
