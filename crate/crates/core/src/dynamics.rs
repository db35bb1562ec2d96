//! The shifted-sign reflector iteration `x_{n+1} = x_n − ηR̃_n∇E(x_n)` and its
//! comparators: exact reflector, raw sign, tracked-subspace baseline and
//! plain gradient descent.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array1, Array2};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::problems::EnergyModel;
use crate::reflector::{exact_reflector_from, morse_index, spectral_sign_error};
use crate::sampling::{rng, Rng};
use crate::shifts::{
    certify, damped_midpoint, make_scaling_with_eigen, margin, reuse_margin, scaled_margin,
    weyl_drift_bound, CertificateStatus, GapEstimate, ScalingPolicy, ShiftCertificate,
    DEFAULT_BLEND, DEFAULT_REFRESH_FRACTION,
};
use crate::sign_engine::{exact_sign_from, ns_matrix_sign, OddFilter};
use crate::symlin::{eigh, EigenDecomposition, SymmetricMatrix};

/// Orthogonality loss that triggers a second Gram–Schmidt pass.
pub const REORTH_TOL: f64 = 1e-8;

/// Which reflector the outer iteration applies to the gradient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Realization {
    Exact,
    NewtonSchulz(usize),
    RawSign,
    Tracked,
    GradientDescent,
}

impl fmt::Display for Realization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Realization::Exact => write!(f, "exact"),
            Realization::NewtonSchulz(m) => write!(f, "ns{m}"),
            Realization::RawSign => write!(f, "raw_sign"),
            Realization::Tracked => write!(f, "tracked"),
            Realization::GradientDescent => write!(f, "gradient_descent"),
        }
    }
}

impl FromStr for Realization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "raw_sign" => Ok(Self::RawSign),
            "tracked" => Ok(Self::Tracked),
            "gradient_descent" | "gd" => Ok(Self::GradientDescent),
            other => other
                .strip_prefix("ns")
                .and_then(|m| m.parse().ok())
                .map(Self::NewtonSchulz)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown realization '{other}'"))),
        }
    }
}

impl Realization {
    /// Whether the realization needs a target gap `(λ_k, λ_{k+1})`.
    pub fn index_selective(&self) -> bool {
        matches!(
            self,
            Realization::Exact | Realization::NewtonSchulz(_) | Realization::Tracked
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShiftPolicy {
    Midpoint,
    DampedMidpoint,
    ReuseRefresh,
}

impl FromStr for ShiftPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(Self::Midpoint),
            "damped_midpoint" => Ok(Self::DampedMidpoint),
            "reuse_refresh" => Ok(Self::ReuseRefresh),
            other => Err(Error::InvalidConfig(format!("unknown shift policy '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationConfig {
    pub target_index: usize,
    pub eta: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub shift_policy: ShiftPolicy,
    pub scaling: ScalingPolicy,
    pub realization: Realization,
    /// Step `τ_trk` of the projected Rayleigh frame update.
    pub tracking_step: f64,
    /// Endpoint estimates are the true endpoints plus uniform noise in
    /// `[-estimate_eps, estimate_eps]`.
    pub estimate_eps: f64,
    pub blend: f64,
    /// Reuse/refresh threshold as a fraction of the estimated half gap.
    pub refresh_fraction: f64,
    pub seed: u64,
    /// Compute spectral diagnostics even for realizations that do not need
    /// an eigendecomposition (tracked, gradient descent).
    pub diagnostics: bool,
    /// Gradient norm beyond which the run is declared divergent.
    pub divergence_limit: f64,
    /// Keep the iterate of every row in [`TrajectoryRecord::states`].
    pub record_states: bool,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            target_index: 1,
            eta: 0.1,
            max_iters: 1000,
            grad_tol: 1e-8,
            shift_policy: ShiftPolicy::Midpoint,
            scaling: ScalingPolicy::SpectralInverse,
            realization: Realization::Exact,
            tracking_step: 0.1,
            estimate_eps: 0.0,
            blend: DEFAULT_BLEND,
            refresh_fraction: DEFAULT_REFRESH_FRACTION,
            seed: 0,
            diagnostics: false,
            divergence_limit: 1e12,
            record_states: false,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.grad_tol > 0.0) {
            return bad(format!("grad_tol must be positive, got {}", self.grad_tol));
        }
        if self.realization.index_selective()
            && (self.target_index == 0 || self.target_index >= dim)
        {
            return Err(Error::InvalidIndex {
                k: self.target_index,
                max: dim.saturating_sub(1),
            });
        }
        if !(self.estimate_eps >= 0.0) {
            return bad(format!("estimate_eps must be >= 0, got {}", self.estimate_eps));
        }
        if !(0.0..=1.0).contains(&self.blend) {
            return bad(format!("blend must lie in [0, 1], got {}", self.blend));
        }
        if !(self.tracking_step >= 0.0) {
            return bad(format!("tracking_step must be >= 0, got {}", self.tracking_step));
        }
        Ok(())
    }
}

/// One outer iteration. Spectral fields are `None` when the realization does
/// not compute them.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub iter: usize,
    pub grad_norm: f64,
    pub energy: f64,
    pub shift: Option<f64>,
    pub certified_margin: Option<f64>,
    /// Margin of the shift against the true endpoints at this iterate.
    pub true_margin: Option<f64>,
    pub gamma: Option<f64>,
    pub operator_error: Option<f64>,
    pub reused: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Converged,
    MaxIters,
    ShiftRejected,
    Aborted,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::MaxIters => "max_iters",
            Status::ShiftRejected => "shift_rejected",
            Status::Aborted => "aborted",
        })
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub rows: Vec<TrajectoryRow>,
    pub status: Status,
    pub reason: Option<String>,
    pub final_x: Array1<f64>,
    pub final_grad_norm: f64,
    pub final_morse_index: Option<usize>,
    /// Iterate of each row, empty unless states were recorded.
    pub states: Vec<Array1<f64>>,
}

impl TrajectoryRecord {
    pub fn iterations(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    /// Converged to a critical point whose Morse index equals `k`.
    pub fn succeeded(&self, k: usize) -> bool {
        self.status == Status::Converged && self.final_morse_index == Some(k)
    }
}

/// Orthonormal `d × k` frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    columns: Array2<f64>,
}

impl Frame {
    pub fn new(columns: Array2<f64>) -> Result<Self> {
        let f = Self { columns };
        if f.orthonormality_defect() > REORTH_TOL {
            return Err(Error::Degenerate(format!(
                "frame columns are not orthonormal (defect {:e})",
                f.orthonormality_defect()
            )));
        }
        Ok(f)
    }

    /// Bottom-`k` eigenvectors.
    pub fn from_eigen(eig: &EigenDecomposition, k: usize) -> Result<Self> {
        if k == 0 || k > eig.dim() {
            return Err(Error::InvalidIndex { k, max: eig.dim() });
        }
        Self::new(eig.vectors.slice(s![.., ..k]).to_owned())
    }

    pub fn columns(&self) -> &Array2<f64> {
        &self.columns
    }

    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.columns.t().dot(&self.columns);
        gram.indexed_iter().fold(0.0, |m, ((i, j), v)| {
            m.max((v - if i == j { 1.0 } else { 0.0 }).abs())
        })
    }
}

/// QR-type retraction: modified Gram–Schmidt, a second pass when the loss
/// of orthogonality exceeds [`REORTH_TOL`], then each column's
/// largest-magnitude entry made positive.
fn retract(mut a: Array2<f64>) -> Result<Array2<f64>> {
    let gram_schmidt = |a: &mut Array2<f64>| -> Result<()> {
        for j in 0..a.ncols() {
            for i in 0..j {
                let proj = a.column(i).dot(&a.column(j));
                let qi = a.column(i).to_owned();
                a.column_mut(j).scaled_add(-proj, &qi);
            }
            let norm = a.column(j).dot(&a.column(j)).sqrt();
            if !(norm > 1e-12) {
                return Err(Error::RankDeficient { column: j });
            }
            a.column_mut(j).mapv_inplace(|v| v / norm);
        }
        Ok(())
    };
    gram_schmidt(&mut a)?;
    let defect = Frame { columns: a.clone() }.orthonormality_defect();
    if defect > REORTH_TOL {
        gram_schmidt(&mut a)?;
    }
    for mut col in a.columns_mut() {
        let pivot = col
            .iter()
            .copied()
            .fold(0.0_f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if pivot < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
    Ok(a)
}

/// Projected Rayleigh step `Q̂ = Q − τ(I − QQᵀ)HQ` followed by retraction.
pub fn tracked_frame_update(q: &Frame, h: &SymmetricMatrix, tau: f64) -> Result<Frame> {
    let cols = &q.columns;
    if cols.nrows() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: cols.nrows(),
        });
    }
    let hq = h.as_array().dot(cols);
    let projected = &hq - &cols.dot(&cols.t().dot(&hq));
    let stepped = cols - &(projected * tau);
    Ok(Frame {
        columns: retract(stepped)?,
    })
}

/// `I − 2QQᵀ`.
pub fn tracked_reflector(q: &Frame) -> SymmetricMatrix {
    let cols = &q.columns;
    let mut r = cols.dot(&cols.t());
    r.mapv_inplace(|v| -2.0 * v);
    r.diag_mut().mapv_inplace(|v| v + 1.0);
    SymmetricMatrix::new(r).expect("finite frame gives finite reflector")
}

fn norm(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

/// Per-run mutable state of the shift policies.
struct ShiftState {
    prev_cert: Option<ShiftCertificate>,
    prev_hessian: Option<SymmetricMatrix>,
}

/// What one step of a realization produced.
struct Step {
    reflector: Option<SymmetricMatrix>,
    shift: Option<f64>,
    certified_margin: Option<f64>,
    true_margin: Option<f64>,
    gamma: Option<f64>,
    operator_error: Option<f64>,
    reused: bool,
}

impl Step {
    fn bare(reflector: Option<SymmetricMatrix>) -> Self {
        Self {
            reflector,
            shift: None,
            certified_margin: None,
            true_margin: None,
            gamma: None,
            operator_error: None,
            reused: false,
        }
    }
}

enum StepOutcome {
    Step(Step),
    Stop(Status, String),
}

struct Runner<'a> {
    config: &'a IterationConfig,
    rng: Rng,
    shifts: ShiftState,
    frame: Option<Frame>,
}

impl Runner<'_> {
    fn estimate_gap(&mut self, eig: &EigenDecomposition) -> Option<GapEstimate> {
        let k = self.config.target_index;
        let eps = self.config.estimate_eps;
        let (nk, nk1) = if eps > 0.0 {
            (
                self.rng.random_range(-1.0..=1.0),
                self.rng.random_range(-1.0..=1.0),
            )
        } else {
            (0.0, 0.0)
        };
        GapEstimate::new(eig.lambda(k) + eps * nk, eig.lambda(k + 1) + eps * nk1, eps, k).ok()
    }

    fn choose_shift(
        &mut self,
        h: &SymmetricMatrix,
        gap: &GapEstimate,
    ) -> Result<Option<ShiftCertificate>> {
        let fresh = || {
            let c = certify(gap, gap.midpoint());
            c.is_admissible().then_some(c)
        };
        let chosen = match self.config.shift_policy {
            ShiftPolicy::Midpoint => fresh(),
            ShiftPolicy::DampedMidpoint => match self.shifts.prev_cert {
                Some(prev) => damped_midpoint(prev.shift, gap, self.config.blend)
                    .map(|s| certify(gap, s))
                    .filter(ShiftCertificate::is_admissible)
                    .or_else(fresh),
                None => fresh(),
            },
            ShiftPolicy::ReuseRefresh => {
                let reused = match (&self.shifts.prev_cert, &self.shifts.prev_hessian) {
                    (Some(prev), Some(prev_h)) => {
                        let drift = weyl_drift_bound(prev_h, h)?;
                        let r = reuse_margin(prev, drift);
                        let threshold = self.config.refresh_fraction * gap.half_gap();
                        (r.status == CertificateStatus::Reused && r.certified_margin >= threshold)
                            .then_some(r)
                    }
                    _ => None,
                };
                reused.or_else(fresh)
            }
        };
        self.shifts.prev_cert = chosen;
        self.shifts.prev_hessian = Some(h.clone());
        Ok(chosen)
    }

    fn step(&mut self, h: &SymmetricMatrix) -> Result<StepOutcome> {
        let k = self.config.target_index;
        let realization = self.config.realization;
        let needs_eigen = match realization {
            Realization::GradientDescent => self.config.diagnostics,
            Realization::Tracked => self.config.diagnostics || self.frame.is_none(),
            _ => true,
        };
        let eig = if needs_eigen { Some(eigh(h)?) } else { None };

        let step = match realization {
            Realization::GradientDescent => Step::bare(None),
            Realization::RawSign => {
                let eig = eig.as_ref().expect("eigendecomposition computed");
                match exact_sign_from(eig) {
                    Ok(r) => Step::bare(Some(r)),
                    Err(e) => return Ok(StepOutcome::Stop(Status::Aborted, e.to_string())),
                }
            }
            Realization::Exact => {
                let eig = eig.as_ref().expect("eigendecomposition computed");
                let r = match exact_reflector_from(eig, k) {
                    Ok(r) => r,
                    Err(e) => return Ok(StepOutcome::Stop(Status::ShiftRejected, e.to_string())),
                };
                let (lk, lk1) = (eig.lambda(k), eig.lambda(k + 1));
                let s = 0.5 * (lk + lk1);
                let alpha = make_scaling_with_eigen(h, eig, s, self.config.scaling)?;
                Step {
                    reflector: Some(r),
                    shift: Some(s),
                    certified_margin: Some(margin(lk, lk1, s)),
                    true_margin: Some(margin(lk, lk1, s)),
                    gamma: Some(scaled_margin(eig.eigenvalues.as_slice().unwrap(), s, alpha)),
                    operator_error: Some(0.0),
                    reused: false,
                }
            }
            Realization::NewtonSchulz(depth) => {
                let eig = eig.as_ref().expect("eigendecomposition computed");
                let Some(gap) = self.estimate_gap(eig) else {
                    return Ok(StepOutcome::Stop(
                        Status::ShiftRejected,
                        "estimated gap endpoints out of order".into(),
                    ));
                };
                let Some(cert) = self.choose_shift(h, &gap)? else {
                    return Ok(StepOutcome::Stop(
                        Status::ShiftRejected,
                        format!(
                            "no admissible shift for estimated gap ({}, {}) with eps {}",
                            gap.lambda_k, gap.lambda_k1, gap.eps
                        ),
                    ));
                };
                let s = cert.shift;
                let alpha = match make_scaling_with_eigen(h, eig, s, self.config.scaling) {
                    Ok(a) => a,
                    Err(e) => return Ok(StepOutcome::Stop(Status::Aborted, e.to_string())),
                };
                let r = ns_matrix_sign(&h.add_identity(-s), alpha, depth)?;
                let filter = OddFilter::newton_schulz(depth);
                Step {
                    reflector: Some(r),
                    shift: Some(s),
                    certified_margin: Some(cert.certified_margin),
                    true_margin: Some(margin(eig.lambda(k), eig.lambda(k + 1), s)),
                    gamma: Some(scaled_margin(eig.eigenvalues.as_slice().unwrap(), s, alpha)),
                    operator_error: Some(spectral_sign_error(eig, s, alpha, &filter)),
                    reused: cert.status == CertificateStatus::Reused,
                }
            }
            Realization::Tracked => {
                let current = match self.frame.take() {
                    Some(f) => f,
                    None => Frame::from_eigen(eig.as_ref().expect("computed for init"), k)?,
                };
                let next = match tracked_frame_update(&current, h, self.config.tracking_step) {
                    Ok(f) => f,
                    Err(e) => return Ok(StepOutcome::Stop(Status::Aborted, e.to_string())),
                };
                let r = tracked_reflector(&next);
                self.frame = Some(next);
                let mut step = Step::bare(Some(r));
                if let (true, Some(eig)) = (self.config.diagnostics, eig.as_ref()) {
                    if let Ok(exact) = exact_reflector_from(eig, k) {
                        let diff = step.reflector.as_ref().unwrap().sub(&exact)?;
                        step.operator_error = Some(diff.two_norm()?);
                    }
                }
                step
            }
        };
        Ok(StepOutcome::Step(step))
    }
}

/// Runs the outer iteration from `x0` until the gradient tolerance, the
/// iteration budget, or a rejected shift stops it.
pub fn run(
    problem: &dyn EnergyModel,
    config: &IterationConfig,
    x0: &Array1<f64>,
) -> Result<TrajectoryRecord> {
    if x0.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: x0.len(),
        });
    }
    config.validate(problem.dim())?;

    let mut runner = Runner {
        config,
        rng: rng(config.seed),
        shifts: ShiftState {
            prev_cert: None,
            prev_hessian: None,
        },
        frame: None,
    };
    let mut x = x0.clone();
    let mut rows = Vec::new();
    let mut states = Vec::new();
    let (status, reason) = loop {
        let iter = rows.len();
        let g = problem.gradient(&x);
        let energy = problem.energy(&x);
        let grad_norm = norm(&g);
        let mut row = TrajectoryRow {
            iter,
            grad_norm,
            energy,
            shift: None,
            certified_margin: None,
            true_margin: None,
            gamma: None,
            operator_error: None,
            reused: false,
        };
        if config.record_states {
            states.push(x.clone());
        }
        if !(grad_norm.is_finite() && energy.is_finite()) {
            rows.push(row);
            break (Status::Aborted, Some("non-finite energy or gradient".to_string()));
        }
        if grad_norm <= config.grad_tol {
            rows.push(row);
            break (Status::Converged, None);
        }
        if iter == config.max_iters {
            rows.push(row);
            break (Status::MaxIters, None);
        }
        if grad_norm > config.divergence_limit {
            rows.push(row);
            break (Status::Aborted, Some(format!("diverged: gradient norm {grad_norm:e}")));
        }
        let h = problem.hessian(&x);
        let step = match runner.step(&h) {
            Ok(StepOutcome::Step(step)) => step,
            Ok(StepOutcome::Stop(status, why)) => {
                rows.push(row);
                break (status, Some(why));
            }
            Err(e) => {
                rows.push(row);
                break (Status::Aborted, Some(e.to_string()));
            }
        };
        let direction = match &step.reflector {
            Some(r) => r.as_array().dot(&g),
            None => g,
        };
        x.scaled_add(-config.eta, &direction);
        row.shift = step.shift;
        row.certified_margin = step.certified_margin;
        row.true_margin = step.true_margin;
        row.gamma = step.gamma;
        row.operator_error = step.operator_error;
        row.reused = step.reused;
        rows.push(row);
    };

    let final_grad_norm = rows.last().map_or(f64::NAN, |r| r.grad_norm);
    let final_morse_index = if x.iter().all(|v| v.is_finite()) {
        eigh(&problem.hessian(&x)).ok().map(|e| morse_index(&e))
    } else {
        None
    };
    Ok(TrajectoryRecord {
        rows,
        status,
        reason,
        final_x: x,
        final_grad_norm,
        final_morse_index,
        states,
    })
}

/// One-step direction error of a realization against the exact reflector.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub realization: Realization,
    /// `‖d̃ − d‖ / ‖d‖`, `None` when skipped.
    pub relative_error: Option<f64>,
    pub skipped: Option<String>,
}

/// Compares each realization's one-step direction `R̃∇E(x)` with the exact
/// reflector direction at `x`. Shifts are fresh midpoints of the true gap;
/// the tracked realization starts from the exact bottom-`k` frame and takes
/// one frame update.
pub fn direction_error_probe(
    problem: &dyn EnergyModel,
    x: &Array1<f64>,
    k: usize,
    realizations: &[Realization],
    scaling: ScalingPolicy,
    tracking_step: f64,
) -> Result<Vec<ProbeRow>> {
    let g = problem.gradient(x);
    let h = problem.hessian(x);
    let eig = eigh(&h)?;
    let skip_all = |why: String| {
        realizations
            .iter()
            .map(|&realization| ProbeRow {
                realization,
                relative_error: None,
                skipped: Some(why.clone()),
            })
            .collect()
    };
    let exact = match exact_reflector_from(&eig, k) {
        Ok(r) => r,
        Err(e) => return Ok(skip_all(e.to_string())),
    };
    let d = exact.as_array().dot(&g);
    let d_norm = norm(&d);
    if d_norm == 0.0 {
        return Ok(skip_all("zero gradient".into()));
    }
    let s = 0.5 * (eig.lambda(k) + eig.lambda(k + 1));

    let mut rows = Vec::with_capacity(realizations.len());
    for &realization in realizations {
        let reflector: Result<Option<SymmetricMatrix>> = match realization {
            Realization::Exact => Ok(Some(exact.clone())),
            Realization::NewtonSchulz(m) => make_scaling_with_eigen(&h, &eig, s, scaling)
                .and_then(|alpha| ns_matrix_sign(&h.add_identity(-s), alpha, m))
                .map(Some),
            Realization::RawSign => exact_sign_from(&eig).map(Some),
            Realization::Tracked => Frame::from_eigen(&eig, k)
                .and_then(|f| tracked_frame_update(&f, &h, tracking_step))
                .map(|f| Some(tracked_reflector(&f))),
            Realization::GradientDescent => Ok(None),
        };
        rows.push(match reflector {
            Ok(r) => {
                let dt = match r {
                    Some(r) => r.as_array().dot(&g),
                    None => g.clone(),
                };
                ProbeRow {
                    realization,
                    relative_error: Some(norm(&(&dt - &d)) / d_norm),
                    skipped: None,
                }
            }
            Err(e) => ProbeRow {
                realization,
                relative_error: None,
                skipped: Some(e.to_string()),
            },
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{rotated_quartic, Quadratic, RotatedQuartic};
    use crate::reflector::exact_reflector;

    fn diag(v: &[f64]) -> SymmetricMatrix {
        SymmetricMatrix::from_diag(v).unwrap()
    }

    #[test]
    fn realization_names_round_trip() {
        for r in [
            Realization::Exact,
            Realization::NewtonSchulz(4),
            Realization::RawSign,
            Realization::Tracked,
            Realization::GradientDescent,
        ] {
            assert_eq!(r.to_string().parse::<Realization>().unwrap(), r);
        }
        assert!("nsx".parse::<Realization>().is_err());
    }

    #[test]
    fn gradient_descent_on_quadratic() {
        let model = Quadratic::new(diag(&[1.0, 2.0]));
        let config = IterationConfig {
            realization: Realization::GradientDescent,
            eta: 0.1,
            max_iters: 2000,
            ..Default::default()
        };
        let rec = run(&model, &config, &Array1::from(vec![1.0, 1.0])).unwrap();
        assert_eq!(rec.status, Status::Converged);
        assert!(rec.rows.windows(2).all(|w| w[1].grad_norm < w[0].grad_norm));
        assert!(norm(&rec.final_x) < 1e-7);
        // closed form: x_n = ((0.9)^n, (0.8)^n)
        let n = rec.iterations() as i32;
        assert!((rec.final_x[0] - 0.9_f64.powi(n)).abs() < 1e-14);
        assert!((rec.final_x[1] - 0.8_f64.powi(n)).abs() < 1e-14);
    }

    #[test]
    fn exact_reflector_converges_to_matched_saddle() {
        let model = RotatedQuartic::with_curvatures(vec![-1.0, 1.5, 2.0], 3).unwrap();
        let config = IterationConfig {
            realization: Realization::Exact,
            target_index: 1,
            eta: 0.4,
            max_iters: 500,
            ..Default::default()
        };
        let x0 = Array1::from(vec![0.05, -0.04, 0.03]);
        let rec = run(&model, &config, &x0).unwrap();
        assert_eq!(rec.status, Status::Converged);
        assert!(norm(&rec.final_x) < 1e-7);
        assert_eq!(rec.final_morse_index, Some(1));
    }

    #[test]
    fn raw_sign_converges_near_any_critical_point() {
        let model = RotatedQuartic::with_curvatures(vec![-1.0, -2.0, 1.5], 5).unwrap();
        // critical point at y = (1, 0, 0): a different-index point
        let star = model.rotation().column(0).to_owned();
        let x0 = &star + &Array1::from(vec![0.02, -0.01, 0.015]);
        let config = IterationConfig {
            realization: Realization::RawSign,
            eta: 0.3,
            max_iters: 500,
            ..Default::default()
        };
        let rec = run(&model, &config, &x0).unwrap();
        assert_eq!(rec.status, Status::Converged);
        assert!(norm(&(&rec.final_x - &star)) < 1e-7);
    }

    #[test]
    fn frame_update_examples() {
        let h = diag(&[-1.0, 2.0]);
        let eig = eigh(&h).unwrap();
        let exact = Frame::from_eigen(&eig, 1).unwrap();
        let moved = tracked_frame_update(&exact, &h, 0.3).unwrap();
        let proj = |f: &Frame| f.columns().dot(&f.columns().t());
        assert!((proj(&moved) - proj(&exact)).iter().all(|v| v.abs() < 1e-14));

        let mut q = Frame::new(Array2::from_shape_vec((2, 1), vec![0.0, 1.0]).unwrap()).unwrap();
        let same = tracked_frame_update(&q, &h, 0.0).unwrap();
        assert_eq!(same, q);

        // e2 is a fixed point of the exact projected flow; perturb slightly
        q = Frame::new(Array2::from_shape_vec((2, 1), vec![1e-3, (1.0 - 1e-6_f64).sqrt()]).unwrap())
            .unwrap();
        for _ in 0..200 {
            q = tracked_frame_update(&q, &h, 0.1).unwrap();
            assert!(q.orthonormality_defect() <= 1e-8);
        }
        assert!(q.columns()[[0, 0]].abs() > 0.999);
    }

    #[test]
    fn tracked_reflector_examples() {
        let e1 = Frame::new(Array2::from_shape_vec((2, 1), vec![1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(tracked_reflector(&e1), diag(&[-1.0, 1.0]));

        let h = crate::sampling::random_symmetric(7, 12);
        let eig = eigh(&h).unwrap();
        for k in 1..7 {
            let r = tracked_reflector(&Frame::from_eigen(&eig, k).unwrap());
            assert!(r.max_abs_diff(&exact_reflector(&h, k).unwrap()) <= 1e-8);
            assert!((r.trace() - (7.0 - 2.0 * k as f64)).abs() < 1e-6);
        }
    }

    #[test]
    fn tracked_matches_exact_with_frozen_exact_frame() {
        let a = crate::sampling::matrix_with_spectrum(
            &[-2.0, -0.5, 1.0, 3.0],
            &mut crate::sampling::rng(3),
        );
        let model = Quadratic::new(a);
        let x0 = Array1::from(vec![0.3, -0.2, 0.1, 0.4]);
        let base = IterationConfig {
            target_index: 2,
            eta: 0.2,
            max_iters: 60,
            tracking_step: 0.0,
            ..Default::default()
        };
        let exact = run(&model, &IterationConfig { realization: Realization::Exact, ..base.clone() }, &x0).unwrap();
        let tracked = run(&model, &IterationConfig { realization: Realization::Tracked, ..base }, &x0).unwrap();
        assert_eq!(exact.rows.len(), tracked.rows.len());
        for (a, b) in exact.rows.iter().zip(&tracked.rows) {
            assert!((a.grad_norm - b.grad_norm).abs() <= 1e-12);
        }
        assert!((&exact.final_x - &tracked.final_x).iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn probe_examples() {
        let model = rotated_quartic(2, 6, 8).unwrap();
        let x = crate::sampling::gaussian_vector(6, &mut crate::sampling::rng(1)) * 0.1;
        let rows = direction_error_probe(
            &model,
            &x,
            2,
            &[Realization::Exact, Realization::NewtonSchulz(40), Realization::RawSign],
            ScalingPolicy::SpectralInverse,
            0.1,
        )
        .unwrap();
        assert_eq!(rows[0].relative_error, Some(0.0));
        assert!(rows[1].relative_error.unwrap() <= 1e-6);
        assert!(rows[2].relative_error.unwrap() <= 2.0 + 1e-12);

        let closed = direction_error_probe(
            &model,
            &Array1::zeros(6),
            3,
            &[Realization::Exact],
            ScalingPolicy::SpectralInverse,
            0.1,
        )
        .unwrap();
        assert!(closed[0].skipped.is_some());
    }

    #[test]
    fn invalid_config_rejected() {
        let model = rotated_quartic(1, 3, 0).unwrap();
        let bad = IterationConfig { eta: -1.0, ..Default::default() };
        assert!(run(&model, &bad, &Array1::zeros(3)).is_err());
        let bad = IterationConfig { target_index: 3, ..Default::default() };
        assert!(run(&model, &bad, &Array1::zeros(3)).is_err());
        assert!(run(&model, &IterationConfig::default(), &Array1::zeros(2)).is_err());
    }
}
