//! Operator error of the shifted filter as the shift moves through the
//! target gap, `s = λ_k + θ(λ_{k+1} − λ_k)`.

use shiftsign::problems::{synthetic_matrix, SyntheticSpectrumSpec};
use shiftsign::reflector::spectral_sign_error;
use shiftsign::shifts::{make_scaling_with_eigen, scaled_margin, ScalingPolicy};
use shiftsign::sign_engine::Depth;
use shiftsign::eigh;

use super::{Check, ScenarioOutput};
use crate::config::{ensure, Reader};
use crate::csv::{Cell, CsvReport};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftScanConfig {
    pub dim: usize,
    pub k: usize,
    /// The gap is `(-half_gap, half_gap)`.
    pub half_gap: f64,
    pub radius: f64,
    /// Number of interior grid points `θ_i = i/(n+1)`; odd counts hit 0.5.
    pub thetas: usize,
    pub depths: Vec<Depth>,
    pub scaling: ScalingPolicy,
    pub seed: u64,
}

impl Default for ShiftScanConfig {
    fn default() -> Self {
        Self {
            dim: 256,
            k: 32,
            half_gap: 0.1,
            radius: 1.0,
            thetas: 101,
            depths: vec![Depth::Exact, Depth::Steps(2), Depth::Steps(4), Depth::Steps(6), Depth::Steps(8)],
            scaling: ScalingPolicy::SpectralInverse,
            seed: 0,
        }
    }
}

impl ShiftScanConfig {
    pub(crate) fn read(r: &mut Reader) -> Result<Self> {
        let d = Self::default();
        let c = Self {
            dim: r.get("dim", d.dim)?,
            k: r.get("k", d.k)?,
            half_gap: r.get("half_gap", d.half_gap)?,
            radius: r.get("radius", d.radius)?,
            thetas: r.get("thetas", d.thetas)?,
            depths: r.list("depths", d.depths)?,
            scaling: r.get("scaling", d.scaling)?,
            seed: r.get("seed", d.seed)?,
        };
        ensure(c.thetas >= 1, "thetas", c.thetas, "need at least one grid point")?;
        ensure(c.half_gap > 0.0, "half_gap", c.half_gap, "must be positive")?;
        Ok(c)
    }

    pub fn theta_grid(&self) -> Vec<f64> {
        let n = self.thetas;
        (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
    }
}

pub fn run(c: &ShiftScanConfig) -> Result<ScenarioOutput> {
    let synth = synthetic_matrix(&SyntheticSpectrumSpec {
        dim: c.dim,
        k: c.k,
        lambda_k: -c.half_gap,
        lambda_k1: c.half_gap,
        radius: c.radius,
        rotation_seed: Some(c.seed),
    })?;
    let h = synth.matrix;
    let eig = eigh(&h)?;
    let (lk, lk1) = (eig.lambda(c.k), eig.lambda(c.k + 1));
    let eigenvalues = eig.eigenvalues.to_vec();

    let mut report = CsvReport::new(vec![
        ("theta", "fractional shift position in the target gap"),
        ("shift", "shift s"),
        ("depth", "Newton-Schulz steps or exact"),
        ("gamma", "scaled margin alpha*min|lambda_i - s|"),
        ("operator_error", "max_i |phi(alpha(lambda_i - s)) - sgn(lambda_i - s)| (2-norm)"),
    ]);
    let thetas = c.theta_grid();
    let cell = 1.0 / (c.thetas + 1) as f64;
    let mut checks = Vec::new();
    for &depth in &c.depths {
        let filter = depth.filter();
        let mut errors = Vec::with_capacity(thetas.len());
        for &theta in &thetas {
            let s = lk + theta * (lk1 - lk);
            let alpha = make_scaling_with_eigen(&h, &eig, s, c.scaling)?;
            let gamma = scaled_margin(&eigenvalues, s, alpha);
            let err = spectral_sign_error(&eig, s, alpha, &filter);
            errors.push(err);
            report.push(vec![
                theta.into(),
                s.into(),
                Cell::Text(depth.to_string()),
                gamma.into(),
                err.into(),
            ]);
        }
        if depth == Depth::Exact {
            let worst = errors.iter().copied().fold(0.0, f64::max);
            checks.push(Check::new(
                "exact depth error <= 1e-9",
                worst <= 1e-9,
                format!("max error {worst:e}"),
            ));
        } else {
            let best = (0..errors.len())
                .min_by(|&a, &b| errors[a].total_cmp(&errors[b]))
                .expect("nonempty grid");
            let theta_star = thetas[best];
            checks.push(Check::new(
                format!("depth {depth}: argmin within one cell of 0.5"),
                (theta_star - 0.5).abs() <= cell + 1e-12,
                format!("argmin theta {theta_star}"),
            ));
        }
    }
    Ok(ScenarioOutput { report, checks })
}
