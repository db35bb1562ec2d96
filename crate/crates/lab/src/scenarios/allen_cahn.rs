//! Stiff semidiscrete Allen–Cahn test: gradient-norm histories from a
//! perturbed zero state and one-step direction errors near it.

use rayon::prelude::*;
use shiftsign::dynamics::{direction_error_probe, run as run_dynamics, IterationConfig, Realization, TrajectoryRecord};
use shiftsign::problems::{allen_cahn_1d, AllenCahn1d, EnergyModel};
use shiftsign::reflector::morse_index;
use shiftsign::sampling::{cell_rng, gaussian_vector};
use shiftsign::shifts::ScalingPolicy;
use shiftsign::eigh;

use super::{median, Check, ScenarioOutput};
use crate::config::{ensure, Reader};
use crate::csv::{Cell, CsvReport};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct AllenCahnConfig {
    pub epsilon: f64,
    pub n: usize,
    pub realizations: Vec<Realization>,
    pub eta: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Size of the seeded perturbation of the zero state used as start.
    pub start_amplitude: f64,
    pub perturbations: usize,
    pub probe_amplitude: f64,
    /// Keep every `history_stride`-th iteration (and the last) in the CSV.
    pub history_stride: usize,
    pub scaling: ScalingPolicy,
    pub tracking_step: f64,
    pub seed: u64,
}

impl Default for AllenCahnConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.4,
            n: 41,
            realizations: vec![
                Realization::GradientDescent,
                Realization::Exact,
                Realization::Tracked,
                Realization::RawSign,
                Realization::NewtonSchulz(2),
                Realization::NewtonSchulz(4),
                Realization::NewtonSchulz(6),
            ],
            eta: 1.9e-3,
            max_iters: 15_000,
            grad_tol: 1e-8,
            start_amplitude: 1e-3,
            perturbations: 32,
            probe_amplitude: 1e-3,
            history_stride: 10,
            scaling: ScalingPolicy::SpectralInverse,
            tracking_step: 1e-3,
            seed: 0,
        }
    }
}

impl AllenCahnConfig {
    pub(crate) fn read(r: &mut Reader) -> Result<Self> {
        let d = Self::default();
        let c = Self {
            epsilon: r.get("epsilon", d.epsilon)?,
            n: r.get("n", d.n)?,
            realizations: r.list("realizations", d.realizations)?,
            eta: r.get("eta", d.eta)?,
            max_iters: r.get("max_iters", d.max_iters)?,
            grad_tol: r.get("grad_tol", d.grad_tol)?,
            start_amplitude: r.get("start_amplitude", d.start_amplitude)?,
            perturbations: r.get("perturbations", d.perturbations)?,
            probe_amplitude: r.get("probe_amplitude", d.probe_amplitude)?,
            history_stride: r.get("history_stride", d.history_stride)?,
            scaling: r.get("scaling", d.scaling)?,
            tracking_step: r.get("tracking_step", d.tracking_step)?,
            seed: r.get("seed", d.seed)?,
        };
        ensure(c.history_stride >= 1, "history_stride", c.history_stride, "must be >= 1")?;
        ensure(c.perturbations >= 1, "perturbations", c.perturbations, "must be >= 1")?;
        Ok(c)
    }

    pub fn model(&self) -> Result<AllenCahn1d> {
        Ok(allen_cahn_1d(self.epsilon, self.n)?)
    }

    pub fn iteration_config(&self, realization: Realization) -> IterationConfig {
        IterationConfig {
            target_index: 1,
            eta: self.eta,
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            scaling: self.scaling,
            realization,
            tracking_step: self.tracking_step,
            seed: self.seed,
            ..Default::default()
        }
    }
}

/// Morse index of the zero state.
pub fn zero_state_index(model: &AllenCahn1d) -> Result<usize> {
    let zero = ndarray::Array1::zeros(model.dim());
    Ok(morse_index(&eigh(&model.hessian(&zero))?))
}

pub fn trajectories(c: &AllenCahnConfig) -> Result<Vec<(Realization, TrajectoryRecord)>> {
    let model = c.model()?;
    let z = gaussian_vector(c.n, &mut cell_rng(c.seed, 0));
    let x0 = z * c.start_amplitude;
    c.realizations
        .par_iter()
        .map(|&r| Ok((r, run_dynamics(&model, &c.iteration_config(r), &x0)?)))
        .collect()
}

/// Median one-step direction error per realization over seeded
/// perturbations of the zero state.
pub fn direction_errors(c: &AllenCahnConfig) -> Result<Vec<(Realization, Option<f64>)>> {
    let model = c.model()?;
    let probes: Vec<Vec<Option<f64>>> = (0..c.perturbations)
        .into_par_iter()
        .map(|i| {
            let z = gaussian_vector(c.n, &mut cell_rng(c.seed, 1 + i as u64));
            let at = &z * (c.probe_amplitude / z.dot(&z).sqrt());
            let rows = direction_error_probe(&model, &at, 1, &c.realizations, c.scaling, c.tracking_step)?;
            Ok(rows.into_iter().map(|r| r.relative_error).collect())
        })
        .collect::<Result<_>>()?;
    Ok(c.realizations
        .iter()
        .enumerate()
        .map(|(ri, &r)| {
            let mut errs: Vec<f64> = probes.iter().filter_map(|p| p[ri]).collect();
            (r, median(&mut errs))
        })
        .collect())
}

pub fn run(c: &AllenCahnConfig) -> Result<ScenarioOutput> {
    let model = c.model()?;
    let index = zero_state_index(&model)?;
    let mut checks = vec![Check::new(
        "zero state is an index-1 saddle",
        index == 1,
        format!("Morse index {index}"),
    )];
    let runs = trajectories(c)?;
    let probes = direction_errors(c)?;

    let mut report = CsvReport::new(vec![
        ("kind", "history (per-iteration) or summary (per realization)"),
        ("realization", "reflector realization"),
        ("iter", "iteration number; last iteration on summary rows"),
        ("grad_norm", "Euclidean gradient norm"),
        ("median_direction_error", "summary rows: median one-step ||d~ - d||/||d||"),
        ("status", "summary rows: terminal status"),
    ]);
    for (r, rec) in &runs {
        let last = rec.rows.len() - 1;
        for row in rec.rows.iter().filter(|row| row.iter % c.history_stride == 0 || row.iter == last) {
            report.push(vec![
                "history".into(),
                Cell::Text(r.to_string()),
                row.iter.into(),
                row.grad_norm.into(),
                Cell::Empty,
                Cell::Empty,
            ]);
        }
    }
    for ((r, rec), (_, err)) in runs.iter().zip(&probes) {
        report.push(vec![
            "summary".into(),
            Cell::Text(r.to_string()),
            rec.iterations().into(),
            rec.final_grad_norm.into(),
            (*err).into(),
            Cell::Text(rec.status.to_string()),
        ]);
    }

    for (r, rec) in &runs {
        if matches!(r, Realization::Exact | Realization::NewtonSchulz(6)) {
            checks.push(Check::new(
                format!("{r} run reaches grad_tol at the index-1 saddle"),
                rec.succeeded(1),
                format!(
                    "status {}, final grad {:e} after {} iterations",
                    rec.status,
                    rec.final_grad_norm,
                    rec.iterations()
                ),
            ));
        }
    }
    let err = |m: usize| {
        probes
            .iter()
            .find(|(r, _)| *r == Realization::NewtonSchulz(m))
            .and_then(|(_, e)| *e)
    };
    if let (Some(a), Some(b), Some(c6)) = (err(2), err(4), err(6)) {
        checks.push(Check::new(
            "direction error strictly decreasing over m = 2, 4, 6",
            a > b && b > c6,
            format!("{a:e}, {b:e}, {c6:e}"),
        ));
    }
    Ok(ScenarioOutput { report, checks })
}
