//! Trajectories on the Müller–Brown surface from common starting points.

use ndarray::Array1;
use rayon::prelude::*;
use shiftsign::dynamics::{run as run_dynamics, IterationConfig, Realization, TrajectoryRecord};
use shiftsign::eigh;
use shiftsign::problems::{muller_brown, EnergyModel};
use shiftsign::reflector::morse_index;
use shiftsign::shifts::ScalingPolicy;

use super::{Check, ScenarioOutput};
use crate::config::{ensure, Reader};
use crate::csv::{Cell, CsvReport};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct MullerConfig {
    pub starts: Vec<[f64; 2]>,
    pub realizations: Vec<Realization>,
    pub eta: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub scaling: ScalingPolicy,
    pub seed: u64,
}

impl Default for MullerConfig {
    fn default() -> Self {
        Self {
            starts: vec![[-0.75, 0.55], [0.15, 0.35], [-0.5, 1.3], [0.55, 0.1]],
            realizations: vec![
                Realization::Exact,
                Realization::NewtonSchulz(6),
                Realization::RawSign,
                Realization::GradientDescent,
            ],
            eta: 2e-4,
            max_iters: 20_000,
            grad_tol: 1e-8,
            scaling: ScalingPolicy::SpectralInverse,
            seed: 0,
        }
    }
}

impl MullerConfig {
    pub(crate) fn read(r: &mut Reader) -> Result<Self> {
        let d = Self::default();
        let c = Self {
            starts: r.points("starts", d.starts)?,
            realizations: r.list("realizations", d.realizations)?,
            eta: r.get("eta", d.eta)?,
            max_iters: r.get("max_iters", d.max_iters)?,
            grad_tol: r.get("grad_tol", d.grad_tol)?,
            scaling: r.get("scaling", d.scaling)?,
            seed: r.get("seed", d.seed)?,
        };
        ensure(c.eta > 0.0, "eta", c.eta, "must be positive")?;
        Ok(c)
    }
}

/// Terminal summary of one `(start, realization)` run.
#[derive(Clone, Debug)]
pub struct MullerRun {
    pub start: usize,
    pub realization: Realization,
    pub record: TrajectoryRecord,
}

pub fn trajectories(c: &MullerConfig) -> Result<Vec<MullerRun>> {
    let model = muller_brown();
    let cells: Vec<(usize, Realization)> = (0..c.starts.len())
        .flat_map(|s| c.realizations.iter().map(move |&r| (s, r)))
        .collect();
    cells
        .par_iter()
        .map(|&(start, realization)| {
            let config = IterationConfig {
                target_index: 1,
                eta: c.eta,
                max_iters: c.max_iters,
                grad_tol: c.grad_tol,
                scaling: c.scaling,
                realization,
                seed: c.seed,
                record_states: true,
                ..Default::default()
            };
            let x0 = Array1::from(c.starts[start].to_vec());
            let record = run_dynamics(&model, &config, &x0)?;
            Ok(MullerRun {
                start,
                realization,
                record,
            })
        })
        .collect()
}

pub fn run(c: &MullerConfig) -> Result<ScenarioOutput> {
    let runs = trajectories(c)?;
    let mut report = CsvReport::new(vec![
        ("start", "index into the start list"),
        ("realization", "reflector realization"),
        ("iter", "iteration number"),
        ("x", "first coordinate"),
        ("y", "second coordinate"),
        ("energy", "Muller-Brown energy"),
        ("grad_norm", "Euclidean gradient norm"),
        ("shift", "shift s (index-selective filters)"),
        ("gamma", "scaled margin"),
        ("status", "terminal status, last row of each run only"),
        ("final_index", "Morse index at the terminal point, last row only"),
    ]);
    for run in &runs {
        let last = run.record.rows.len() - 1;
        for (i, (row, x)) in run.record.rows.iter().zip(&run.record.states).enumerate() {
            let (status, index) = if i == last {
                (
                    Cell::Text(run.record.status.to_string()),
                    run.record.final_morse_index.map_or(Cell::Empty, Cell::from),
                )
            } else {
                (Cell::Empty, Cell::Empty)
            };
            report.push(vec![
                run.start.into(),
                Cell::Text(run.realization.to_string()),
                row.iter.into(),
                x[0].into(),
                x[1].into(),
                row.energy.into(),
                row.grad_norm.into(),
                row.shift.into(),
                row.gamma.into(),
                status,
                index,
            ]);
        }
    }

    let find = |start: usize, r: Realization| {
        runs.iter()
            .find(|x| x.start == start && x.realization == r)
            .map(|x| &x.record)
    };
    let model = muller_brown();
    let mut checks = Vec::new();
    for start in 0..c.starts.len() {
        if let (Some(e), Some(n)) = (
            find(start, Realization::Exact),
            find(start, Realization::NewtonSchulz(6)),
        ) {
            if e.succeeded(1) && n.succeeded(1) {
                let gap = (&e.final_x - &n.final_x).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                checks.push(Check::new(
                    format!("start {start}: exact and ns6 terminal points within 1e-3"),
                    gap <= 1e-3,
                    format!("distance {gap:e}"),
                ));
            }
        }
        let x0 = Array1::from(c.starts[start].to_vec());
        let start_index = morse_index(&eigh(&model.hessian(&x0))?);
        if let (0, Some(raw)) = (start_index, find(start, Realization::RawSign)) {
            checks.push(Check::new(
                format!("start {start}: raw sign from a convex start ends at a minimum"),
                raw.succeeded(0),
                format!("status {}, index {:?}", raw.status, raw.final_morse_index),
            ));
        }
        if let Some(gd) = find(start, Realization::GradientDescent) {
            checks.push(Check::new(
                format!("start {start}: gradient descent does not end at an index-1 point"),
                !(gd.status == shiftsign::dynamics::Status::Converged
                    && gd.final_morse_index == Some(1)),
                format!("status {}, index {:?}", gd.status, gd.final_morse_index),
            ));
        }
    }
    Ok(ScenarioOutput { report, checks })
}
