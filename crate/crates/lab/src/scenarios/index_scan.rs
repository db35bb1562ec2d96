//! Target-index scan on the dense rotated quartic family from matched
//! random starts.

use rayon::prelude::*;
use shiftsign::dynamics::{direction_error_probe, run as run_dynamics, IterationConfig, Realization};
use shiftsign::problems::rotated_quartic;
use shiftsign::sampling::{cell_rng, gaussian_vector};
use shiftsign::shifts::ScalingPolicy;

use super::{median, Check, ScenarioOutput};
use crate::config::{ensure, Reader};
use crate::csv::{Cell, CsvReport};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct IndexScanConfig {
    pub dim: usize,
    pub ks: Vec<usize>,
    pub starts: usize,
    pub realizations: Vec<Realization>,
    pub eta: f64,
    /// Starts are drawn uniformly on the sphere of this radius.
    pub radius: f64,
    /// Direction errors are probed on the sphere of this radius.
    pub probe_radius: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub scaling: ScalingPolicy,
    pub tracking_step: f64,
    pub seed: u64,
}

impl Default for IndexScanConfig {
    fn default() -> Self {
        Self {
            dim: 64,
            ks: vec![1, 2, 4, 8, 16],
            starts: 32,
            realizations: vec![
                Realization::Exact,
                Realization::NewtonSchulz(2),
                Realization::NewtonSchulz(4),
                Realization::NewtonSchulz(6),
                Realization::Tracked,
            ],
            eta: 1.0,
            radius: 1.0,
            probe_radius: 0.1,
            max_iters: 200,
            grad_tol: 1e-8,
            scaling: ScalingPolicy::InfInverse,
            tracking_step: 0.1,
            seed: 0,
        }
    }
}

impl IndexScanConfig {
    pub(crate) fn read(r: &mut Reader) -> Result<Self> {
        let d = Self::default();
        let c = Self {
            dim: r.get("dim", d.dim)?,
            ks: r.list("ks", d.ks)?,
            starts: r.get("starts", d.starts)?,
            realizations: r.list("realizations", d.realizations)?,
            eta: r.get("eta", d.eta)?,
            radius: r.get("radius", d.radius)?,
            probe_radius: r.get("probe_radius", d.probe_radius)?,
            max_iters: r.get("max_iters", d.max_iters)?,
            grad_tol: r.get("grad_tol", d.grad_tol)?,
            scaling: r.get("scaling", d.scaling)?,
            tracking_step: r.get("tracking_step", d.tracking_step)?,
            seed: r.get("seed", d.seed)?,
        };
        ensure(c.starts >= 1, "starts", c.starts, "need at least one start")?;
        for &k in &c.ks {
            ensure(k >= 1 && k < c.dim, "ks", k, "each k must lie in [1, dim-1]")?;
        }
        Ok(c)
    }
}

/// Aggregate over starts for one `(k, realization)` pair.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexScanRow {
    pub k: usize,
    pub realization: Realization,
    pub success_rate: f64,
    pub median_direction_error: Option<f64>,
    pub median_iterations: Option<f64>,
}

struct CellResult {
    k_slot: usize,
    successes: Vec<bool>,
    iterations: Vec<usize>,
    direction_errors: Vec<Option<f64>>,
}

pub fn scan(c: &IndexScanConfig) -> Result<Vec<IndexScanRow>> {
    let cells: Vec<(usize, usize)> = (0..c.ks.len())
        .flat_map(|ki| (0..c.starts).map(move |s| (ki, s)))
        .collect();
    let models = c
        .ks
        .iter()
        .map(|&k| rotated_quartic(k, c.dim, c.seed.wrapping_add(k as u64)))
        .collect::<shiftsign::Result<Vec<_>>>()?;

    let results: Vec<CellResult> = cells
        .par_iter()
        .map(|&(ki, start)| -> Result<CellResult> {
            let k = c.ks[ki];
            let model = &models[ki];
            let mut rng = cell_rng(c.seed, (ki * c.starts + start) as u64);
            let z = gaussian_vector(c.dim, &mut rng);
            let x0 = &z * (c.radius / z.dot(&z).sqrt());
            let w = gaussian_vector(c.dim, &mut rng);
            let probe_at = &w * (c.probe_radius / w.dot(&w).sqrt());

            let probe = direction_error_probe(
                model,
                &probe_at,
                k,
                &c.realizations,
                c.scaling,
                c.tracking_step,
            )?;
            let mut successes = Vec::new();
            let mut iterations = Vec::new();
            for &realization in &c.realizations {
                let config = IterationConfig {
                    target_index: k,
                    eta: c.eta,
                    max_iters: c.max_iters,
                    grad_tol: c.grad_tol,
                    scaling: c.scaling,
                    realization,
                    tracking_step: c.tracking_step,
                    seed: c.seed,
                    ..Default::default()
                };
                let record = run_dynamics(model, &config, &x0)?;
                successes.push(record.succeeded(k));
                iterations.push(record.iterations());
            }
            Ok(CellResult {
                k_slot: ki,
                successes,
                iterations,
                direction_errors: probe.iter().map(|p| p.relative_error).collect(),
            })
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (ki, &k) in c.ks.iter().enumerate() {
        let mine: Vec<&CellResult> = results.iter().filter(|r| r.k_slot == ki).collect();
        for (ri, &realization) in c.realizations.iter().enumerate() {
            let wins = mine.iter().filter(|r| r.successes[ri]).count();
            let mut errs: Vec<f64> = mine.iter().filter_map(|r| r.direction_errors[ri]).collect();
            let mut its: Vec<f64> = mine.iter().map(|r| r.iterations[ri] as f64).collect();
            rows.push(IndexScanRow {
                k,
                realization,
                success_rate: wins as f64 / mine.len() as f64,
                median_direction_error: median(&mut errs),
                median_iterations: median(&mut its),
            });
        }
    }
    Ok(rows)
}

pub fn run(c: &IndexScanConfig) -> Result<ScenarioOutput> {
    let rows = scan(c)?;
    let mut report = CsvReport::new(vec![
        ("k", "prescribed index"),
        ("realization", "reflector realization"),
        ("success_rate", "fraction of starts converged to an index-k critical point"),
        ("median_direction_error", "median one-step ||d~ - d||/||d|| near the saddle"),
        ("median_runtime", "median outer iterations per solve"),
    ]);
    for r in &rows {
        report.push(vec![
            r.k.into(),
            Cell::Text(r.realization.to_string()),
            r.success_rate.into(),
            r.median_direction_error.into(),
            r.median_iterations.into(),
        ]);
    }
    Ok(ScenarioOutput {
        report,
        checks: ordering_checks(&rows, &c.ks),
    })
}

/// Success and direction-error orderings among exact and NS depths 2, 4, 6.
pub fn ordering_checks(rows: &[IndexScanRow], ks: &[usize]) -> Vec<Check> {
    let get = |k: usize, r: Realization| rows.iter().find(|x| x.k == k && x.realization == r);
    let ns = Realization::NewtonSchulz;
    let mut checks = Vec::new();
    let mut shallow_le_somewhere = false;
    let mut have_shallow = false;
    for &k in ks {
        let Some(exact) = get(k, Realization::Exact) else {
            continue;
        };
        for m in [4, 6] {
            if let Some(row) = get(k, ns(m)) {
                checks.push(Check::new(
                    format!("k={k}: ns{m} success rate equals exact"),
                    row.success_rate == exact.success_rate,
                    format!("ns{m} {} vs exact {}", row.success_rate, exact.success_rate),
                ));
            }
        }
        if let (Some(n2), Some(n4), Some(n6)) = (get(k, ns(2)), get(k, ns(4)), get(k, ns(6))) {
            have_shallow = true;
            if n2.success_rate <= n4.success_rate && n2.success_rate <= n6.success_rate {
                shallow_le_somewhere = true;
            }
            let errs = [n2, n4, n6].map(|r| r.median_direction_error);
            let decreasing = matches!(errs, [Some(a), Some(b), Some(c)] if a > b && b > c);
            checks.push(Check::new(
                format!("k={k}: median direction error decreasing over ns2, ns4, ns6"),
                decreasing,
                format!("{errs:?}"),
            ));
        }
    }
    if have_shallow {
        checks.push(Check::new(
            "ns2 success rate <= ns4 and ns6 for at least one k",
            shallow_le_somewhere,
            String::new(),
        ));
    }
    checks
}
