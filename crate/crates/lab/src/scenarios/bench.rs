//! Dense explicit-Hessian cost comparison: Jacobi eigensolve against
//! Newton–Schulz sign kernels, with and without the spectral setup of the
//! shift and scale.

use std::time::Instant;

use shiftsign::reflector::exact_reflector_from;
use shiftsign::sampling::random_symmetric;
use shiftsign::shifts::{make_scaling_with_eigen, ScalingPolicy};
use shiftsign::sign_engine::{ns_matrix_sign, ns_step_flops};
use shiftsign::symlin::eigh_with_stats;

use super::{Check, ScenarioOutput};
use crate::config::{ensure, Reader};
use crate::csv::{Cell, CsvReport};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub depth: usize,
    /// Target index as a fraction of `d`.
    pub k_fraction: f64,
    /// Measure wall-clock time; off gives a machine-independent CSV.
    pub timing: bool,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![128, 256, 512],
            depth: 2,
            k_fraction: 0.125,
            timing: true,
            seed: 0,
        }
    }
}

impl BenchConfig {
    pub(crate) fn read(r: &mut Reader) -> Result<Self> {
        let d = Self::default();
        let c = Self {
            sizes: r.list("sizes", d.sizes)?,
            depth: r.get("depth", d.depth)?,
            k_fraction: r.get("k_fraction", d.k_fraction)?,
            timing: r.get("timing", d.timing)?,
            seed: r.get("seed", d.seed)?,
        };
        ensure(
            c.k_fraction > 0.0 && c.k_fraction < 1.0,
            "k_fraction",
            c.k_fraction,
            "must lie in (0, 1)",
        )?;
        for &d in &c.sizes {
            ensure(d >= 2, "sizes", d, "each size must be >= 2")?;
        }
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub d: usize,
    pub method: &'static str,
    pub wall_time: Option<f64>,
    pub flop_count: u64,
}

pub const EIGENSOLVE: &str = "exact_eigensolve";
pub const NS_KERNELS: &str = "ns_kernels_only";
pub const NS_SETUP: &str = "ns_setup_included";

/// Counted flops of forming `H − sI` and the scaled start `αA`.
fn shift_scale_flops(d: u64) -> u64 {
    d + d * d
}

pub fn measure(c: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &d in &c.sizes {
        let h = random_symmetric(d, c.seed.wrapping_add(d as u64));
        let k = ((d as f64 * c.k_fraction).round() as usize).clamp(1, d - 1);

        let t0 = Instant::now();
        let (eig, stats) = eigh_with_stats(&h)?;
        let reflector = exact_reflector_from(&eig, k)?;
        let eig_time = t0.elapsed().as_secs_f64();
        let eig_flops = stats.flops(d);
        std::hint::black_box(&reflector);

        let s = 0.5 * (eig.lambda(k) + eig.lambda(k + 1));
        let alpha = make_scaling_with_eigen(&h, &eig, s, ScalingPolicy::SpectralInverse)?;
        let t1 = Instant::now();
        let shifted = h.add_identity(-s);
        let sign = ns_matrix_sign(&shifted, alpha, c.depth)?;
        let ns_time = t1.elapsed().as_secs_f64();
        std::hint::black_box(&sign);
        let ns_flops = ns_step_flops(d, c.depth);

        let time = |t: f64| c.timing.then_some(t);
        rows.push(BenchRow {
            d,
            method: EIGENSOLVE,
            wall_time: time(eig_time),
            flop_count: eig_flops,
        });
        rows.push(BenchRow {
            d,
            method: NS_KERNELS,
            wall_time: time(ns_time),
            flop_count: ns_flops,
        });
        rows.push(BenchRow {
            d,
            method: NS_SETUP,
            wall_time: time(eig_time + ns_time),
            flop_count: eig_flops + shift_scale_flops(d as u64) + ns_flops,
        });
    }
    Ok(rows)
}

pub fn run(c: &BenchConfig) -> Result<ScenarioOutput> {
    let rows = measure(c)?;
    let mut report = CsvReport::new(vec![
        ("d", "matrix dimension"),
        ("method", "exact_eigensolve | ns_kernels_only | ns_setup_included"),
        ("wall_time", "seconds on this machine (empty when timing is off)"),
        ("flop_count", "counted floating-point operations"),
    ]);
    for r in &rows {
        report.push(vec![
            r.d.into(),
            r.method.into(),
            r.wall_time.into(),
            Cell::from(r.flop_count),
        ]);
    }
    Ok(ScenarioOutput {
        report,
        checks: flop_checks(&rows),
    })
}

pub fn flop_checks(rows: &[BenchRow]) -> Vec<Check> {
    let flops = |d: usize, m: &str| {
        rows.iter()
            .find(|r| r.d == d && r.method == m)
            .map(|r| r.flop_count)
    };
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.d).collect();
    sizes.dedup();
    let mut checks = Vec::new();
    let mut ratios = Vec::new();
    for &d in &sizes {
        let (Some(e), Some(n), Some(s)) = (flops(d, EIGENSOLVE), flops(d, NS_KERNELS), flops(d, NS_SETUP)) else {
            continue;
        };
        if d >= 256 {
            checks.push(Check::new(
                format!("d={d}: ns kernels below eigensolve"),
                n < e,
                format!("{n} vs {e}"),
            ));
        }
        checks.push(Check::new(
            format!("d={d}: setup-included >= kernels-only"),
            s >= n,
            format!("{s} vs {n}"),
        ));
        ratios.push(e as f64 / n as f64);
    }
    checks.push(Check::new(
        "eigensolve/ns flop ratio increasing in d",
        ratios.windows(2).all(|w| w[1] > w[0]),
        format!("{ratios:?}"),
    ));
    checks
}
