//! Experiment scenarios. Each one is a pure function of its configuration
//! and returns a CSV report together with the post-condition checks it ran.

use std::fmt;
use std::path::PathBuf;

use crate::config::RawConfig;
use crate::csv::CsvReport;
use crate::error::{LabError, Result};

pub mod allen_cahn;
pub mod bench;
pub mod index_scan;
pub mod margin_scan;
pub mod muller;
pub mod shift_scan;

pub use allen_cahn::AllenCahnConfig;
pub use bench::BenchConfig;
pub use index_scan::IndexScanConfig;
pub use margin_scan::MarginScanConfig;
pub use muller::MullerConfig;
pub use shift_scan::ShiftScanConfig;

/// A named post-condition evaluated on a scenario's output.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioOutput {
    pub report: CsvReport,
    pub checks: Vec<Check>,
}

impl ScenarioOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScenarioId {
    ShiftScan,
    MarginScan,
    Muller,
    IndexScan,
    AllenCahn,
    Bench,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 6] = [
        ScenarioId::ShiftScan,
        ScenarioId::MarginScan,
        ScenarioId::Muller,
        ScenarioId::IndexScan,
        ScenarioId::AllenCahn,
        ScenarioId::Bench,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::ShiftScan => "shift-scan",
            ScenarioId::MarginScan => "margin-scan",
            ScenarioId::Muller => "muller",
            ScenarioId::IndexScan => "index-scan",
            ScenarioId::AllenCahn => "allen-cahn",
            ScenarioId::Bench => "bench",
        }
    }

    pub fn default_out(self) -> PathBuf {
        PathBuf::from(format!("{}.csv", self.name().replace('-', "_")))
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioConfig {
    ShiftScan(ShiftScanConfig),
    MarginScan(MarginScanConfig),
    Muller(MullerConfig),
    IndexScan(IndexScanConfig),
    AllenCahn(AllenCahnConfig),
    Bench(BenchConfig),
}

/// A parsed configuration file: the scenario knobs plus the output path.
#[derive(Clone, Debug, PartialEq)]
pub struct Loaded {
    pub config: ScenarioConfig,
    pub out: PathBuf,
}

impl ScenarioConfig {
    pub fn id(&self) -> ScenarioId {
        match self {
            ScenarioConfig::ShiftScan(_) => ScenarioId::ShiftScan,
            ScenarioConfig::MarginScan(_) => ScenarioId::MarginScan,
            ScenarioConfig::Muller(_) => ScenarioId::Muller,
            ScenarioConfig::IndexScan(_) => ScenarioId::IndexScan,
            ScenarioConfig::AllenCahn(_) => ScenarioId::AllenCahn,
            ScenarioConfig::Bench(_) => ScenarioId::Bench,
        }
    }

    /// Reads the knobs of scenario `id` from `raw`. The optional `scenario`
    /// key must name `id`; unknown keys are rejected.
    pub fn load(id: ScenarioId, raw: &RawConfig) -> Result<Loaded> {
        let mut r = raw.reader();
        if let Some(name) = r.optional::<String>("scenario")? {
            if name != id.name() {
                return Err(LabError::InvalidValue {
                    key: "scenario".into(),
                    value: name,
                    message: format!("config is for a different scenario than '{id}'"),
                });
            }
        }
        let out = r.get("out", id.default_out())?;
        let config = match id {
            ScenarioId::ShiftScan => ScenarioConfig::ShiftScan(ShiftScanConfig::read(&mut r)?),
            ScenarioId::MarginScan => ScenarioConfig::MarginScan(MarginScanConfig::read(&mut r)?),
            ScenarioId::Muller => ScenarioConfig::Muller(MullerConfig::read(&mut r)?),
            ScenarioId::IndexScan => ScenarioConfig::IndexScan(IndexScanConfig::read(&mut r)?),
            ScenarioId::AllenCahn => ScenarioConfig::AllenCahn(AllenCahnConfig::read(&mut r)?),
            ScenarioId::Bench => ScenarioConfig::Bench(BenchConfig::read(&mut r)?),
        };
        r.finish()?;
        Ok(Loaded { config, out })
    }

    pub fn run(&self) -> Result<ScenarioOutput> {
        match self {
            ScenarioConfig::ShiftScan(c) => shift_scan::run(c),
            ScenarioConfig::MarginScan(c) => margin_scan::run(c),
            ScenarioConfig::Muller(c) => muller::run(c),
            ScenarioConfig::IndexScan(c) => index_scan::run(c),
            ScenarioConfig::AllenCahn(c) => allen_cahn::run(c),
            ScenarioConfig::Bench(c) => bench::run(c),
        }
    }
}

/// Median of a nonempty sample; `None` when empty.
pub(crate) fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}
