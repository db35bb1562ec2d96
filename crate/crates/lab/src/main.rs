use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shiftsign_lab::acceptance;
use shiftsign_lab::config::RawConfig;
use shiftsign_lab::scenarios::{ScenarioConfig, ScenarioId};
use shiftsign_lab::LabError;

/// Scenarios and checks for shifted matrix-sign reflectors.
#[derive(Debug, Parser)]
#[command(name = "shiftsign", version)]
struct Cli {
    /// Worker threads for scenario cells (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Operator error as the shift moves through the target gap.
    ShiftScan(RunArgs),
    /// Operator error against the scalar bound as the margin shrinks.
    MarginScan(RunArgs),
    /// Trajectories on the Müller–Brown surface.
    Muller(RunArgs),
    /// Success rates over prescribed indices on the rotated quartic.
    IndexScan(RunArgs),
    /// Stiff Allen–Cahn histories and direction errors.
    AllenCahn(RunArgs),
    /// Flop counts and timings of eigensolve against sign kernels.
    Bench(RunArgs),
    /// Run the acceptance suite and print one line per criterion.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Flat `key = value` configuration file.
    config: Option<PathBuf>,
    /// Overrides the `seed` key.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the `out` key (CSV output path).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Run only these criteria (comma-separated ids).
    #[arg(long, value_delimiter = ',')]
    only: Vec<usize>,
}

fn run_scenario(id: ScenarioId, args: RunArgs) -> Result<bool, LabError> {
    let mut raw = match &args.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    if let Some(seed) = args.seed {
        raw.set("seed", seed);
    }
    if let Some(out) = &args.out {
        raw.set("out", out.display());
    }
    let loaded = ScenarioConfig::load(id, &raw)?;
    let output = loaded.config.run()?;
    output.report.write_to(&loaded.out)?;
    for check in &output.checks {
        let mark = if check.passed { "ok  " } else { "FAIL" };
        eprintln!("{mark} {}  {}", check.name, check.detail);
    }
    eprintln!(
        "{id}: wrote {} rows to {}",
        output.report.rows().len(),
        loaded.out.display()
    );
    Ok(output.passed())
}

fn selftest(args: SelftestArgs) -> bool {
    let ids: Vec<usize> = if args.only.is_empty() {
        (1..=acceptance::CRITERIA).collect()
    } else {
        args.only
    };
    let mut all = true;
    for id in ids {
        let c = acceptance::run(id);
        println!("{c}");
        all &= c.passed;
    }
    all
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let (id, args) = match cli.command {
        Command::Selftest(args) => return ExitCode::from(if selftest(args) { 0 } else { 1 }),
        Command::ShiftScan(a) => (ScenarioId::ShiftScan, a),
        Command::MarginScan(a) => (ScenarioId::MarginScan, a),
        Command::Muller(a) => (ScenarioId::Muller, a),
        Command::IndexScan(a) => (ScenarioId::IndexScan, a),
        Command::AllenCahn(a) => (ScenarioId::AllenCahn, a),
        Command::Bench(a) => (ScenarioId::Bench, a),
    };
    match run_scenario(id, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                eprintln!("usage: shiftsign {id} [CONFIG] [--seed N] [--out PATH] [--threads N]");
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
