use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use covest::decoupling::instances::Instance;
use covest_experiments::experiments::decouple_demo::{params_for, run_instance, Outcome};
use covest_experiments::experiments::structure_demo::{certify, StructureInput};
use covest_experiments::{write_csv, ExperimentConfig, ExperimentError, Registry, Result};
use serde::Deserialize;

/// Seeded covariance-estimation experiments.
#[derive(Parser)]
#[command(name = "covest", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimation error over a grid of dimensions and sample sizes.
    Sweep(Common),
    /// Parseval defect of subsampled tight frames.
    Frame(Common),
    /// Undersampling a discrete distribution.
    Coupon(Common),
    /// Extreme eigenvalues at fixed aspect ratio.
    Baiyin(Common),
    /// Structure certificates for fuzzed sequences, or for one input file.
    Structure(WithInput),
    /// Decoupling on generated instances, or on one instance file.
    Decouple(WithInput),
    /// Three-term truncation split against the measured error.
    Truncation(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; the built-in defaults are used otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct WithInput {
    /// Single-instance JSON input.
    input: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

/// `decouple` input: an instance with optional parameter overrides.
#[derive(Deserialize)]
struct DecoupleFile {
    #[serde(flatten)]
    instance: Instance,
    #[serde(default)]
    params: Option<serde_json::Value>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let (name, common, input) = match cli.command {
        Command::Sweep(c) => ("scaling", c, None),
        Command::Frame(c) => ("frame", c, None),
        Command::Coupon(c) => ("coupon", c, None),
        Command::Baiyin(c) => ("baiyin", c, None),
        Command::Structure(w) => ("structure_demo", w.common, w.input),
        Command::Decouple(w) => ("decouple_demo", w.common, w.input),
        Command::Truncation(c) => ("truncation", c, None),
    };
    if common.jobs == Some(0) {
        return Err(ExperimentError::config("--jobs must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs.unwrap_or(0))
        .build()
        .map_err(|e| ExperimentError::config(format!("cannot start {:?} workers: {e}", common.jobs)))?;
    pool.install(|| match input {
        Some(path) if name == "structure_demo" => structure_file(&path, &common),
        Some(path) => decouple_file(&path, &common),
        None => sweep(name, &common),
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| ExperimentError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ExperimentError::config(format!("invalid {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn sweep(name: &str, common: &Common) -> Result<u8> {
    let registry = Registry::builtin();
    let experiment = registry.get(name)?;
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => experiment.default_config(),
    };
    match cfg.experiment.as_deref() {
        None => cfg.experiment = Some(name.to_string()),
        Some(n) if n == name => {}
        Some(n) => {
            return Err(ExperimentError::config(format!(
                "config is for experiment {n}, not {name}"
            )))
        }
    }
    if let Some(s) = common.seed {
        cfg.master_seed = s;
    }
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    let out_path = common.out.clone().or_else(|| cfg.output_path.clone());
    let output = experiment.run(&cfg)?;
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    let mut csv = Vec::new();
    write_csv(&mut csv, &output.rows)?;
    emit(out_path.as_deref(), &csv)?;
    let summary = serde_json::to_string_pretty(&output.summary)?;
    match out_path {
        Some(p) => {
            let mut s = p.into_os_string();
            s.push(".summary.json");
            fs::write(s, summary + "\n")?;
        }
        None => eprintln!("{summary}"),
    }
    Ok(0)
}

fn structure_file(path: &Path, common: &Common) -> Result<u8> {
    let input: StructureInput = read_json(path)?;
    let out = certify(&input)?;
    emit(common.out.as_deref(), (serde_json::to_string_pretty(&out)? + "\n").as_bytes())?;
    for item in &out.report.items {
        eprintln!(
            "{:<4} {:<40} slack={:e}",
            if item.pass { "ok" } else { "FAIL" },
            item.name,
            item.slack
        );
    }
    Ok(if out.passes { 0 } else { 1 })
}

fn decouple_file(path: &Path, common: &Common) -> Result<u8> {
    let file: DecoupleFile = read_json(path)?;
    let params = params_for(&file.instance, file.params.as_ref())?;
    let run = run_instance(&file.instance, &params, common.seed.unwrap_or(0))?;
    match (&run.certificate, &run.report) {
        (Some(cert), Some(report)) => {
            emit(common.out.as_deref(), (serde_json::to_string_pretty(cert)? + "\n").as_bytes())?;
            eprint!("{}", report.render());
            Ok(0)
        }
        _ => {
            eprintln!("decoupling failed: {}", run.message.as_deref().unwrap_or("unknown reason"));
            Ok(if run.outcome == Outcome::NonConvergence { 3 } else { 1 })
        }
    }
}
