//! `bundlelab`: runs one experiment and writes a JSON report.
//!
//! Exit codes: 0 if every check passes, 1 if a check fails or the run
//! aborts, 2 for configuration errors.

use std::path::PathBuf;
use std::process::ExitCode;

use bundlelab::experiments::{list_experiments, run, ExperimentConfig};
use bundlelab::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bundlelab", version, about = "Experiments on circle bundles over surfaces and their perturbations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal periods of Hopf orbits on S^3.
    HopfPeriods(Flags),
    /// Blow-down consistency and divisor winding.
    BlowupDivisor(Flags),
    /// Linking number, transition degree and divisor winding.
    Linking(Flags),
    /// Degree of the clutching function.
    TransitionDegree(Flags),
    /// The transversality form on lifted fields.
    Transversality(Flags),
    /// Periodicity of the strict-transform return map.
    Montgomery(Flags),
    /// Conjugacy of isochronized perturbations.
    Rigidity(Flags),
    /// Straightening a curve of leaves onto the fiber.
    Straighten(Flags),
    /// Bochner linearization and suspension.
    Bochner(Flags),
    /// Phases and closure along the alpha profile.
    ThurstonSweep(Flags),
    /// Closure of leaves off the profile, or of a single leaf.
    ThurstonClosure(Flags),
    /// Effect of halving the integrator tolerance.
    IntegratorOrder(Flags),
    /// Print the experiment table.
    List,
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report path (default: stdout).
    #[arg(long)]
    report: Option<PathBuf>,
    /// CSV output for trajectories or sweep tables.
    #[arg(long)]
    csv: Option<String>,
    /// Euler numbers (comma separated).
    #[arg(long = "E", value_delimiter = ',', allow_negative_numbers = true)]
    euler: Option<Vec<i64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    epsilon: Option<Vec<f64>>,
    /// Rotation orders for `bochner`.
    #[arg(long = "l", value_delimiter = ',', allow_negative_numbers = true)]
    orders: Option<Vec<i64>>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    factor: Option<f64>,
    #[arg(long)]
    lmin: Option<f64>,
    #[arg(long)]
    lmax: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Command {
    fn split(self) -> Option<(&'static str, Flags)> {
        use Command::*;
        Some(match self {
            HopfPeriods(f) => ("hopf-periods", f),
            BlowupDivisor(f) => ("blowup-divisor", f),
            Linking(f) => ("linking", f),
            TransitionDegree(f) => ("transition-degree", f),
            Transversality(f) => ("transversality", f),
            Montgomery(f) => ("montgomery", f),
            Rigidity(f) => ("rigidity", f),
            Straighten(f) => ("straighten", f),
            Bochner(f) => ("bochner", f),
            ThurstonSweep(f) => ("thurston-sweep", f),
            ThurstonClosure(f) => ("thurston-closure", f),
            IntegratorOrder(f) => ("integrator-order", f),
            List => return None,
        })
    }
}

fn build_config(name: &str, flags: &Flags) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::new(name);
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let file: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad config {}: {e}", path.display())))?;
        if !file.experiment.is_empty() && file.experiment != name {
            return Err(Error::Config(format!("config is for '{}', not '{name}'", file.experiment)));
        }
        cfg = cfg.overridden_by(&file);
    }
    let from_flags = ExperimentConfig {
        experiment: String::new(),
        euler: flags.euler.clone(),
        epsilon: flags.epsilon.clone(),
        orders: flags.orders.clone(),
        lambda: flags.lambda,
        ratio: flags.ratio,
        factor: flags.factor,
        lmin: flags.lmin,
        lmax: flags.lmax,
        step: flags.step,
        tol: flags.tol,
        n: flags.n,
        seed: 0,
        csv: flags.csv.clone(),
    };
    cfg = cfg.overridden_by(&from_flags);
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(path: &Option<PathBuf>, json: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, format!("{json}\n"))
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some((name, flags)) = cli.command.split() else {
        print!("{}", list_experiments());
        return ExitCode::SUCCESS;
    };
    let cfg = match build_config(name, &flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("bundlelab: {e}");
            return ExitCode::from(2);
        }
    };
    let (json, code) = match run(&cfg) {
        Ok(rep) => {
            for c in rep.failures() {
                eprintln!("bundlelab: check failed: {} = {:.3e} (want {} {:.3e})", c.name, c.value, c.relation, c.bound);
            }
            let code = if rep.pass { 0 } else { 1 };
            (serde_json::to_string_pretty(&rep).expect("report serializes"), code)
        }
        Err(Error::Config(m)) => {
            eprintln!("bundlelab: configuration error: {m}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("bundlelab: {name} aborted: {e}");
            let body = serde_json::json!({ "experiment": name, "params": cfg, "error": e.to_string(), "pass": false, "seed": cfg.seed });
            (serde_json::to_string_pretty(&body).expect("report serializes"), 1)
        }
    };
    if let Err(e) = emit(&flags.report, &json) {
        eprintln!("bundlelab: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
