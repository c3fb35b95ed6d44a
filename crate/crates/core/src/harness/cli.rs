//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::config::{ExperimentConfig, SweepAxis};
use super::report::{emit_csv, TraceWriter};
use super::sweep::{run_summary, run_sweep, SweepSpec};
use super::verify::verify_suite;
use super::HarnessError;
use crate::regret::{bound, tune, BoundInputs, TheoremId};
use crate::simulation::{run_replication_with, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "truthful-cascade", version, about = "Truthful learning mechanisms for cascade-model ad auctions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one configuration and write a per-round trace CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write a per-replication regret summary.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Sweep one parameter and write a regret summary CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// One of T, N, K, q_min, mu. Overrides the file's [sweep] table.
        #[arg(long)]
        axis: Option<String>,
        #[arg(long, value_delimiter = ',')]
        points: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a regret bound and its tuned parameters.
    Bounds {
        #[arg(long)]
        theorem: String,
        #[arg(long = "T")]
        horizon: u64,
        #[arg(long = "K", default_value_t = 1)]
        slots: usize,
        #[arg(long = "N")]
        ads: usize,
        /// Smallest prominence product (position-dependent bounds).
        #[arg(long, conflicts_with = "gamma_min")]
        lambda_min: Option<f64>,
        /// Smallest cumulative continuation (externality-aware bounds).
        #[arg(long)]
        gamma_min: Option<f64>,
        #[arg(long)]
        v_max: Option<f64>,
        #[arg(long)]
        q_min: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Recompute the built-in counterexamples.
    Verify {
        #[arg(long)]
        filter: Option<String>,
    },
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit status.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run { config, out, summary } => run(&config, &out, summary.as_deref()),
        Command::Sweep { config, axis, points, out } => sweep(&config, axis, points, &out),
        Command::Bounds { theorem, horizon, slots, ads, lambda_min, gamma_min, v_max, q_min, mu } => {
            let id: TheoremId = theorem.parse()?;
            let mut inputs = BoundInputs::new(horizon, slots, ads);
            if let Some(p) = lambda_min.or(gamma_min) {
                inputs = inputs.with_prominence_min(p);
            }
            if let Some(v) = v_max {
                inputs = inputs.with_v_max(v);
            }
            if let Some(q) = q_min {
                inputs = inputs.with_q_min(q);
            }
            if let Some(m) = mu {
                inputs = inputs.with_mu(m);
            }
            let eval = bound(id, &inputs);
            println!("theorem={id}");
            println!("bound={}", eval.value);
            let tuned = tune(id, &inputs)?;
            println!("tau={}", tuned.tau);
            println!("delta={}", tuned.delta);
            if let Some(m) = tuned.mu {
                println!("mu={m}");
            }
            for w in eval.warnings.iter().chain(&tuned.warnings) {
                eprintln!("warning: {w}");
            }
            Ok(())
        }
        Command::Verify { filter } => {
            let results = verify_suite(filter.as_deref());
            for c in &results {
                println!("{c}");
            }
            match results.iter().filter(|c| !c.passed).count() {
                0 => Ok(()),
                n => Err(HarnessError::Verification(n)),
            }
        }
    }
}

fn run(config: &std::path::Path, out: &std::path::Path, summary: Option<&std::path::Path>) -> Result<(), HarnessError> {
    let cfg = ExperimentConfig::from_path(config)?;
    let mut writer = TraceWriter::create(out, cfg.instance.slots)?;
    for r in 0..cfg.replications {
        let (env, model) = cfg.instance(r)?;
        let mechanism = cfg.mechanism_params(&env, &model)?;
        let run = RunConfig { env, model, mechanism, horizon: cfg.horizon, seed: cfg.seed, replications: 1 };
        let mut failure = None;
        run_replication_with(&run, r, |t| {
            if failure.is_none() {
                failure = writer.write(r, &t).err();
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
    }
    writer.finish()?;
    if let Some(path) = summary {
        emit_csv(&run_summary(&cfg)?, path)?;
    }
    Ok(())
}

fn sweep(
    config: &std::path::Path,
    axis: Option<String>,
    points: Option<Vec<f64>>,
    out: &std::path::Path,
) -> Result<(), HarnessError> {
    let cfg = ExperimentConfig::from_path(config)?;
    let section = cfg.sweep.clone();
    let axis = match (axis, &section) {
        (Some(a), _) => SweepAxis::parse(&a)?,
        (None, Some(s)) => s.axis,
        (None, None) => return Err(HarnessError::Config("no sweep axis given".into())),
    };
    let points = match (points, section) {
        (Some(p), _) => p,
        (None, Some(s)) => s.points,
        (None, None) => return Err(HarnessError::Config("no sweep points given".into())),
    };
    let spec = SweepSpec::new(axis, points, cfg)?;
    emit_csv(&run_sweep(&spec)?, out)
}
