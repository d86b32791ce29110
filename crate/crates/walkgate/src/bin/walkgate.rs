//! Experiment driver CLI: every subsystem behind one reproducible command.
//!
//! Configs are JSON files with a `command` field matching the subcommand;
//! results land in `--out` as `result.json` plus CSV arrays. Exit codes:
//! 0 success, 2 config validation failure, 1 simulation failure.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use walkgate::runner::{self, Overrides, RunnerError};

#[derive(Parser)]
#[command(
    name = "walkgate",
    version,
    about = "Subspace rotations via topological quantum walks: simulations, fidelity tables and baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; its `command` field must match the subcommand.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's rng_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for result.json and CSV arrays (defaults to the
    /// config's `output` field, then `walkgate-out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's numerical tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Coined-walk revival residuals, winding numbers and band data.
    Walk(RunArgs),
    /// Matrix embedding: SVD blocks and the interleaved rotation sequence.
    Embed(RunArgs),
    /// Rotating-wave transmon sequence fidelities.
    CqedRwa(RunArgs),
    /// Full lab-frame transmon sequence with leakage, and state probes.
    CqedFull(RunArgs),
    /// Signal-processing phases, responses and reflection fidelities.
    Qsp(RunArgs),
    /// Collective-spin reflections and the partition oracle.
    Ion(RunArgs),
    /// Rydberg walk pulse dual-construction check.
    Rydberg(RunArgs),
    /// Resonant hide-phase-unhide baseline and gate costs.
    Fsbsw(RunArgs),
    /// Run another command over a parameter grid.
    Sweep(RunArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Walk(_) => "walk",
            Command::Embed(_) => "embed",
            Command::CqedRwa(_) => "cqed-rwa",
            Command::CqedFull(_) => "cqed-full",
            Command::Qsp(_) => "qsp",
            Command::Ion(_) => "ion",
            Command::Rydberg(_) => "rydberg",
            Command::Fsbsw(_) => "fsbsw",
            Command::Sweep(_) => "sweep",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Walk(a)
            | Command::Embed(a)
            | Command::CqedRwa(a)
            | Command::CqedFull(a)
            | Command::Qsp(a)
            | Command::Ion(a)
            | Command::Rydberg(a)
            | Command::Fsbsw(a)
            | Command::Sweep(a) => a,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = cli.command.args();
    match execute(cli.command.name(), args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn execute(name: &str, args: &RunArgs) -> Result<(), RunnerError> {
    let raw = std::fs::read_to_string(&args.config).map_err(|e| {
        RunnerError::Validation(format!("cannot read {}: {e}", args.config.display()))
    })?;
    let mut config: serde_json::Value =
        serde_json::from_str(&raw).map_err(|e| RunnerError::Validation(e.to_string()))?;
    if let (Some(seed), Some(obj)) = (args.seed, config.as_object_mut()) {
        obj.insert("rng_seed".into(), serde_json::json!(seed));
    }
    let overrides = Overrides {
        seed: args.seed,
        tol: args.tol,
    };
    let out = runner::resolve_out_dir(&config, args.out.as_deref());
    let record = runner::run(name, &config, &out, overrides)?;
    let mut summary: Vec<String> = record
        .scalars
        .iter()
        .map(|(k, v)| format!("{k}={v:.6}"))
        .collect();
    summary.sort();
    println!("{name}: {}", summary.join("  "));
    println!(
        "wrote {} ({} artifacts)",
        out.join("result.json").display(),
        record.outputs.len() + 1
    );
    Ok(())
}
