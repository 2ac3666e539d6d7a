//! `assoc-walk`: tilt parameters, associated walks and diagnostics from JSON
//! configs.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 numerical failure
//! (including failed verification checks).

mod commands;
mod config;
mod csv;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(name = "assoc-walk", version, about = "Associated random walks and tilt parameters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON config: full config, bare model spec, or a previous run's output.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for every random stream; generated and echoed when omitted.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Write the JSON output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Write plot data as CSV.
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Finite-state Markov increments.
    Markov {
        #[command(subcommand)]
        action: MarkovAction,
    },
    /// Stationary Gaussian increments.
    Gauss {
        #[command(subcommand)]
        action: GaussAction,
    },
    /// Single-server queues.
    Queue {
        #[command(subcommand)]
        action: QueueAction,
    },
    /// Diagnostic suites over several models.
    Verify {
        #[command(subcommand)]
        action: VerifyAction,
    },
}

#[derive(Debug, Subcommand)]
enum MarkovAction {
    /// θ, Perron vectors and q.
    Solve,
    /// Associated chain and the duality round trip.
    Associate,
    /// Diagnostic suite.
    Verify,
}

#[derive(Debug, Subcommand)]
enum GaussAction {
    /// θ, R, S and q.
    Solve,
    /// Diagnostic suite.
    Verify,
}

#[derive(Debug, Subcommand)]
enum QueueAction {
    /// Analytic θ and simulated tail decay.
    Run,
}

#[derive(Debug, Subcommand)]
enum VerifyAction {
    /// Run the configured suites (the benchmark models by default).
    Run,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
    Lib(assoc_walk::Error),
    /// Checks ran but some failed; the report is still written.
    Failed(Vec<String>),
}

impl From<assoc_walk::Error> for CliError {
    fn from(e: assoc_walk::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Lib(e) if !e.is_numerical() => 1,
            _ => 2,
        }
    }

    fn report(&self) -> Value {
        match self {
            CliError::Input(m) => json!({"error": "InputError", "message": m}),
            CliError::Numerical(m) => json!({"error": "NumericalFailure", "message": m}),
            CliError::Lib(e) => {
                let debug = format!("{e:?}");
                let kind = debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error");
                json!({"error": kind, "message": e.to_string()})
            }
            CliError::Failed(m) => json!({"error": "VerificationFailed", "mismatches": m}),
        }
    }
}

/// What a command produced: the JSON document and optional CSV rows.
pub struct Output {
    pub command: &'static str,
    pub config: Value,
    pub result: Value,
    pub csv: Option<csv::Table>,
    pub failures: Vec<String>,
}

fn dispatch(cli: &Cli) -> Result<Output, CliError> {
    let c = &cli.common;
    match &cli.command {
        Command::Markov { action } => match action {
            MarkovAction::Solve => commands::markov_solve(c),
            MarkovAction::Associate => commands::markov_associate(c),
            MarkovAction::Verify => commands::markov_verify(c),
        },
        Command::Gauss { action } => match action {
            GaussAction::Solve => commands::gauss_solve(c),
            GaussAction::Verify => commands::gauss_verify(c),
        },
        Command::Queue { action: QueueAction::Run } => commands::queue_run(c),
        Command::Verify { action: VerifyAction::Run } => commands::verify_run(c),
    }
}

fn emit(cli: &Cli, out: &Output) -> Result<(), CliError> {
    let doc = json!({"command": out.command, "config": out.config, "result": out.result});
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Numerical(e.to_string()))?;
    text.push('\n');
    match &cli.common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    if let (Some(path), Some(table)) = (&cli.common.csv, &out.csv) {
        table
            .write(path)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let output = match cli.common.threads {
        None => dispatch(cli)?,
        Some(0) => return Err(CliError::Input("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Input(format!("cannot start {n} threads: {e}")))?
            .install(|| dispatch(cli))?,
    };
    emit(cli, &output)?;
    if output.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(output.failures))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code())
        }
    }
}
