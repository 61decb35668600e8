//! Command-line front end: `rate`, `conserve`, `simulate`, `verify` and
//! `catalogue`, driven by a sectioned configuration file.
//!
//! Exit codes: 0 success, 1 I/O, 2 configuration, 3 solver, 4 simulation,
//! 5 failed verification.

mod commands;
pub mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_catalogue, cmd_conserve, cmd_rate, cmd_simulate, cmd_verify, parse_drift, Status, VerdictLine, VerifyMode,
};
pub use config::{ConfigError, RunConfig};

use crate::error::Error;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "ESCRATE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "escrate", version, about = "Upper rate functions and Monte Carlo checks for radial diffusions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the CSV here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed, overriding `[simulation] seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Suppress the verdict line.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Numeric rate function on the time grid.
    Rate,
    /// Conservativeness verdict for the model.
    Conserve,
    /// Simulate the radial equation.
    Simulate,
    /// Monte Carlo and scheme checks.
    Verify {
        #[command(subcommand)]
        mode: VerifyCommand,
    },
    /// Closed-form rates of the standard cases.
    Catalogue,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum VerifyCommand {
    /// Envelope exceedance of ψ(C·t).
    Envelope,
    /// Comparison inequality between two drifts.
    Compare,
    /// Law of the iterated logarithm on Brownian paths.
    Lil,
    /// Dyadic crossing scheme.
    Dyadic,
}

impl From<VerifyCommand> for VerifyMode {
    fn from(v: VerifyCommand) -> Self {
        match v {
            VerifyCommand::Envelope => Self::Envelope,
            VerifyCommand::Compare => Self::Compare,
            VerifyCommand::Lil => Self::Lil,
            VerifyCommand::Dyadic => Self::Dyadic,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Run(Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io(_) => 1,
            Self::Config(_) | Self::Run(Error::InvalidParameter(_)) => 2,
            Self::Run(Error::NonFiniteState { .. } | Error::SingularOrigin { .. } | Error::DriftOrderViolated { .. }) => 4,
            Self::Run(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(m) => write!(f, "ConfigError: {m}"),
            Self::Run(e) => write!(f, "{}: {e}", e.name()),
            Self::Io(e) => write!(f, "IoError: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Run(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e.0)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

const DEFAULT_CATALOGUE_TIMES: [f64; 4] = [10.0, 100.0, 1e3, 1e4];

fn load_config(cli: &Cli) -> Result<Option<RunConfig>, CliError> {
    let Some(path) = &cli.config else { return Ok(None) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let (Some(seed), Some(sim)) = (cli.seed, cfg.simulation.as_mut()) {
        sim.seed = seed;
    }
    Ok(Some(cfg))
}

/// Runs one parsed invocation. CSV goes to `--out` or `stdout`; the verdict
/// line goes to `stdout` when the CSV went to a file and to `diag` otherwise.
pub fn execute(cli: &Cli, stdout: &mut dyn Write, diag: &mut dyn Write) -> Result<Option<VerdictLine>, CliError> {
    let cfg = load_config(cli)?;
    let need = || cfg.as_ref().ok_or_else(|| CliError::Config("--config is required for this command".into()));
    let verdict = {
        let mut sink: Box<dyn Write + '_> = match &cli.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(&mut *stdout)),
        };
        let out = &mut *sink;
        let verdict = match &cli.command {
            Command::Rate => cmd_rate(need()?, out).map(|_| None),
            Command::Conserve => cmd_conserve(need()?, out).map(|_| None),
            Command::Simulate => cmd_simulate(need()?, out).map(|_| None),
            Command::Verify { mode } => cmd_verify(need()?, (*mode).into(), out).map(Some),
            Command::Catalogue => {
                let times = match &cfg {
                    Some(c) if !c.solver.t_grid.is_empty() => c.solver.t_grid.clone(),
                    _ => DEFAULT_CATALOGUE_TIMES.to_vec(),
                };
                cmd_catalogue(&times, out).map(|_| None)
            }
        }?;
        sink.flush()?;
        verdict
    };
    if let (Some(v), false) = (&verdict, cli.quiet) {
        if cli.out.is_some() {
            writeln!(stdout, "{v}")?;
        } else {
            writeln!(diag, "{v}")?;
        }
    }
    Ok(verdict)
}

/// Exit code for a finished run.
pub fn exit_code(result: &Result<Option<VerdictLine>, CliError>) -> i32 {
    match result {
        Ok(Some(v)) if v.status == Status::Fail => 5,
        Ok(_) => 0,
        Err(e) => e.exit_code(),
    }
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
    }
}

/// Parses `args`, runs the command on the process streams and returns the
/// exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    let run = || {
        let mut out = stdout.lock();
        let mut err = stderr.lock();
        execute(&cli, &mut out, &mut err)
    };
    let result = match thread_cap() {
        Err(e) => Err(e),
        Ok(None) => run(),
        Ok(Some(n)) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Err(CliError::Config(format!("cannot start {n} threads: {e}"))),
        },
    };
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    exit_code(&result)
}
