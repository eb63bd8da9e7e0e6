mod config;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use shelving_core::analytic::AnalyticError;
use shelving_core::ensemble::EnsembleError;
use shelving_core::nrule::EngineError;
use shelving_core::trajectory::TrajectoryError;

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("physics invariant violated: {0}")]
    Invariant(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::BadHorizon { .. } => CliError::Config(e.to_string()),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<TrajectoryError> for CliError {
    fn from(e: TrajectoryError) -> Self {
        match e {
            TrajectoryError::BadHorizon(_) => CliError::Config(e.to_string()),
            TrajectoryError::BudgetExceeded { .. } => CliError::Numerical(e.to_string()),
            TrajectoryError::Engine(inner) => inner.into(),
        }
    }
}

impl From<EnsembleError> for CliError {
    fn from(e: EnsembleError) -> Self {
        match e {
            EnsembleError::EmptyEnsemble => CliError::Config(e.to_string()),
            EnsembleError::Trajectory { index, source } => match CliError::from(source) {
                CliError::Config(m) => CliError::Config(format!("trajectory {index}: {m}")),
                CliError::Invariant(m) => CliError::Invariant(format!("trajectory {index}: {m}")),
                CliError::Numerical(m) => CliError::Numerical(format!("trajectory {index}: {m}")),
            },
            EnsembleError::Overlap(_) => CliError::Invariant(e.to_string()),
            EnsembleError::Oracle(_) | EnsembleError::Pool(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<AnalyticError> for CliError {
    fn from(e: AnalyticError) -> Self {
        match e {
            AnalyticError::QuadratureFailure(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Stochastic fluorescence intermittency of a three-level atom.
///
/// Settings are resolved in this order, later winning: built-in defaults,
/// the `--config` file, `--set` overrides, then the dedicated flags.
#[derive(Debug, Parser)]
#[command(name = "shelving", version)]
struct Cli {
    /// Flat TOML file with any subset of the configuration keys.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override one configuration key, e.g. `--set weak_decay=0.002`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Print the effective configuration as TOML and exit.
    #[arg(long, global = true)]
    dump_config: bool,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of trajectories in an ensemble.
    #[arg(long, global = true)]
    count: Option<u64>,

    /// Length of each trajectory.
    #[arg(long, global = true)]
    t_end: Option<f64>,

    /// A gap longer than this many `1/strong_decay` counts as dark.
    #[arg(long, global = true)]
    gap_factor: Option<f64>,

    /// Worker threads for ensembles. Results do not depend on it.
    #[arg(long, global = true, env = "SHELVING_WORKERS")]
    workers: Option<usize>,

    /// Write results here instead of standard output.
    #[arg(long, short, global = true, value_name = "FILE")]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form amplitudes, norm and channel currents of one cycle.
    Analytic {
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Emission record of a single trajectory.
    Trajectory {
        /// Trajectory index within the seeded family (default: first_index).
        #[arg(long)]
        index: Option<u64>,
    },
    /// Pooled statistics over many trajectories, with the oracle comparison.
    Ensemble,
    /// Run the consistency checks for the configured parameters.
    Validate {
        /// Samples per sampler check.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for assignment in &cli.overrides {
        cfg.set(assignment)?;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.count {
        cfg.count = v;
    }
    if let Some(v) = cli.t_end {
        cfg.t_end = v;
    }
    if let Some(v) = cli.gap_factor {
        cfg.gap_factor = v;
    }
    if let Some(v) = cli.workers {
        cfg.workers = v;
    }
    if let Some(Command::Analytic { t_max, points }) = &cli.command {
        cfg.analytic_t_max = t_max.unwrap_or(cfg.analytic_t_max);
        cfg.analytic_points = points.unwrap_or(cfg.analytic_points);
    }
    Ok(cfg)
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => std::fs::File::create(p)
            .map(|f| Box::new(std::io::BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", p.display()))),
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve(&cli)?;
    if cli.dump_config {
        let mut out = open_output(&cli.output)?;
        return write_all(&mut out, cfg.to_toml()?.as_bytes());
    }
    let Some(command) = &cli.command else {
        return Err(CliError::Config("no command given; see --help".into()));
    };
    let p = cfg.params()?;
    let mut out = open_output(&cli.output)?;
    match command {
        Command::Analytic { .. } => {
            report::analytic(&mut out, &p, &cfg.analytic_times()?, cli.format)
        }
        Command::Trajectory { index } => {
            let ens = cfg.ensemble()?;
            report::trajectory(
                &mut out,
                &p,
                &ens,
                index.unwrap_or(ens.first_index),
                cli.format,
            )
        }
        Command::Ensemble => report::ensemble(&mut out, &p, &cfg.ensemble()?, cli.format),
        Command::Validate { samples } => {
            let ens = cfg.ensemble()?;
            report::validate(&mut out, &p, ens, *samples, cli.format)
        }
    }
}

pub(crate) fn write_all(out: &mut dyn Write, bytes: &[u8]) -> Result<(), CliError> {
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Config(format!("cannot write output: {e}")))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
