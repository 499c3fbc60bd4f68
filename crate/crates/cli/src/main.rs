//! Pipeline driver: preprocessing, time-series validation and forecasting,
//! and squad optimisation as separately runnable subcommands with plain-CSV
//! artifacts between the phases.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dreamteam::ensemble::EnsembleError;
use dreamteam::ingest::IngestError;
use dreamteam::squad::SquadError;

#[derive(Parser)]
#[command(name = "dreamteam", version, about = "Forecast FPL player points and pick the optimal 15-player squad")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate the raw files, filter the roster, write the
    /// 114-gameweek matrix.
    Ingest(IngestArgs),
    /// Fit both models per player on the first two seasons, grid the blend
    /// weights against the third, and derive the global pair.
    Validate(ValidateArgs),
    /// Refit on all three seasons and write each player's 38-gameweek hybrid
    /// forecast.
    Forecast(ForecastArgs),
    /// Solve the budget/position-constrained selection exactly and compute
    /// the value metrics.
    Optimize(OptimizeArgs),
    /// All four phases in sequence.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Master roster CSV (first_name,surname,position,team,cost).
    #[arg(long)]
    master: PathBuf,
    /// Season points CSVs, three times, chronological order.
    #[arg(long = "season", num_args = 1)]
    seasons: Vec<PathBuf>,
    /// Directory for pipeline artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Input field delimiter (a single character).
    #[arg(long, default_value = ",")]
    delimiter: String,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Base seed for the network initialisation (mixed with each pid).
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Seasonal period of the candidate order grid.
    #[arg(long, default_value_t = 12)]
    seasonal_period: usize,
    /// Worker threads for per-player model fitting (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct ForecastArgs {
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 12)]
    seasonal_period: usize,
    /// Override the blend as "p1,p2" instead of reading the validated pair.
    #[arg(long, value_parser = parse_weights)]
    weights: Option<(f64, f64)>,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Squad budget in millions.
    #[arg(long, default_value_t = 100.0)]
    budget: f64,
    /// Actual season totals (pid,actual_points) for the aggregate-error
    /// report.
    #[arg(long)]
    actuals: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    master: PathBuf,
    #[arg(long = "season", num_args = 1)]
    seasons: Vec<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value = ",")]
    delimiter: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 12)]
    seasonal_period: usize,
    #[arg(long, value_parser = parse_weights)]
    weights: Option<(f64, f64)>,
    #[arg(long, default_value_t = 100.0)]
    budget: f64,
    #[arg(long)]
    actuals: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

fn parse_weights(raw: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected \"p1,p2\", got '{raw}'"));
    }
    let p1: f64 = parts[0].trim().parse().map_err(|_| format!("bad p1 '{}'", parts[0]))?;
    let p2: f64 = parts[1].trim().parse().map_err(|_| format!("bad p2 '{}'", parts[1]))?;
    Ok((p1, p2))
}

fn parse_delimiter(raw: &str) -> anyhow::Result<u8> {
    let bytes = raw.as_bytes();
    if bytes.len() != 1 {
        anyhow::bail!("--delimiter must be a single character, got '{raw}'");
    }
    Ok(bytes[0])
}

fn three_seasons(seasons: &[PathBuf]) -> anyhow::Result<[PathBuf; 3]> {
    if seasons.len() != 3 {
        anyhow::bail!("--season must be given exactly 3 times (chronological), got {}", seasons.len());
    }
    Ok([seasons[0].clone(), seasons[1].clone(), seasons[2].clone()])
}

fn init_jobs(jobs: usize) {
    if jobs > 0 {
        // Ignore the error if a pool already exists (pipeline sets it once).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
}

/// 0 success, 1 input error, 2 integrity error, 3 infeasible optimisation,
/// 4 internal failure.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<IngestError>() {
        return match e {
            IngestError::Integrity { .. } => 2,
            _ => 1,
        };
    }
    if let Some(e) = err.downcast_ref::<SquadError>() {
        return match e {
            SquadError::NotEnoughPlayers { .. }
            | SquadError::BudgetTooSmall { .. }
            | SquadError::Infeasible => 3,
            SquadError::NonGranularCost { .. } => 1,
            SquadError::TooLarge { .. } => 4,
        };
    }
    if let Some(e) = err.downcast_ref::<EnsembleError>() {
        return match e {
            EnsembleError::Io { .. }
            | EnsembleError::Parse { .. }
            | EnsembleError::BadWeights { .. } => 1,
            _ => 4,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 1;
    }
    // Argument-shape problems raised with bail! above.
    if err.source().is_none() {
        return 1;
    }
    4
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest(args) => {
            let seasons = three_seasons(&args.seasons)?;
            let delimiter = parse_delimiter(&args.delimiter)?;
            commands::ingest(&args.master, &seasons, &args.out, delimiter)?;
        }
        Command::Validate(args) => {
            init_jobs(args.jobs);
            commands::validate(&args.out, args.seed, args.seasonal_period)?;
        }
        Command::Forecast(args) => {
            init_jobs(args.jobs);
            commands::forecast(&args.out, args.seed, args.seasonal_period, args.weights)?;
        }
        Command::Optimize(args) => {
            commands::optimize(&args.out, args.budget, args.actuals.as_deref())?;
        }
        Command::Pipeline(args) => {
            init_jobs(args.jobs);
            let seasons = three_seasons(&args.seasons)?;
            let delimiter = parse_delimiter(&args.delimiter)?;
            commands::ingest(&args.master, &seasons, &args.out, delimiter)?;
            commands::validate(&args.out, args.seed, args.seasonal_period)?;
            commands::forecast(&args.out, args.seed, args.seasonal_period, args.weights)?;
            commands::optimize(&args.out, args.budget, args.actuals.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are success paths in clap.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
