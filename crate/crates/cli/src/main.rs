//! `aeds`: compress and decompress files with AEDS tables, build and analyze
//! tables, and write the numeric series behind the redundancy figures.

mod codecs;
mod commands;
mod container;
mod figures;

use std::path::PathBuf;
use std::process::ExitCode;

use aeds_core::analysis::SolverConfig;
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use codecs::Codec;
use figures::Figure;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] aeds_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::Io(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

#[derive(Parser)]
#[command(name = "aeds", version, about = "AEDS entropy coder and analysis tool")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TableChoice {
    #[arg(long, value_enum, default_value = "type2")]
    codec: Codec,
    /// Number of states N (state budget for saeds-case1).
    #[arg(long = "states")]
    states: Option<usize>,
    /// Residual tolerance of the iterative stationary solver.
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
}

impl TableChoice {
    fn solver(&self) -> Result<SolverConfig, CliError> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(CliError::Usage(format!("--tolerance must be positive, got {}", self.tolerance)));
        }
        Ok(SolverConfig { tolerance: self.tolerance, ..SolverConfig::default() })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Two-pass compression of a file into an AEDC container.
    Compress {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        choice: TableChoice,
        /// Write the table here and store only its hash in the container.
        #[arg(long)]
        table_out: Option<PathBuf>,
    },
    Decompress {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Side table for containers written with --table-out.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Build a table from a file histogram or explicit probabilities and
    /// write it in serialized form.
    BuildTable {
        #[arg(long, conflicts_with = "probs")]
        input: Option<PathBuf>,
        /// Comma-separated weights for symbols 0, 1, ...
        #[arg(long)]
        probs: Option<String>,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        choice: TableChoice,
        /// Keep the requested construction even when it loses to Huffman.
        #[arg(long)]
        no_fallback: bool,
    },
    /// Stationary analysis, bound checks and a Monte Carlo rate.
    Analyze {
        /// Serialized table; built from --codec when absent.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, conflicts_with = "probs")]
        input: Option<PathBuf>,
        #[arg(long)]
        probs: Option<String>,
        #[command(flatten)]
        choice: TableChoice,
        /// Monte Carlo sample count; 0 skips the simulation.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write bound reports as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Write the series behind a figure or table as CSV.
    Figures {
        #[arg(long, value_enum)]
        figure: Figure,
        /// Output path; stdout when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compress { input, output, choice, table_out } => commands::compress(&commands::CompressArgs {
            input: &input,
            output: &output,
            codec: choice.codec,
            states: choice.states,
            table_out: table_out.as_deref(),
            solver: choice.solver()?,
        }),
        Command::Decompress { input, output, table } => commands::decompress(&input, &output, table.as_deref()),
        Command::BuildTable { input, probs, output, choice, no_fallback } => {
            let p = commands::distribution(input.as_deref(), probs.as_deref())?;
            commands::build_table(&p, choice.codec, choice.states, &choice.solver()?, !no_fallback, &output)
        }
        Command::Analyze { table, input, probs, choice, samples, seed, csv } => {
            let p = commands::distribution(input.as_deref(), probs.as_deref())?;
            commands::analyze(
                &p,
                &commands::AnalyzeArgs {
                    table: table.as_deref(),
                    codec: choice.codec,
                    states: choice.states,
                    samples,
                    seed,
                    csv: csv.as_ref(),
                    solver: choice.solver()?,
                },
            )
        }
        Command::Figures { figure, csv } => match csv {
            Some(path) => figures::write(figure, std::fs::File::create(path)?),
            None => figures::write(figure, std::io::stdout().lock()),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => {
            eprintln!("error: internal invariant violated (panic)");
            ExitCode::from(4)
        }
    }
}
