//! Command-line driver: dataset generation, training, evaluation and export.

pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use radio_ae::Modulation;

pub use config::RunConfig;
pub use error::{CliError, CliResult, EXIT_FORMAT, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE};

/// Caps the worker pool when set to a positive integer.
pub const THREADS_ENV: &str = "RADIO_AE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "radio-ae",
    version,
    about = "Synthesize IQ datasets and train a compact convolutional autoencoder"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Run configuration file (key = value with [sections])
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides [run] seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides [dataset] modulation
    #[arg(long = "mod", value_name = "qpsk|gfsk", value_parser = parse_modulation)]
    pub modulation: Option<Modulation>,
    /// Overrides [channel] snr_db; `inf` disables the noise stage
    #[arg(long = "snr-db", value_name = "X", allow_hyphen_values = true, value_parser = parse_snr)]
    pub snr_db: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a RAED dataset file
    GenDataset {
        #[command(flatten)]
        common: Common,
        /// Overrides [dataset] examples
        #[arg(short = 'n', long = "examples")]
        examples: Option<usize>,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Train on a dataset file; writes a checkpoint and train_history.csv beside it
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        data: PathBuf,
        /// Overrides [train] epochs
        #[arg(long)]
        epochs: Option<usize>,
        /// Checkpoint path
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Report reconstruction and code metrics; writes metrics.csv
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        #[arg(long, value_name = "PATH")]
        data: PathBuf,
        /// Directory for metrics.csv, defaults to the checkpoint's directory
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Write weight and reconstruction CSVs plus a MANIFEST
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        #[arg(long, value_name = "PATH")]
        data: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Number of reconstructed examples, overrides [export] examples
        #[arg(short = 'n')]
        n: Option<usize>,
    },
}

fn parse_modulation(s: &str) -> Result<Modulation, String> {
    s.parse::<Modulation>().map_err(|e| e.to_string())
}

fn parse_snr(s: &str) -> Result<f64, String> {
    config::snr(s)
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Regular output goes to `out`, errors to stderr.
pub fn run<I, S>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match configure_threads().and_then(|()| commands::dispatch(cli.command, out)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("radio-ae: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
