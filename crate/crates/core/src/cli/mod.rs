//! Command-line front end: config loading, simulation runs and reports.

mod commands;
mod config;
mod snapshot;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_analyze, cmd_simulate, cmd_validate, format_sig12, SimulateOptions, CONFIG_FILE, EXIT_CONVERGED, EXIT_ERROR,
    EXIT_HORIZON, REPORT_FILE, SNAPSHOTS_FILE, SUMMARY_FILE, THREADS_ENV, TIMESERIES_FILE,
};
pub use config::{
    AnalysisSpec, ConfigError, EdgeLawSpec, GraphSpec, InitialSpec, InteractionSpec, LawSpec, Model, MuSpec, RunConfig,
    CONFIG_VERSION,
};
pub use snapshot::{
    read_snapshots, to_line, write_snapshots, write_timeseries, RoundTripFormatter, SnapshotError, SnapshotRecord,
};

#[derive(Debug, Parser)]
#[command(
    name = "fading-flock",
    version,
    about = "Simulate and analyze attraction/repulsion multi-agent gradient flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the dynamics and write snapshots, a summary and a CSV time series.
    Simulate {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Run K independently seeded simulations in parallel.
        #[arg(long, value_name = "K")]
        ensemble: Option<usize>,
    },
    /// Analyze a snapshot stream and write report.json next to it.
    Analyze {
        snapshots: PathBuf,
        /// Defaults to config.json in the snapshot directory.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Check every edge law and print derived thresholds.
    Validate { config: PathBuf },
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_CONVERGED };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate {
            config,
            out,
            seed,
            ensemble,
        } => cmd_simulate(&SimulateOptions {
            config,
            out,
            seed,
            ensemble,
        }),
        Command::Analyze { snapshots, config } => cmd_analyze(&snapshots, config.as_deref()).map(|path| {
            println!("{}", path.display());
            EXIT_CONVERGED
        }),
        Command::Validate { config } => cmd_validate(&config, &mut std::io::stdout().lock()),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}
