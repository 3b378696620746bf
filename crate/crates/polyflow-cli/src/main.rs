//! `polyflow`: batch experiments over manifold description files.
//!
//! Exit codes: 0 success, 1 configuration/flag errors, 2 domain errors
//! (invalid manifold, invalid trace setup), 3 experiment-level failures
//! (horizon too small, incomplete coverage, inconclusive split) with the
//! partial report still written.

mod commands;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "polyflow",
    about = "Geodesic-flow experiments on polysquare surfaces and polycube 3-manifolds",
    version
)]
struct Cli {
    /// Worker-thread cap (default: POLYFLOW_THREADS or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a manifold description file and print a summary.
    Validate {
        /// Path to the manifold JSON description.
        manifold: String,
    },
    /// Trace one geodesic and export the segment table (CSV) or picture (SVG).
    Trace(commands::TraceArgs),
    /// Coverage-time density experiment over seeded starts.
    Density(commands::DensityArgs),
    /// Hitting-time bound estimation and visiting-frequency measurement.
    Frequency(commands::FrequencyArgs),
    /// Enumerate saddle connections of a surface.
    Saddles(commands::SaddlesArgs),
    /// Colour-splitting experiment (with optional fragment CSV).
    Split(commands::SplitArgs),
    /// Multiplicity-function estimation on the torus grid.
    Multiplicity(commands::MultiplicityArgs),
    /// No-return check for every y-direction splitting edge.
    Noreturn(commands::NoreturnArgs),
    /// Bounded Kronecker test of a direction spec.
    Kronecker(commands::KroneckerArgs),
    /// Exceptional-direction line families for a face-edge line.
    Lines(commands::LinesArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful exits; anything else is a
            // configuration error (exit 1).
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("POLYFLOW_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    let outcome = match cli.command {
        Command::Validate { manifold } => commands::validate(&manifold),
        Command::Trace(args) => commands::trace_cmd(&args),
        Command::Density(args) => commands::density(&args),
        Command::Frequency(args) => commands::frequency(&args),
        Command::Saddles(args) => commands::saddles(&args),
        Command::Split(args) => commands::split(&args),
        Command::Multiplicity(args) => commands::multiplicity(&args),
        Command::Noreturn(args) => commands::noreturn(&args),
        Command::Kronecker(args) => commands::kronecker(&args),
        Command::Lines(args) => commands::lines(&args),
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
