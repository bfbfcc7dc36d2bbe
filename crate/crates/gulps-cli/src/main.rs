//! Command-line front end: ISA configuration, target input, decomposition
//! output, trajectory export, circuit-polytope diagnostics and benchmark
//! campaigns. All structured formats are versioned JSON; tabular exports are
//! CSV headed by a comment line carrying the tool version and flag line.

mod commands;
mod formats;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gulps", version, about = "Two-qubit unitary synthesis over native gate sets")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decompose a target unitary into basis gates and local rotations
    Decompose(commands::decompose::Args),
    /// Export the Weyl-chamber trajectory of a stored decomposition as CSV
    Trajectory(commands::trajectory::Args),
    /// Replay a stored decomposition and re-derive its verification report
    Verify(commands::verify::Args),
    /// Benchmark campaigns: sentence-determination timing or convergence vs depth
    Bench(commands::bench::Args),
    /// Depth-2 circuit-polytope diagnostics: row dump and membership tests
    Polytope(commands::polytope::Args),
}

/// Default RNG seed, overridable through the GULPS_SEED environment variable.
pub(crate) fn default_seed() -> u64 {
    std::env::var("GULPS_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| gulps::synth::DecomposeOptions::default().seed)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Decompose(args) => commands::decompose::run(args),
        Cmd::Trajectory(args) => commands::trajectory::run(args),
        Cmd::Verify(args) => commands::verify::run(args),
        Cmd::Bench(args) => commands::bench::run(args),
        Cmd::Polytope(args) => commands::polytope::run(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
