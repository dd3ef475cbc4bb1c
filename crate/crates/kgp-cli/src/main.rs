//! `kgp`: periodic solutions of the coupled Klein-Gordon system.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kgp_cli::commands;

#[derive(Parser)]
#[command(
    name = "kgp",
    version,
    about = "Spectral Galerkin solver for time-periodic states of two linearly coupled nonlinear Klein-Gordon equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Path to the JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sampling seed; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the configuration and run the hypothesis checkers.
    Check(Common),
    /// Compute one periodic state by Newton iteration.
    Solve(Common),
    /// Continue a solution through a list of coupling strengths.
    Sweep(Common),
    /// Invert the wave operator on its range and report kernel diagnostics.
    Represent(Common),
    /// Tabulate eigenvalues and spectral classes over the truncation.
    Spectrum(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::Check(c) => ("check", c),
        Command::Solve(c) => ("solve", c),
        Command::Sweep(c) => ("sweep", c),
        Command::Represent(c) => ("represent", c),
        Command::Spectrum(c) => ("spectrum", c),
    };
    match commands::dispatch(name, &common.config, common.out.clone(), common.seed) {
        Ok(code) => ExitCode::from(code as u8),
        Err(failure) => {
            eprintln!("kgp {name}: {failure}");
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
