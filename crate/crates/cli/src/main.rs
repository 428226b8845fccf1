//! `adw`: batch driver for the damped-wave laboratory.

mod commands;
mod output;

use adw_core::config::Config;
use adw_core::AdwError;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "adw", version, about = "Anisotropically damped waves on the flat torus")]
struct Cli {
    /// JSON config file; defaults apply to anything left out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides output.directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Dotted override, e.g. `--set damping.variant=constant`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Worker threads for data-parallel loops.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// L_inf, D0 and the decay rate alpha = 2 min(-D0, L_inf).
    Rate,
    /// Anisotropic control check.
    Agcc,
    /// Truncated-generator spectrum and the eigenspace kernel check.
    Spectrum,
    /// Evolve initial data and fit the energy decay.
    Evolve,
    /// Gaussian-beam residuals and beam decay.
    Beam,
    /// Coherent-state scaling slopes.
    CoherentScaling,
    /// Run the acceptance suite.
    Verify {
        /// Only these criteria (comma separated ids).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
    /// Print the resolved config as JSON.
    ShowConfig,
}

/// Exit codes.
const INVALID_CONFIG: u8 = 1;
const NUMERICAL_FAILURE: u8 = 2;
const ACCEPTANCE_FAILURE: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { INVALID_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be >= 1");
            return ExitCode::from(INVALID_CONFIG);
        }
        adw_core::par::set_threads(n);
    }
    let mut config = match Config::load(cli.config.as_deref(), &cli.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(INVALID_CONFIG);
        }
    };
    if let Some(out) = cli.out {
        config.output.directory = out;
    }
    let result = match cli.command {
        Command::Rate => commands::rate(&config),
        Command::Agcc => commands::agcc(&config),
        Command::Spectrum => commands::spectrum(&config),
        Command::Evolve => commands::evolve(&config),
        Command::Beam => commands::beam(&config),
        Command::CoherentScaling => commands::coherent_scaling(&config),
        Command::Verify { only } => commands::verify(&config, &only),
        Command::ShowConfig => {
            println!("{}", serde_json::to_string_pretty(&config).expect("config serialises"));
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(ACCEPTANCE_FAILURE),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                AdwError::Config(_) | AdwError::InvalidParameter(_) => ExitCode::from(INVALID_CONFIG),
                _ => ExitCode::from(NUMERICAL_FAILURE),
            }
        }
    }
}
