//! `nlsr`: simulate collective spontaneous emission with Stark coupling.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "nlsr", version, about = "Non-Langevin collective spontaneous emission")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the master equation and write populations and intensity
    Simulate(RunConfig),
    /// Report suppression thresholds
    Critical(RunConfig),
    /// Compare the expanded evolution increment with its closed form
    ItoVerify(RunConfig),
    /// Average quantum-jump trajectories
    Jumps(RunConfig),
    /// Simulate with the given eta and with eta = 0, and summarize both pulses
    Compare(RunConfig),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Verification(String),
    Integration(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Verification(_) => 1,
            Self::Usage(_) => 2,
            Self::Integration(_) => 3,
            Self::Io(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Self::Usage(_) => "usage",
            Self::Verification(_) => "verification",
            Self::Integration(_) => "integration",
            Self::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Verification(m) | Self::Integration(m) | Self::Io(m) => m,
        }
    }
}

impl From<nlsr_core::Error> for CliError {
    fn from(e: nlsr_core::Error) -> Self {
        use nlsr_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::OutsideMultiplet { .. } | E::DimensionMismatch { .. } | E::InvalidState(_) => {
                Self::Usage(e.to_string())
            }
            E::StepUnderflow { .. } | E::InvariantBreach { .. } | E::ZeroNormJump { .. } => {
                Self::Integration(e.to_string())
            }
        }
    }
}

fn fail(err: &CliError) -> ExitCode {
    let line = serde_json::json!({ "error": err.kind(), "message": err.message() });
    eprintln!("{line}");
    ExitCode::from(err.code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let msg = first.strip_prefix("error: ").unwrap_or(first);
            return fail(&CliError::Usage(msg.to_string()));
        }
    };

    let result = match cli.command {
        Command::Simulate(c) => c.resolve().and_then(|c| commands::simulate(&c)),
        Command::Critical(c) => c.resolve().and_then(|c| commands::critical(&c)),
        Command::ItoVerify(c) => c.resolve().and_then(|c| commands::ito_verify(&c)),
        Command::Jumps(c) => c.resolve().and_then(|c| commands::jumps(&c)),
        Command::Compare(c) => c.resolve().and_then(|c| commands::compare(&c)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
