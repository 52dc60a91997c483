mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::CliError;

/// Design and analysis of a gapped ridge-waveguide Fabry-Perot microcavity.
#[derive(Parser, Debug)]
#[command(name = "gapcav", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Configuration file (or data CSV for `fit`).
    input: PathBuf,
    /// Directory for reports and tables.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the fundamental waveguide mode and export its field.
    Mode(Common),
    /// Gap loss versus gap width, optionally the round trip versus arm phase.
    GapScan {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "UM")]
        d_min: Option<f64>,
        #[arg(long, value_name = "UM")]
        d_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Also scan the arm phase behind the gap at the configured width.
        #[arg(long)]
        phase_scan: bool,
    },
    /// Fit mirror reflectivity and propagation loss to `length_um,finesse[,sigma]` data.
    Fit(Common),
    /// Coupling, loss budget and cooperativity, plus mirror-stack reflectivities.
    Budget {
        #[command(flatten)]
        common: Common,
        /// Leave the gap out of the intrinsic loss.
        #[arg(long)]
        no_gap: bool,
    },
    /// Potential across the gap and whether it traps.
    Trap(Common),
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Mode(c) => commands::mode(&c.input, &c.out),
        Command::GapScan { common, d_min, d_max, steps, phase_scan } => {
            commands::gap_scan(&common.input, &common.out, d_min, d_max, steps, phase_scan)
        }
        Command::Fit(c) => commands::fit(&c.input, &c.out),
        Command::Budget { common, no_gap } => commands::budget(&common.input, &common.out, no_gap),
        Command::Trap(c) => commands::trap(&c.input, &c.out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
