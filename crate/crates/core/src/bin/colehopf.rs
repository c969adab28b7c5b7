use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use colehopf::acceptance::AcceptanceOptions;
use colehopf::cli::{self, SweepRange};

#[derive(Parser)]
#[command(name = "colehopf", version, about = "Cole-Hopf heat-kernel mapping solver")]
struct Args {
    /// Suppress progress messages and warnings.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// March a scenario and write report.csv, snapshots and a manifest.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance criteria.
    Validate {
        /// Scale kernel-table weights by this factor (fault injection).
        #[arg(long, hide = true)]
        inject_kernel_fault: Option<f64>,
    },
    /// Density, current and velocity of a wave-function snapshot.
    Kinematics {
        /// One snapshot, or two time-stamped ones for the continuity residual.
        #[arg(required = true, num_args = 1..=2)]
        snapshots: Vec<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        hbar_over_m: f64,
        #[arg(long, default_value = cli::DEFAULT_OUTPUT)]
        out: PathBuf,
    },
    /// Classify fixed-point traces across a reaction-amplitude sweep.
    Bifurcation {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        sweep_from: f64,
        #[arg(long)]
        sweep_to: f64,
        #[arg(long)]
        sweep_steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match args.command {
        Command::Solve { config, out } => cli::cmd_solve(&config, out.as_deref(), args.quiet),
        Command::Validate { inject_kernel_fault } => {
            cli::cmd_validate(&AcceptanceOptions { kernel_fault: inject_kernel_fault })
        }
        Command::Kinematics { snapshots, hbar_over_m, out } => {
            cli::cmd_kinematics(&snapshots, hbar_over_m, &out, args.quiet)
        }
        Command::Bifurcation { config, sweep_from, sweep_to, sweep_steps, out } => cli::cmd_bifurcation(
            &config,
            SweepRange { from: sweep_from, to: sweep_to, steps: sweep_steps },
            out.as_deref(),
            args.quiet,
        ),
    };
    ExitCode::from(code as u8)
}
