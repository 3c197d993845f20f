//! `fatdist`: batch front end for the fat-distribution toolkit.
//!
//! Reports go to stdout as JSON; a human summary and the wall time go to
//! stderr. Exit codes: 0 ok, 1 check failed, 2 schema or usage, 3 numeric
//! failure, 4 no frame found, 5 primitives not exact, 6 jet system not
//! regular.

mod commands;
mod error;
mod output;
mod schema;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::Globals;
use error::{CliError, Exit};

#[derive(Debug, Parser)]
#[command(name = "fatdist", version, about = "Checks, frame builders and lifts for fat distributions")]
struct Cli {
    /// Relative rank tolerance; overrides the input file.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,

    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fatness, degree and structure checks; extra frame files are verified
    /// against the first input.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Builds and verifies a regular isotropic frame.
    Frame {
        file: PathBuf,
        /// horizontal_deg2, isocontact_deg2, horizontal_qcont or isocontact_qcont.
        #[arg(long)]
        regime: Option<String>,
        /// Number of steps.
        #[arg(short, long, default_value_t = 1)]
        k: usize,
        /// Also write the frame as an instance file.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Runs a randomized property suite.
    Verify {
        /// fat2-props, deg2-identities, qcont-props, curvature-cross,
        /// jets-oracle or liouville.
        suite: String,
        /// Instance to run the suite on instead of random draws.
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 100, value_name = "N")]
        trials: usize,
    },
    /// Lifts exact Lagrangian data on a grid to a horizontal curve.
    Lift {
        /// A liouville_model file and a grid file.
        #[arg(num_args = 2, required = true)]
        files: Vec<PathBuf>,
        /// Number of mesh halvings for preset grids.
        #[arg(long, default_value_t = 0, value_name = "K")]
        refine: usize,
    },
    /// Solves a jet system by triangular elimination.
    Jets {
        file: PathBuf,
        /// Cross-check against the dense least-squares solution.
        #[arg(long)]
        oracle: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Frame { .. } => "frame",
            Command::Verify { .. } => "verify",
            Command::Lift { .. } => "lift",
            Command::Jets { .. } => "jets",
        }
    }

    fn inputs(&self) -> Vec<String> {
        let show = |p: &PathBuf| p.display().to_string();
        match self {
            Command::Check { files } | Command::Lift { files, .. } => files.iter().map(show).collect(),
            Command::Frame { file, .. } | Command::Jets { file, .. } => vec![show(file)],
            Command::Verify { suite, file, .. } => {
                std::iter::once(suite.clone()).chain(file.iter().map(show)).collect()
            }
        }
    }
}

fn run(cli: &Cli) -> Result<output::Report, CliError> {
    let g = Globals {
        tol: cli.tol,
        seed: cli.seed,
    };
    match &cli.command {
        Command::Check { files } => commands::check(files, g),
        Command::Frame { file, regime, k, out } => {
            commands::frame(file, regime.as_deref(), *k, out.as_deref(), g)
        }
        Command::Verify { suite, file, trials } => suites::verify(suite, *trials, file.as_deref(), g),
        Command::Lift { files, refine } => commands::lift(files, *refine, g),
        Command::Jets { file, oracle } => commands::jets(file, *oracle, g),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let exit = match run(&cli) {
        Ok(report) => {
            println!("{}", report.to_json());
            eprintln!("{}", report.summary());
            if report.pass {
                Exit::Ok
            } else {
                Exit::CheckFailed
            }
        }
        Err(e) => {
            println!(
                "{}",
                output::error_json(cli.command.name(), &cli.command.inputs(), cli.seed, &e)
            );
            eprintln!("fatdist {}: {e}", cli.command.name());
            e.exit
        }
    };
    eprintln!("wall time {:.3} s", start.elapsed().as_secs_f64());
    ExitCode::from(exit.code() as u8)
}
