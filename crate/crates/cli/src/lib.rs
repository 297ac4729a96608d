//! Command-line front end for the `delta-wedge` library: analytic bounds,
//! discrete solves, angle sweeps written as CSV, and verification runs.

use std::io::Write;
use std::path::PathBuf;

use thiserror::Error;

pub mod args;
pub mod commands;
pub mod params;
pub mod study;
pub mod sweep;

pub use args::{Args, Cli, Command, Mode};
pub use params::{resolve, Params};
pub use sweep::{read_csv, write_csv, SweepRow};

pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const VERIFY_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const NOT_CONVERGED: u8 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Bound(#[from] delta_wedge::BoundError),
    #[error(transparent)]
    Geometry(#[from] delta_wedge::geometry::GeometryError),
    #[error(transparent)]
    Discretization(#[from] delta_wedge::discretization::DiscretizationError),
    #[error(transparent)]
    Solver(#[from] delta_wedge::SolverError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Parse(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(_) => exit::NOT_CONVERGED,
            _ => exit::USAGE,
        }
    }
}

type Handler = fn(&Params, &mut dyn Write) -> Result<u8, CliError>;

/// Runs one command, writing the report to `out`. `env_seed` is the value
/// of `DELTA_WEDGE_SEED`, if set.
pub fn run(cli: &Cli, env_seed: Option<&str>, out: &mut dyn Write) -> Result<u8, CliError> {
    let (args, command): (&Args, Handler) = match &cli.command {
        Command::Bound(a) => (a, commands::cmd_bound),
        Command::Solve(a) => (a, commands::cmd_solve),
        Command::Sweep(a) => (a, commands::cmd_sweep),
        Command::Verify(a) => (a, commands::cmd_verify),
    };
    let params = resolve(args, env_seed)?;
    command(&params, out)
}
