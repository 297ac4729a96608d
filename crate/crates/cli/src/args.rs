use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "delta-wedge",
    version,
    about = "Spectral lower bounds for δ-interactions on stars of rays, checked against finite differences"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the analytic lower bound and its coupling split.
    Bound(Args),
    /// Assemble the discrete operator and compute its lowest eigenvalues.
    Solve(Args),
    /// Bounds and ground energies over a list of opening angles, as CSV.
    Sweep(Args),
    /// Run a sweep and check the bounds against it.
    Verify(Args),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Two rays at opening angle φ (a broken line).
    Angle,
    /// Two full lines crossing at angle φ.
    Lines,
    /// Arbitrary rays given with --rays.
    Star,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Args {
    /// Configuration family; may also come from the config file.
    #[arg(value_enum)]
    pub mode: Option<Mode>,

    /// Coupling strength α.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,

    /// Opening angle(s) in degrees, comma separated.
    #[arg(long = "phi-deg", value_delimiter = ',', allow_negative_numbers = true,
          conflicts_with_all = ["phi_rad", "phi_range_deg"])]
    pub phi_deg: Vec<f64>,

    /// Opening angle(s) in radians, comma separated.
    #[arg(
        long = "phi-rad",
        value_delimiter = ',',
        allow_negative_numbers = true,
        conflicts_with = "phi_range_deg"
    )]
    pub phi_rad: Vec<f64>,

    /// Inclusive range of angles in degrees.
    #[arg(long = "phi-range-deg", num_args = 3, value_names = ["START", "END", "STEP"])]
    pub phi_range_deg: Vec<f64>,

    /// Star rays as DEG:COUPLING pairs, comma separated (star mode).
    #[arg(long, value_delimiter = ',')]
    pub rays: Vec<String>,

    /// Half-width L of the box [-L, L]².
    #[arg(long = "half-width", visible_alias = "L")]
    pub half_width: Option<f64>,

    /// Grid spacing.
    #[arg(long)]
    pub h: Option<f64>,

    /// Number of eigenvalues to compute.
    #[arg(long)]
    pub k: Option<usize>,

    /// Relative residual tolerance of the eigensolver.
    #[arg(long)]
    pub tol: Option<f64>,

    /// Allowed discretization margin in the verification checks.
    #[arg(long = "tol-disc")]
    pub tol_disc: Option<f64>,

    /// Plain key=value file (alpha, phi_deg, L, h, k, tol, mode, out).
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// CSV output file.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Two-column plot data output file.
    #[arg(long = "plot-data")]
    pub plot_data: Option<PathBuf>,

    /// Matrix dump of the assembled operator (solve only).
    #[arg(long = "dump-matrix")]
    pub dump_matrix: Option<PathBuf>,

    /// Also run h ∈ {0.2, 0.1, 0.05} on the straight line and report the
    /// measured discretization error.
    #[arg(long = "convergence-study")]
    pub convergence_study: bool,

    /// Multiply the analytic bound by this factor (fault injection).
    #[arg(long = "fault-bound-scale", hide = true)]
    pub fault_bound_scale: Option<f64>,

    /// Cap on linear solves per eigenvalue computation.
    #[arg(long = "max-applications", hide = true)]
    pub max_applications: Option<usize>,
}
