//! `frenetnd`: command-line front end for the curve geometry toolkit.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use frenetnd::{selftest, ErrorCategory};

mod commands;
mod input;

#[derive(Debug, Parser)]
#[command(name = "frenetnd", version, about = "Curvatures, reconstruction and spin chains for curves in n dimensions")]
pub struct Cli {
    /// Seed for every randomized preset and harness.
    #[arg(long, global = true, env = "FRENETND_SEED", default_value_t = selftest::DEFAULT_SEED)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curvature profile of sampled or analytic curve data.
    Curvatures(CurvaturesArgs),
    /// Integrate a curvature profile back to a curve.
    Reconstruct(ReconstructArgs),
    /// Curvatures and reconstruction from derivative norms alone.
    Invariants(InvariantsArgs),
    /// Decide whether two sampled curves differ by a rigid motion.
    Congruent(CongruentArgs),
    /// Check curvature distortion bounds under an affine map.
    Distort(DistortArgs),
    /// Simulate the generalized Heisenberg spin chain.
    Heisenberg(HeisenbergArgs),
    /// Run the property suite and print one line per criterion.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Helix,
    Circle,
    DoubleHelix,
    Moment,
    Line,
    RandomFourier,
}

/// Where curve samples come from: a file or a closed-form preset.
#[derive(Debug, Args)]
pub struct CurveSource {
    /// Samples as CSV (`t,x1..xn`) or JSON (chosen by extension).
    #[arg(long, conflicts_with = "preset")]
    pub input: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub preset: Option<Preset>,

    /// Helix radius.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,

    /// Helix pitch.
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,

    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,

    /// Second frequency of the double helix.
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,

    /// Ambient dimension for `moment`, `line` and `random-fourier`.
    #[arg(long, default_value_t = 3)]
    pub dim: usize,

    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,

    #[arg(long, default_value_t = std::f64::consts::TAU)]
    pub t1: f64,

    /// Sample spacing.
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
}

#[derive(Debug, Args)]
pub struct CurvaturesArgs {
    #[command(flatten)]
    pub source: CurveSource,

    /// Stencil accuracy order.
    #[arg(long, default_value_t = 4)]
    pub order: usize,

    /// Use closed-form derivatives of the preset instead of stencils.
    #[arg(long, requires = "preset")]
    pub exact: bool,

    /// Profile destination: JSON, or CSV columns when the extension is `.csv`.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Per-point records with dual-path residuals, as JSON lines.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Curvature profile JSON.
    #[arg(long)]
    pub profile: PathBuf,

    /// Samples destination, CSV or JSON by extension (stdout CSV if absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InvariantsArgs {
    #[command(flatten)]
    pub source: CurveSource,

    /// Norm profile JSON, used instead of samples.
    #[arg(long, conflicts_with_all = ["input", "preset"])]
    pub norms: Option<PathBuf>,

    #[arg(long, default_value_t = 4)]
    pub order: usize,

    /// Recovered curvature profile (JSON, or CSV by extension).
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Where to write the norm profile computed from samples.
    #[arg(long)]
    pub norms_output: Option<PathBuf>,

    /// Where to write the rebuilt curve (CSV or JSON by extension).
    #[arg(long)]
    pub curve_output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CongruentArgs {
    pub first: PathBuf,
    pub second: PathBuf,

    /// Pointwise relative tolerance on the norm profiles.
    #[arg(long, default_value_t = frenetnd::invariants::DEFAULT_CONGRUENCE_RTOL)]
    pub rtol: f64,

    #[arg(long, default_value_t = 4)]
    pub order: usize,

    /// Verdict and diagnostics as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistortArgs {
    #[command(flatten)]
    pub source: CurveSource,

    /// Linear part: n lines of n whitespace separated reals.
    #[arg(long, required_unless_present = "monte_carlo")]
    pub matrix: Option<PathBuf>,

    /// Translation as comma separated reals (zero if absent).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub translation: Option<Vec<f64>>,

    #[arg(long, default_value_t = 4)]
    pub order: usize,

    /// Use closed-form derivatives of the preset instead of stencils.
    #[arg(long, requires = "preset")]
    pub exact: bool,

    /// Run this many random (curve point, map) trials instead.
    #[arg(long, conflicts_with_all = ["matrix", "input", "preset"])]
    pub monte_carlo: Option<usize>,

    /// Dimensions cycled through by the Monte-Carlo harness.
    #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
    pub dims: Vec<usize>,

    /// Report destination (stdout if absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ChainPreset {
    GreatCircle,
    Random,
    Constant,
}

#[derive(Debug, Args)]
pub struct HeisenbergArgs {
    #[arg(long, value_enum, default_value_t = ChainPreset::Random)]
    pub preset: ChainPreset,

    #[arg(long, default_value_t = 4)]
    pub dim: usize,

    /// Number of lattice sites on the period 2π.
    #[arg(long, default_value_t = 128)]
    pub sites: usize,

    /// Winding number of the great-circle wave.
    #[arg(long, default_value_t = 1.0)]
    pub wave: f64,

    /// Fourier modes of the random preset.
    #[arg(long, default_value_t = 3)]
    pub modes: usize,

    /// Time step; derived from `--cfl` when absent.
    #[arg(long)]
    pub dt: Option<f64>,

    #[arg(long, default_value_t = frenetnd::heisenberg::DEFAULT_CFL)]
    pub cfl: f64,

    #[arg(long, default_value_t = 0.1)]
    pub t_end: f64,

    /// Number of snapshots after the initial one.
    #[arg(long, default_value_t = 10)]
    pub outputs: usize,

    /// Accuracy order of the periodic stencils.
    #[arg(long, default_value_t = 4)]
    pub order: usize,

    /// Trajectory as JSON lines, one chain per output time.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,

    /// Conserved-quantity report JSON (stdout if absent).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Run only this criterion.
    #[arg(long)]
    pub criterion: Option<usize>,
}

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_DEGENERATE: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;
pub const EXIT_SELFTEST: u8 = 5;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err.category() {
                ErrorCategory::Input => EXIT_INPUT,
                ErrorCategory::Degenerate => EXIT_DEGENERATE,
                ErrorCategory::Numerical => EXIT_NUMERICAL,
            })
        }
    }
}
