//! `ellhyp`: reproducible experiments on mixed elliptic-hyperbolic problems.
//!
//! Exit status: 0 success, 2 configuration error, 3 domain or precondition
//! error, 4 solver failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use ellhyp::energy::EnergyError;
use ellhyp::friedrichs::FriedrichsError;
use ellhyp::geometry::GeometryError;
use ellhyp::grid::GridError;
use ellhyp::hodge_disc::HodgeDiscError;
use ellhyp::io::IoError;
use ellhyp::linalg::LinalgError;
use ellhyp::surfaces::SurfaceError;

#[derive(Debug, Parser)]
#[command(
    name = "ellhyp",
    version,
    about = "Experiments on elliptic-hyperbolic variational equations"
)]
pub struct Cli {
    /// JSON object of flag values (keys are long flag names; `command` may
    /// name the subcommand). Flags on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Primary output file; stdout if absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Summary JSON file; stderr if absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DensityName {
    Euclidean,
    Minkowski,
    Polytropic,
    Unit,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[arg(long, value_enum, default_value_t = DensityName::Euclidean)]
    density: DensityName,
    /// Adiabatic exponent of the polytropic density.
    #[arg(long, default_value_t = 1.4)]
    gamma: f64,
}

#[derive(Debug, Args)]
pub struct Rect {
    #[arg(long, default_value_t = -2.0)]
    xmin: f64,
    #[arg(long, default_value_t = 2.0)]
    xmax: f64,
    #[arg(long, default_value_t = -2.0)]
    ymin: f64,
    #[arg(long, default_value_t = 2.0)]
    ymax: f64,
    #[arg(long, default_value_t = 101)]
    nx: usize,
    #[arg(long, default_value_t = 101)]
    ny: usize,
}

#[derive(Debug, Args)]
pub struct LensArgs {
    /// Abscissa of the chord cutting off the hyperbolic cap.
    #[arg(long, default_value_t = 0.5)]
    x0: f64,
    /// Inner radius of the elliptic sector.
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KPreset {
    /// `K(η) = η − η_crit`.
    KeldyshLinear,
    /// Coefficients from `--k-coeffs`, lowest degree first.
    Polynomial,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    #[arg(long, value_enum, default_value_t = KPreset::KeldyshLinear)]
    k_preset: KPreset,
    #[arg(long, default_value_t = 0.5)]
    eta_crit: f64,
    #[arg(long, value_delimiter = ',', action = ArgAction::Set)]
    k_coeffs: Vec<f64>,
    /// Outer radius `R` of the disc.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Lower-order coefficient `k`.
    #[arg(long, default_value_t = 1.0)]
    coupling: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = -1.0)]
    tau: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ResidualKind {
    MinkowskiGraph,
    EuclideanMinimal,
    LorentzMaximal,
    /// Closedness and coclosedness of a 1-form under `--density`.
    Hodge,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum HeadingArg {
    Outward,
    TowardCircle,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SamplerArg {
    Constant,
    Gaussian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RhsArg {
    Zero,
    /// Right-hand side and boundary value of `u = sin(ξ)·η²/2`.
    Manufactured,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Direct,
    Cgls,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discriminant of the hodograph operator over a rectangle, as a field file.
    ClassifyMap {
        #[command(flatten)]
        rect: Rect,
        /// Band around zero classified as parabolic in the summary.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Characteristics from ideal points on a circle, as CSV.
    Chars {
        /// Number of start points, equally spaced in angle.
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 1.5)]
        start_radius: f64,
        #[arg(long, value_enum, default_value_t = BranchArg::Both)]
        branch: BranchArg,
        #[arg(long, value_enum, default_value_t = HeadingArg::Outward)]
        heading: HeadingArg,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[command(flatten)]
        output: Output,
    },
    /// The lens domain and its boundary segments, as JSON.
    Domain {
        #[command(flatten)]
        lens: LensArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Pointwise residual of an input field.
    Residual {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: ResidualKind,
        #[command(flatten)]
        density: DensityArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Legendre transform of a scalar field onto the hodograph plane.
    Legendre {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
        #[arg(long, default_value_t = 1e-8)]
        hessian_tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Dual potential of a closed and coclosed 1-form.
    Dualize {
        /// 1-form field file; alternatively use `--constant`.
        #[arg(long, conflicts_with = "constant")]
        input: Option<PathBuf>,
        /// Constant form `(c1, c2)` sampled on the rectangle.
        #[arg(long, value_delimiter = ',', action = ArgAction::Set)]
        constant: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.0)]
        xmin: f64,
        #[arg(long, default_value_t = 1.0)]
        xmax: f64,
        #[arg(long, default_value_t = 0.0)]
        ymin: f64,
        #[arg(long, default_value_t = 1.0)]
        ymax: f64,
        #[arg(long, default_value_t = 33)]
        nx: usize,
        #[arg(long, default_value_t = 33)]
        ny: usize,
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long, default_value_t = 1e-8)]
        closed_tol: f64,
        #[arg(long, default_value_t = 1e-8)]
        path_tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Ball energies and the conformal column `r^(4−n) E(B_r)`, as CSV.
    EnergyProfile {
        #[arg(long, default_value_t = 5)]
        dim: usize,
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long, value_enum, default_value_t = SamplerArg::Constant)]
        sampler: SamplerArg,
        /// Value of the constant sampler.
        #[arg(long, default_value_t = 1.0)]
        q0: f64,
        /// Explicit radii; otherwise `--count` equally spaced in `[rmin, rmax]`.
        #[arg(long, value_delimiter = ',', action = ArgAction::Set)]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 0.5)]
        rmin: f64,
        #[arg(long, default_value_t = 4.0)]
        rmax: f64,
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[arg(long, default_value_t = 32)]
        radial: usize,
        #[arg(long, default_value_t = 8)]
        angular: usize,
        /// Declare the field stationary, making monotonicity a hard check.
        #[arg(long)]
        stationary: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Least-squares strong solutions of the Keldysh system, one CSV row per resolution.
    SolveKeldysh {
        #[command(flatten)]
        system: SystemArgs,
        /// Multiplier parameters; chosen automatically unless `--c` is given.
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, value_enum, default_value_t = RhsArg::Manufactured)]
        rhs: RhsArg,
        #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_values_t = vec![16, 32])]
        resolutions: Vec<usize>,
        #[arg(long, value_enum, default_value_t = MethodArg::Direct)]
        method: MethodArg,
        #[arg(long, default_value_t = 1.0)]
        penalty: f64,
        /// Iteration cap for `--method cgls`.
        #[arg(long, default_value_t = 200_000)]
        max_iter: usize,
        /// Field file for the finest solution.
        #[arg(long)]
        field: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Checks the positivity conditions for a multiplier and boundary pair.
    VerifySympos {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Homogeneous open problem on the lens: the solution should vanish.
    UniquenessDemo {
        #[command(flatten)]
        lens: LensArgs,
        #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_values_t = vec![16, 32, 64])]
        resolutions: Vec<usize>,
        /// Use the iterative elliptic solver.
        #[arg(long)]
        iterative: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Gap between the induced and a perturbed prescribed trace on the characteristic sides.
    Overdetermination {
        #[command(flatten)]
        lens: LensArgs,
        #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_values_t = vec![16, 32, 64])]
        resolutions: Vec<usize>,
        #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
        perturbation: f64,
        #[command(flatten)]
        output: Output,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<config::ConfigError>() || cause.is::<std::io::Error>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<IoError>() {
            return if matches!(e, IoError::Grid(_)) { 3 } else { 2 };
        }
        if let Some(e) = cause.downcast_ref::<HodgeDiscError>() {
            return match e {
                HodgeDiscError::NonConvergence(_) | HodgeDiscError::FoliationGap { .. } => 4,
                _ => 3,
            };
        }
        if let Some(e) = cause.downcast_ref::<FriedrichsError>() {
            return if matches!(e, FriedrichsError::SolverBreakdown(_)) {
                4
            } else {
                3
            };
        }
        if cause.is::<LinalgError>() {
            return 4;
        }
        if cause.is::<GeometryError>()
            || cause.is::<GridError>()
            || cause.is::<SurfaceError>()
            || cause.is::<EnergyError>()
        {
            return 3;
        }
    }
    4
}

/// The error chain on one line, skipping causes already quoted by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !msg.contains(&text) {
            if !msg.is_empty() {
                msg.push_str(": ");
            }
            msg.push_str(&text);
        }
    }
    msg
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cmd =
        Cli::command().mut_subcommands(|s| s.args_override_self(true).allow_negative_numbers(true));
    let cli = match cmd
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
