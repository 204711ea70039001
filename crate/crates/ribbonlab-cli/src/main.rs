//! `ribbonlab` — batch front door for the dimension-reduction pipeline.
//!
//! Subcommands: `derive` (plate-model constants), `rod` (reduced density
//! tabulation), `shape` (minimal ribbon export), `gamma-check` (thickness
//! scaling sweep), and `verify` (acceptance suite).  Exit codes: 0 success,
//! 1 I/O error, 2 configuration error, 3 numeric failure, 4 acceptance
//! failure.

// Guards written as `!(a < b)` are deliberate: unlike `a >= b` they also
// reject NaN, which config validation must do.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{FlagOverrides, RunConfig};

/// CLI failure classes; each maps to one documented exit code.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(String),
    Numeric(String),
    Acceptance(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Acceptance(_) => 4,
        }
    }

    fn class(&self) -> &'static str {
        match self {
            CliError::Io(_) => "i/o error",
            CliError::Config(_) => "configuration error",
            CliError::Numeric(_) => "numeric failure",
            CliError::Acceptance(_) => "acceptance failure",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Config(m) | CliError::Numeric(m)
            | CliError::Acceptance(m) => m,
        }
    }
}

impl From<ribbonlab::Error> for CliError {
    fn from(e: ribbonlab::Error) -> Self {
        use ribbonlab::Error as E;
        match &e {
            E::InvalidArgument(_) | E::InvalidConfiguration(_) | E::UnsupportedTexture { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ribbonlab",
    version,
    about = "Plate and rod models of thin activated sheets: derivation, \
             tabulation, shape export, scaling checks, verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON configuration file; flags override file values
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Texture selection [default: twist]
    #[arg(long, global = true, value_name = "twist|splaybend|director|bilayer")]
    texture: Option<String>,

    /// Shear modulus [default: 1.0]
    #[arg(long, global = true)]
    mu: Option<f64>,

    /// Volumetric coupling ratio in (0, 1) [default: 0.3]
    #[arg(long, global = true)]
    gamma: Option<f64>,

    /// Activation slope [default: 1.0]
    #[arg(long, global = true)]
    alpha0: Option<f64>,

    /// Reference thickness scale [default: 1.0]
    #[arg(long, global = true)]
    h0: Option<f64>,

    /// Strip cut angle in radians, or `deg:` degrees [default: 0]
    #[arg(long, global = true, value_name = "ANGLE")]
    theta: Option<String>,

    /// Strip length [default: 2.0]
    #[arg(long, global = true)]
    length: Option<f64>,

    /// Strip width [default: 0.5]
    #[arg(long, global = true)]
    width: Option<f64>,

    /// Output path (report/CSV file, or shape file stem) [default: stdout]
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Rod grid `MIN:MAX:N[,MIN:MAX:N]` [default: density window at 201 points]
    #[arg(long, global = true, value_name = "SPEC", allow_hyphen_values = true)]
    grid: Option<String>,

    /// Comma-separated thickness list [default: 1e-1,3e-2,1e-2,3e-3,1e-3]
    #[arg(long, global = true, value_name = "LIST")]
    h: Option<String>,

    /// Pick the shape rates from the rod minimum set: 0 = left endpoint,
    /// 0.5 = midpoint, 1 = right endpoint
    #[arg(long = "from-min-set", global = true, value_name = "T")]
    from_min_set: Option<f64>,

    /// Thickness-profile quadrature order [default: 48]
    #[arg(long, global = true, value_name = "N")]
    quad: Option<usize>,

    /// Explicit flexure rate for shape export
    #[arg(long, global = true, allow_hyphen_values = true)]
    flexure: Option<f64>,

    /// Explicit torsion rate for shape export
    #[arg(long, global = true, allow_hyphen_values = true)]
    torsion: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive plate-model constants (closed form, oracle, reference comparison)
    Derive,
    /// Tabulate the rod density over a grid with the minimum-set footer
    Rod,
    /// Export a minimal-energy ribbon as OBJ mesh and trajectory CSV
    Shape,
    /// Sweep the rescaled 3D energy over thicknesses and fit the gap decay
    GammaCheck,
    /// Run the acceptance checks and the continuity negative control
    Verify {
        /// Only run checks whose name contains this substring
        filter: Option<String>,
    },
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let flags = FlagOverrides {
        texture: cli.texture.clone(),
        mu: cli.mu,
        gamma: cli.gamma,
        alpha0: cli.alpha0,
        h0: cli.h0,
        theta: cli.theta.clone(),
        length: cli.length,
        width: cli.width,
        out: cli.out.clone(),
        grid: cli.grid.clone(),
        h: cli.h.clone(),
        from_min_set: cli.from_min_set,
        quad: cli.quad,
        flexure: cli.flexure,
        torsion: cli.torsion,
    };

    let base = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Io(format!("cannot read config {}: {e}", path.display()))
            })?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    let resolved = base.overlay(&flags)?.resolve()?;

    match &cli.command {
        Command::Derive => commands::cmd_derive(&resolved),
        Command::Rod => commands::cmd_rod(&resolved),
        Command::Shape => commands::cmd_shape(&resolved),
        Command::GammaCheck => commands::cmd_gamma_check(&resolved),
        Command::Verify { filter } => commands::cmd_verify(&resolved, filter.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("{}: {}", error.class(), error.message());
            ExitCode::from(error.exit_code())
        }
    }
}
