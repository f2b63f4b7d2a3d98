//! `glpp`: batch driver for simulations, exact laws, identity checks and the
//! acceptance suite. Structured results go to JSON, bulk data to CSV, plots
//! to SVG.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use glpp::GlppError;

const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Parser)]
#[command(name = "glpp", version, about = "Generalised last passage percolation on cylinders and the quarter-plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the front-line chain and report empirical laws and speeds.
    Simulate(SimulateArgs),
    /// Exact stationary law of the front line for an integrable family.
    Exact(ExactArgs),
    /// Residuals of the cellular-automaton identities for a family.
    PcaCheck(PcaCheckArgs),
    /// Grow a quarter-plane box and report the shape of the front.
    Quarterplane(QuarterArgs),
    /// Run a named acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Seed for every random draw.
    #[arg(long, env = "GLPP_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Half the cylinder width.
    #[arg(long = "L")]
    l: usize,
    /// Family: shorthand ("geometric:0.5", "edge_lpp(poisson:1)"), JSON, or a JSON file.
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 1_000_000)]
    steps: u64,
    /// Defaults to a tenth of the steps.
    #[arg(long = "burn-in")]
    burn_in: Option<u64>,
    /// Independent replicas, seeded seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    replicas: u64,
    /// Worker threads for replicas.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Per-step CSV of the first replica.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Continuous-time dynamics (density families).
    #[arg(long)]
    continuous: bool,
    /// Time horizon of a continuous run.
    #[arg(long, default_value_t = 1e4)]
    horizon: f64,
    /// Run even if the no-explosion certificate fails.
    #[arg(long)]
    force: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[arg(long = "L")]
    l: usize,
    /// Base measure μ₀ of the integrable family.
    #[arg(long)]
    mu0: String,
    /// Age cap of the truncated sums.
    #[arg(long, default_value_t = 60)]
    cap: u64,
    /// Relative tolerance on the truncation estimate of Z.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Also compute the mean speed by both routes.
    #[arg(long)]
    speed: bool,
    /// Continuous family: quadrature for L ≤ 2, Monte Carlo above.
    #[arg(long)]
    continuous: bool,
    /// Monte Carlo samples per bridge for continuous L > 2.
    #[arg(long, default_value_t = 200_000)]
    samples: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
pub struct PcaCheckArgs {
    #[arg(long)]
    mu0: String,
    /// Caps s,t,u of the invariance grid.
    #[arg(long, default_value = "10,10,30")]
    grid: String,
    /// Caps of the eight-factor grid: starting values, targets.
    #[arg(long = "belyaev-grid", default_value = "6,20")]
    belyaev_grid: String,
    /// Residual above which the check fails.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QuarterArgs {
    /// Box side.
    #[arg(long = "N")]
    n: usize,
    #[arg(long)]
    family: String,
    /// Time whose front is reported.
    #[arg(long)]
    until: u64,
    /// Front plot with the limit shape overlaid when it is known.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Front corners as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suite name; only "desk" exists.
    #[arg(long, default_value = "desk")]
    suite: String,
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
    /// Full results as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

/// Failures of a command, each mapped to an exit status.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Certificate(String),
    Divergent(String),
    Other(String),
}

impl From<GlppError> for Failure {
    fn from(e: GlppError) -> Self {
        let msg = e.to_string();
        match e {
            GlppError::DivergentSqrtSum(_) => Failure::Divergent(msg),
            GlppError::CertificateFailed(_) | GlppError::TruncationNotConverged { .. } | GlppError::ExcessLeak(_) => {
                Failure::Certificate(msg)
            }
            GlppError::Parse(_)
            | GlppError::InvalidMeasure(_)
            | GlppError::InvalidBridge(_)
            | GlppError::CapExceeded { .. }
            | GlppError::StateSpaceTooLarge(_)
            | GlppError::InsufficientSamples(_)
            | GlppError::EmptyGrid
            | GlppError::BoxExhausted { .. }
            | GlppError::ParityViolation { .. } => Failure::Config(msg),
            _ => Failure::Other(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Exact(a) => commands::exact(a),
        Command::PcaCheck(a) => commands::pca_check(a),
        Command::Quarterplane(a) => commands::quarterplane(a),
        Command::Verify(a) => commands::verify(a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Config(m) => (2, m),
                Failure::Certificate(m) => (3, m),
                Failure::Divergent(m) => (4, m),
                Failure::Other(m) => (1, m),
            };
            eprintln!("glpp: {msg}");
            ExitCode::from(code)
        }
    }
}
