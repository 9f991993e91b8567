//! `corrmine`: generate models and data, screen for correlations, fit
//! sparse precision matrices, and tabulate design curves, Monte Carlo phase
//! transitions and sample-complexity regimes.
//!
//! Exit codes: 0 on success, 2 for invalid configuration or input, 3 for
//! numerical failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod grid;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use grid::Grid;
use output::Format;

#[derive(Debug, Parser)]
#[command(name = "corrmine", version, about = "Correlation mining for the sample-starved regime")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Master seed; every random draw derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses one per core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Table format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Write a model (sparse triplets) and optionally sampled data (CSV).
    #[command(subcommand)]
    Generate(Generate),
    /// Threshold the sample (partial) correlation of a data set.
    Screen(ScreenArgs),
    /// Fit CONCORD along a decreasing penalty grid.
    Concord(ConcordArgs),
    /// Required sample size or smallest detectable correlation.
    DesignCurve(DesignArgs),
    /// Monte Carlo false-edge probability versus threshold.
    Phase(PhaseArgs),
    /// Sample-complexity isoclines.
    Regimes(RegimesArgs),
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Generate {
    /// Finite-difference Poisson field on an N1 × N2 grid.
    Poisson(PoissonArgs),
    /// Row-sparse diagonally dominant random precision.
    Sparse(SparseArgs),
    /// Kronecker product of two sparse factors.
    Kronecker(KroneckerArgs),
    /// Gaussian samples from a model file.
    Sample(SampleArgs),
}

#[derive(Debug, Args, Serialize)]
struct PoissonArgs {
    #[arg(long, default_value_t = 30)]
    n1: usize,
    #[arg(long, default_value_t = 30)]
    n2: usize,
    /// Grid increment along the first axis; defaults to 1/N1.
    #[arg(long)]
    delta1: Option<f64>,
    /// Grid increment along the second axis; defaults to 1/N2.
    #[arg(long)]
    delta2: Option<f64>,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Samples to draw; 0 writes the model only.
    #[arg(long, default_value_t = 0)]
    samples: usize,
}

#[derive(Debug, Args, Serialize)]
struct SparseArgs {
    #[arg(long)]
    p: usize,
    /// Off-diagonal nonzeros per row.
    #[arg(long)]
    s: usize,
    #[arg(long, default_value_t = 0.5)]
    magnitude_lo: f64,
    #[arg(long, default_value_t = 1.0)]
    magnitude_hi: f64,
    #[arg(long, default_value_t = 0)]
    samples: usize,
}

#[derive(Debug, Args, Serialize)]
struct KroneckerArgs {
    #[arg(long)]
    q: usize,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 1)]
    s_a: usize,
    #[arg(long, default_value_t = 1)]
    s_b: usize,
    #[arg(long, default_value_t = 0)]
    samples: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModelRole {
    Precision,
    Covariance,
}

#[derive(Debug, Args, Serialize)]
struct SampleArgs {
    /// Model in sparse-triplet format.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelRole::Precision)]
    role: ModelRole,
    #[arg(long)]
    samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Statistic {
    Partial,
    Correlation,
}

#[derive(Debug, Args, Serialize)]
struct ScreenArgs {
    /// Data CSV, one row per sample.
    #[arg(long)]
    data: PathBuf,
    /// Threshold on |r_ij|.
    #[arg(long)]
    rho: f64,
    #[arg(long, value_enum, default_value_t = Statistic::Partial)]
    statistic: Statistic,
    /// Report vertices of at least this degree.
    #[arg(long, default_value_t = 1)]
    hub_degree: usize,
    /// Range search over unit-sphere points instead of all pairs.
    #[arg(long)]
    fast: bool,
    /// Radius slack for the approximate range search (requires --fast).
    #[arg(long)]
    eps: Option<f64>,
    /// True precision (sparse triplets) to score the edge set against.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct ConcordArgs {
    #[arg(long)]
    data: PathBuf,
    /// Explicit decreasing penalty grid; overrides --path-len.
    #[arg(long)]
    lambdas: Option<Grid>,
    /// Number of penalties, log-spaced down from lambda_max.
    #[arg(long, default_value_t = 20)]
    path_len: usize,
    /// Smallest penalty as a fraction of lambda_max.
    #[arg(long, default_value_t = 0.01)]
    min_ratio: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_sweeps: usize,
    /// Rescale columns to unit variance before fitting.
    #[arg(long)]
    standardize: bool,
    /// True precision (sparse triplets); selects the best-F1 penalty.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum DesignMode {
    /// Minimum n for each (p, rho).
    SampleSize,
    /// Minimum detectable rho for each (n, p).
    Detectable,
}

#[derive(Debug, Args, Serialize)]
struct DesignArgs {
    #[arg(long, value_enum, default_value_t = DesignMode::SampleSize)]
    mode: DesignMode,
    #[arg(long, default_value = "1e2:1e10:9:log")]
    p: Grid,
    /// Thresholds (sample-size mode).
    #[arg(long, default_value = "0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
    rho: Grid,
    /// Sample sizes (detectable mode).
    #[arg(long, default_value = "20,50,100,200,500,1000")]
    n: Grid,
    #[arg(long, default_value_t = 1e-4)]
    fwer: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum NullKind {
    Identity,
    Block,
}

#[derive(Debug, Args, Serialize)]
struct PhaseArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long, default_value = "0.05:0.95:19")]
    rho: Grid,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = NullKind::Identity)]
    null: NullKind,
    #[arg(long, default_value_t = 10)]
    block_size: usize,
    #[arg(long, default_value_t = 0.5)]
    block_correlation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum RegimeTable {
    /// Error bounds under structural priors, square q = r = √p layout.
    Contextual,
    /// Risk bounds of the inference-task ladder.
    Tasks,
}

#[derive(Debug, Args, Serialize)]
struct RegimesArgs {
    #[arg(long, value_enum, default_value_t = RegimeTable::Tasks)]
    table: RegimeTable,
    /// Bound level held fixed along each isocline.
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    level: f64,
    #[arg(long, default_value = "1e2:1e6:5:log")]
    p: Grid,
    /// Fixed M for the log M terms; defaults to max(q, r, n).
    #[arg(long)]
    m: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.5)]
    nu: f64,
    #[arg(long, default_value_t = 10)]
    screening_n: u64,
}

/// A failed run: message plus exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure { code: 2, message: format!("{}: {e}", path.display()) }
    }

    pub fn output(e: impl fmt::Display) -> Self {
        Failure { code: 2, message: format!("writing output: {e}") }
    }
}

impl From<corrmine::Error> for Failure {
    fn from(e: corrmine::Error) -> Self {
        Failure { code: if e.is_numerical() { 3 } else { 2 }, message: e.to_string() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| commands::run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
