//! `ust` command-line tool.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use ust_core::UstError;

#[derive(Parser, Debug)]
#[command(name = "ust", version, about = "Unbalanced Sobolev transport on weighted graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Pairwise distance matrix of the measures.
    Dist(DistArgs),
    /// Kernel matrix exp(-t d) of the pairwise distances.
    Gram(GramArgs),
    /// Timing rows for preprocessing, per-pair evaluation and the exact oracle.
    Bench(BenchArgs),
    /// Per-node shortest-path uniqueness report.
    Validate(ValidateArgs),
    /// Random graph over farthest-point cluster centers.
    BuildGraph(BuildGraphArgs),
    /// Exact linear-program reference values for one pair of measures.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    /// Order p in [1, inf].
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long = "w1-root", default_value_t = 1.0)]
    pub w1_root: f64,
    #[arg(long = "w2-root", default_value_t = 1.0)]
    pub w2_root: f64,
    /// `length`, or a file with one edge weight per line.
    #[arg(long, default_value = "length")]
    pub omega: String,
}

#[derive(Args, Debug, Clone)]
pub struct RootArgs {
    /// Number of averaged roots.
    #[arg(long, default_value_t = ust_core::slicing::DEFAULT_SLICES)]
    pub slices: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use this single root instead of sampling.
    #[arg(long)]
    pub root: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    #[arg(long)]
    pub graph: std::path::PathBuf,
    #[arg(long)]
    pub measures: std::path::PathBuf,
}

#[derive(Args, Debug)]
pub struct DistArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub roots: RootArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct GramArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub roots: RootArgs,
    /// Bandwidth multiplier.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub roots: RootArgs,
    /// Maximum number of measure pairs timed.
    #[arg(long, default_value_t = 100)]
    pub max_pairs: usize,
    /// Also time the exact oracle on each timed pair.
    #[arg(long)]
    pub oracle: bool,
    /// Points in the synthetic support-size sweep used for the linear fit; 0 disables it.
    #[arg(long, default_value_t = 12)]
    pub sweep: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long)]
    pub graph: std::path::PathBuf,
    #[arg(long, default_value_t = ust_core::graph::DEFAULT_TIE_TOL)]
    pub tie_tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct BuildGraphArgs {
    /// Number of clusters (graph nodes).
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value = "log")]
    pub density: ust_core::builders::GraphDensity,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Point cloud, one whitespace-separated point per line; M uniform planar points when absent.
    #[arg(long)]
    pub points: Option<std::path::PathBuf>,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    /// Also write the point-to-node assignment, one node id per line.
    #[arg(long)]
    pub assignment: Option<std::path::PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    Et,
    Wasserstein,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value = "et")]
    pub kind: OracleKind,
    #[arg(long, default_value_t = 0)]
    pub i: usize,
    #[arg(long, default_value_t = 1)]
    pub j: usize,
    /// Slope of the root-distance weights; defaults to b.
    #[arg(long)]
    pub a1: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub root: Option<usize>,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub kind: String,
    pub code: u8,
    pub message: String,
}

impl From<UstError> for Failure {
    fn from(e: UstError) -> Self {
        let code = if e.is_math_domain() {
            3
        } else if matches!(e, UstError::DegenerateCycling(_)) {
            4
        } else {
            2
        };
        Failure {
            kind: e.kind().to_string(),
            code,
            message: e.to_string(),
        }
    }
}

impl Failure {
    pub fn input(kind: &str, message: impl Into<String>) -> Self {
        Failure {
            kind: kind.to_string(),
            code: 2,
            message: message.into(),
        }
    }
}

fn report(f: &Failure) {
    eprintln!("{}", json!({"error": f.kind, "code": f.code, "message": f.message}));
}

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|info| {
        eprintln!(
            "{}",
            json!({"error": "Internal", "code": 4, "message": info.to_string()})
        );
    }));
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| commands::run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            report(&f);
            ExitCode::from(f.code)
        }
        Err(_) => ExitCode::from(4),
    }
}
