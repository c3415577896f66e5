//! depthreg: depth-based local regression from the command line.
//!
//! Exit codes: 0 on success, 2 for input problems (files, shapes,
//! arguments), 3 when a computation hits a numerical degeneracy such as
//! an empty neighborhood or a zero-scale direction.

mod commands;
mod numfmt;
mod svg;

use clap::{Args, Parser, Subcommand};
use depthreg::depth::{DepthConfig, DepthKind};
use depthreg::heterotest::PValueRule;
use depthreg::spread::SpreadMethod;
use depthreg::weights::{KChoice, Kernel, WeightScheme};
use depthreg::{Error, Result};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "depthreg",
    version,
    about = "Depth-based local regression for multivariate responses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Conditional depth of each response within its local sample
    DepthEval(DepthEvalArgs),
    /// Central regions, medians and trimmed means at chosen covariate rows
    Regions(RegionsArgs),
    /// Spread profile with principal component scores for plotting
    Spread(SpreadArgs),
    /// Permutation test for conditional heteroscedasticity
    HeteroTest(HeteroArgs),
    /// Draw a synthetic dataset from one of the built-in models
    Simulate(SimulateArgs),
    /// Rejection-rate table over a grid of model settings
    PowerStudy(PowerArgs),
}

#[derive(Args, Serialize)]
pub struct InputArgs {
    /// Response CSV: one row per observation, header required
    #[arg(long)]
    pub responses: PathBuf,
    /// Covariate CSV: vector columns, or curve samples on a shared grid
    #[arg(long)]
    pub covariates: PathBuf,
    /// Grid CSV (one row or one column of nodes) marking covariates as curves
    #[arg(long)]
    pub grid: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct AnalysisArgs {
    /// Depth function: halfspace, spatial, projection or simplicial
    #[arg(long, value_parser = parse_depth, default_value = "halfspace")]
    pub depth: DepthKind,
    /// Neighborhood size: "auto" or a positive integer
    #[arg(long, value_parser = parse_k, default_value = "auto")]
    pub k: KChoice,
    /// Kernel bandwidth; switches from k-NN to kernel weights
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Kernel shape used with --bandwidth
    #[arg(long, value_parser = parse_kernel, default_value = "epanechnikov")]
    pub kernel: Kernel,
    /// Number of random directions for direction-sampled depths
    #[arg(long, default_value_t = 512)]
    pub directions: usize,
    /// Seed for anything randomized; DEPTHREG_SEED supplies the default
    #[arg(long, env = "DEPTHREG_SEED", default_value_t = 0)]
    pub seed: u64,
}

impl AnalysisArgs {
    fn scheme(&self) -> Result<WeightScheme> {
        match self.bandwidth {
            Some(h) => {
                if !(h.is_finite() && h > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "bandwidth must be positive and finite, got {h}"
                    )));
                }
                Ok(WeightScheme::Kernel {
                    kernel: self.kernel,
                    bandwidth: h,
                })
            }
            None => Ok(WeightScheme::Knn { k: self.k }),
        }
    }

    fn depth_config(&self) -> Result<DepthConfig> {
        if self.directions == 0 {
            return Err(Error::InvalidArgument(
                "direction count must be at least 1".into(),
            ));
        }
        Ok(DepthConfig {
            direction_count: self.directions,
            rng_seed: self.seed,
            ..DepthConfig::default()
        })
    }
}

#[derive(Args, Serialize)]
pub struct DepthEvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: AnalysisArgs,
    /// Output directory, created if missing
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct RegionsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: AnalysisArgs,
    /// Coverage of the central region
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    /// Trimming fraction for the trimmed mean
    #[arg(long, default_value_t = 0.10)]
    pub trim: f64,
    /// Covariate rows to analyze: "all" or a comma list like "0,3,7"
    #[arg(long, default_value = "all")]
    pub queries: String,
    /// Contour grid resolution (cells per axis)
    #[arg(long, default_value_t = 96)]
    pub resolution: usize,
    /// Output directory, created if missing
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct SpreadArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: AnalysisArgs,
    /// Coverage of the central region
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    /// Also report a region volume: "grid" or "hull"
    #[arg(long, value_parser = parse_volume)]
    pub volume: Option<SpreadMethod>,
    /// Midpoint counting resolution for --volume grid
    #[arg(long, default_value_t = 64)]
    pub volume_resolution: usize,
    /// Output directory, created if missing
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct HeteroArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: AnalysisArgs,
    /// Coverage of the central region behind the spread profile
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    /// Number of random permutations
    #[arg(long, default_value_t = 500)]
    pub permutations: usize,
    /// P-value rule: "strict" or "addone"
    #[arg(long = "p-rule", value_parser = parse_rule, default_value = "strict")]
    pub p_rule: PValueRule,
    /// Output directory, created if missing
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct SimulateArgs {
    /// Model id: 1 or 2 (vector covariates), 3 or 4 (curve covariates)
    #[arg(long)]
    pub model: u8,
    /// Heteroscedasticity scale; 0 is the homoscedastic null
    #[arg(long, default_value_t = 0.0)]
    pub a: f64,
    /// Number of observations
    #[arg(long)]
    pub n: usize,
    /// Seed for the draw; DEPTHREG_SEED supplies the default
    #[arg(long, env = "DEPTHREG_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output directory, created if missing
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct PowerArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: AnalysisArgs,
    /// Model id: 1 or 2 (vector covariates), 3 or 4 (curve covariates)
    #[arg(long)]
    pub model: u8,
    /// Heteroscedasticity scales, comma separated
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub a: Vec<f64>,
    /// Sample sizes, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Nominal level of the test
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    /// Fresh datasets per cell
    #[arg(long, default_value_t = 500)]
    pub replications: usize,
    /// Permutations per replication
    #[arg(long, default_value_t = 500)]
    pub permutations: usize,
    /// Coverage of the central region behind the spread profile
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    /// P-value rule: "strict" or "addone"
    #[arg(long = "p-rule", value_parser = parse_rule, default_value = "strict")]
    pub p_rule: PValueRule,
    /// Output directory, created if missing
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_depth(s: &str) -> std::result::Result<DepthKind, String> {
    match s {
        "halfspace" => Ok(DepthKind::Halfspace),
        "spatial" => Ok(DepthKind::Spatial),
        "projection" => Ok(DepthKind::Projection),
        "simplicial" => Ok(DepthKind::Simplicial),
        _ => Err(format!(
            "unknown depth {s:?}; expected halfspace, spatial, projection or simplicial"
        )),
    }
}

fn parse_kernel(s: &str) -> std::result::Result<Kernel, String> {
    match s {
        "box" => Ok(Kernel::Box),
        "epanechnikov" => Ok(Kernel::Epanechnikov),
        _ => Err(format!("unknown kernel {s:?}; expected box or epanechnikov")),
    }
}

fn parse_k(s: &str) -> std::result::Result<KChoice, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(KChoice::Auto);
    }
    match s.parse::<usize>() {
        Ok(0) => Err("k must be at least 1".into()),
        Ok(k) => Ok(KChoice::Fixed(k)),
        Err(_) => Err(format!("expected \"auto\" or a positive integer, got {s:?}")),
    }
}

fn parse_rule(s: &str) -> std::result::Result<PValueRule, String> {
    match s {
        "strict" => Ok(PValueRule::Strict),
        "addone" => Ok(PValueRule::AddOne),
        _ => Err(format!("unknown p-value rule {s:?}; expected strict or addone")),
    }
}

fn parse_volume(s: &str) -> std::result::Result<SpreadMethod, String> {
    match s {
        "grid" => Ok(SpreadMethod::GridVolume),
        "hull" => Ok(SpreadMethod::HullVolume),
        _ => Err(format!("unknown volume method {s:?}; expected grid or hull")),
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::DepthEval(a) => commands::depth_eval(a),
        Command::Regions(a) => commands::regions_cmd(a),
        Command::Spread(a) => commands::spread_cmd(a),
        Command::HeteroTest(a) => commands::hetero_test(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::PowerStudy(a) => commands::power_study(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut prev = e.to_string();
            eprintln!("error: {prev}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                let text = s.to_string();
                // top-level messages often embed their cause already
                if !prev.contains(&text) {
                    eprintln!("  caused by: {text}");
                }
                prev = text;
                source = s.source();
            }
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
