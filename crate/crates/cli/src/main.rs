//! `sew`: experiment harness over the sew-core workbench.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sew_core::{Exponent, ManifoldModel};

use crate::report::Format;

#[derive(Parser, Debug)]
#[command(
    name = "sew",
    version,
    about = "Spectra, entropy numbers and widths of Sobolev classes on homogeneous manifolds",
    after_help = "Sweeps accept `a,b,c`, `lo:hi` (doubling), `lo:hi:+s` or `lo:hi:*f`.\n\
                  Exit status: 0 success, 2 violated theorem hypothesis, 1 any other error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Random seed; falls back to `SEW_SEED`, then 0.
    #[arg(long, env = "SEW_SEED", default_value_t = 0, global = true)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, global = true)]
    #[serde(skip)]
    pub format: Option<Format>,
    /// Report path (default stdout); a `.sidecar.json` with the timestamp is written next to it.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    /// Flat `key = value` file whose entries override flags of the same name.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// Values of a parsed sweep.
type Sweep = Vec<usize>;

fn manifold(s: &str) -> Result<ManifoldModel, String> {
    s.parse().map_err(|e: sew_core::SewError| e.to_string())
}

fn exponent(s: &str) -> Result<Exponent, String> {
    s.parse().map_err(|e: sew_core::SewError| e.to_string())
}

pub fn serialize_manifold<S: serde::Serializer>(m: &ManifoldModel, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&m.label())
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues, multiplicities and cumulative dimensions.
    ///
    /// Columns: k, eigenvalue, multiplicity, cumulative_dim, theta_ratio, tau_ratio.
    Spectrum(SpectrumArgs),
    /// Weyl ratio n(a)·a^{−d/2}, counting eigenvalues strictly below a.
    ///
    /// Columns: a, count, ratio.
    Weyl(WeylArgs),
    /// Pointwise addition formula for each eigenspace at random points.
    ///
    /// Columns: k, multiplicity, max_rel_deviation.
    AdditionCheck(AdditionArgs),
    /// Nikolskii ratios on random polynomials and on the kernel section.
    ///
    /// Columns: p, q, n, max_ratio, bound, kernel_ratio, holds.
    Nikolskii(NikolskiiArgs),
    /// Lévy means of induced L_p norms over a dimension sweep.
    ///
    /// Columns: n, degree, p, mean, std_error.
    LevyMean(LevyArgs),
    /// Lévy means of the dual norms.
    ///
    /// Columns: n, degree, p, mean, std_error.
    DualLevy(DualLevyArgs),
    /// Sobolev entropy lower and upper bounds (universal constants set to 1).
    ///
    /// Columns: n, lower, upper, ratio.
    EntropyBounds(EntropyArgs),
    /// Empirical covering and packing of a diagonal image of an L_p ball.
    ///
    /// Columns: k, centers, cover_radius, pack_points, pack_radius, formula_lower.
    Covering(CoveringArgs),
    /// Volume ratio (Vol B / Vol B₂)^{1/n} of the unit ball or its polar.
    ///
    /// Columns: n, p, body, ratio, std_error, levy_mean.
    VolumeRatio(VolumeArgs),
    /// Dyadic block allocation with invariant checks (JSON by default).
    ///
    /// Columns: k, lo, hi, dim, rank.
    WidthBlocks(BlocksArgs),
    /// Approximation error of sampled Sobolev functions against the rank budget.
    ///
    /// Columns: N, tau_n, budget, sup_error, mean_error.
    ApproximantSweep(SweepArgs),
    /// Random proportional subspaces and the dual-norm comparison constant.
    ///
    /// Columns: trial, constant, meets_target.
    PtjCheck(PtjArgs),
    /// Containment of the scaled Euclidean ball of 𝒯_M in the Sobolev class.
    ///
    /// Columns: M, n, max_ratio, top_block_deviation, contained, half_dim, predicted.
    BernsteinCheck(BernsteinArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct SpectrumArgs {
    #[arg(long, value_parser = manifold, default_value = "circle")]
    #[serde(serialize_with = "serialize_manifold")]
    pub manifold: ManifoldModel,
    #[arg(long, default_value_t = 20)]
    pub n_max: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct WeylArgs {
    #[arg(long, value_parser = manifold, default_value = "circle")]
    #[serde(serialize_with = "serialize_manifold")]
    pub manifold: ManifoldModel,
    /// Comma-separated thresholds.
    #[arg(long, value_delimiter = ',', default_value = "1e2,1e4,1e6")]
    pub a: Vec<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct AdditionArgs {
    #[arg(long, value_parser = manifold, default_value = "sphere2")]
    #[serde(serialize_with = "serialize_manifold")]
    pub manifold: ManifoldModel,
    #[arg(long, default_value_t = 20)]
    pub max_degree: usize,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct NikolskiiArgs {
    #[arg(long, value_parser = manifold, default_value = "circle")]
    #[serde(serialize_with = "serialize_manifold")]
    pub manifold: ManifoldModel,
    #[arg(long, default_value_t = 0)]
    pub min_degree: usize,
    #[arg(long, default_value_t = 8)]
    pub max_degree: usize,
    #[arg(long, value_delimiter = ',', value_parser = exponent, default_value = "1,2,inf")]
    pub p: Vec<Exponent>,
    #[arg(long, value_delimiter = ',', value_parser = exponent, default_value = "1,2,inf")]
    pub q: Vec<Exponent>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct LevyArgs {
    #[arg(long, value_parser = manifold, default_value = "circle")]
    #[serde(serialize_with = "serialize_manifold")]
    pub manifold: ManifoldModel,
    /// Target dimensions; each uses blocks 1..=K with K the least degree reaching n.
    #[arg(long, value_parser = config::parse_sweep, default_value = "8:256")]
    pub n_sweep: Sweep,
    #[arg(long, value_delimiter = ',', value_parser = exponent, default_value = "2")]
    pub p: Vec<Exponent>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct DualLevyArgs {
    #[arg(long, value_parser = manifold, default_value = "circle")]
    #[serde(serialize_with = "serialize_manifold")]
    pub manifold: ManifoldModel,
    #[arg(long, value_parser = config::parse_sweep, default_value = "4:32")]
    pub n_sweep: Sweep,
    #[arg(long, value_delimiter = ',', value_parser = exponent, default_value = "4")]
    pub p: Vec<Exponent>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Dual-norm solver tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct EntropyArgs {
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long, value_parser = exponent, default_value = "2")]
    pub p: Exponent,
    #[arg(long, value_parser = exponent, default_value = "2")]
    pub q: Exponent,
    #[arg(long, value_parser = config::parse_sweep, default_value = "8:4096")]
    pub n_sweep: Sweep,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct CoveringArgs {
    #[arg(long, value_parser = manifold, default_value = "circle")]
    #[serde(serialize_with = "serialize_manifold")]
    pub manifold: ManifoldModel,
    /// Eigenspace blocks spanning the coefficient space.
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub blocks: Vec<usize>,
    /// Exponent of the body's norm.
    #[arg(long, value_parser = exponent, default_value = "4")]
    pub p: Exponent,
    /// Exponent of the covering metric.
    #[arg(long, value_parser = exponent, default_value = "2")]
    pub q: Exponent,
    /// Diagonal l^{−γ/d} on coordinate l; omitted means the identity.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_parser = config::parse_sweep, default_value = "1:8:+1")]
    pub k: Sweep,
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 20_000)]
    pub levy_samples: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct VolumeArgs {
    #[arg(long, value_parser = manifold, default_value = "circle")]
    #[serde(serialize_with = "serialize_manifold")]
    pub manifold: ManifoldModel,
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub blocks: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = exponent, default_value = "4")]
    pub p: Vec<Exponent>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Use the polar body (unit ball of the dual norm).
    #[arg(long)]
    pub dual: bool,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct BlocksArgs {
    #[arg(long, value_parser = manifold, default_value = "circle")]
    #[serde(serialize_with = "serialize_manifold")]
    pub manifold: ManifoldModel,
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    /// Base degree N.
    #[arg(long = "N", default_value_t = 16)]
    #[serde(rename = "N")]
    pub n: usize,
    #[arg(long, value_parser = exponent, default_value = "2")]
    pub q: Exponent,
    /// Defaults to two thirds of the admissible upper end.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleArg {
    Truncate,
    RandomSubspace,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_parser = manifold, default_value = "circle")]
    #[serde(serialize_with = "serialize_manifold")]
    pub manifold: ManifoldModel,
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    #[arg(long, value_parser = exponent, default_value = "2")]
    pub q: Exponent,
    /// Base degrees N.
    #[arg(long, value_parser = config::parse_sweep, default_value = "8:64")]
    pub bases: Sweep,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "truncate")]
    pub rule: RuleArg,
    /// Random subspaces tried per block under `random-subspace`.
    #[arg(long, default_value_t = 8)]
    pub draws: usize,
    /// Sampled functions use blocks 1..=truncation·N.
    #[arg(long, default_value_t = 4)]
    pub truncation: usize,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct PtjArgs {
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, value_parser = exponent, default_value = "4")]
    pub q_prime: Exponent,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct BernsteinArgs {
    #[arg(long, value_parser = manifold, default_value = "circle")]
    #[serde(serialize_with = "serialize_manifold")]
    pub manifold: ManifoldModel,
    /// Top degree M.
    #[arg(long = "M", default_value_t = 8)]
    #[serde(rename = "M")]
    pub m: usize,
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    #[arg(long, value_parser = exponent, default_value = "2")]
    pub q: Exponent,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[command(flatten)]
    pub common: Common,
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Spectrum(a) => &a.common,
            Command::Weyl(a) => &a.common,
            Command::AdditionCheck(a) => &a.common,
            Command::Nikolskii(a) => &a.common,
            Command::LevyMean(a) => &a.common,
            Command::DualLevy(a) => &a.common,
            Command::EntropyBounds(a) => &a.common,
            Command::Covering(a) => &a.common,
            Command::VolumeRatio(a) => &a.common,
            Command::WidthBlocks(a) => &a.common,
            Command::ApproximantSweep(a) => &a.common,
            Command::PtjCheck(a) => &a.common,
            Command::BernsteinCheck(a) => &a.common,
        }
    }
}

enum Failure {
    Hypothesis(String),
    Other(String),
}

impl From<sew_core::SewError> for Failure {
    fn from(e: sew_core::SewError) -> Self {
        if e.is_hypothesis_violation() {
            Failure::Hypothesis(e.to_string())
        } else {
            Failure::Other(e.to_string())
        }
    }
}

fn config_map<T: Serialize>(args: &T) -> serde_json::Map<String, serde_json::Value> {
    match serde_json::to_value(args) {
        Ok(serde_json::Value::Object(mut map)) => {
            if let Some(serde_json::Value::Object(common)) = map.remove("common") {
                map.extend(common);
            }
            map
        }
        _ => serde_json::Map::new(),
    }
}

fn run(command: Command) -> Result<(), Failure> {
    let common = command.common().clone();
    if let Some(t) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| Failure::Other(format!("cannot size the thread pool: {e}")))?;
    }
    let (name, config, report, default_format) = match &command {
        Command::Spectrum(a) => ("spectrum", config_map(a), commands::spectrum_table(a)?, Format::Csv),
        Command::Weyl(a) => ("weyl", config_map(a), commands::weyl(a)?, Format::Csv),
        Command::AdditionCheck(a) => {
            ("addition-check", config_map(a), commands::addition_check(a)?, Format::Csv)
        }
        Command::Nikolskii(a) => ("nikolskii", config_map(a), commands::nikolskii(a)?, Format::Csv),
        Command::LevyMean(a) => ("levy-mean", config_map(a), commands::levy_mean(a)?, Format::Csv),
        Command::DualLevy(a) => ("dual-levy", config_map(a), commands::dual_levy(a)?, Format::Csv),
        Command::EntropyBounds(a) => {
            ("entropy-bounds", config_map(a), commands::entropy_bounds(a)?, Format::Csv)
        }
        Command::Covering(a) => ("covering", config_map(a), commands::covering(a)?, Format::Csv),
        Command::VolumeRatio(a) => ("volume-ratio", config_map(a), commands::volume_ratio(a)?, Format::Csv),
        Command::WidthBlocks(a) => ("width-blocks", config_map(a), commands::width_blocks(a)?, Format::Json),
        Command::ApproximantSweep(a) => {
            ("approximant-sweep", config_map(a), commands::approximant_sweep(a)?, Format::Csv)
        }
        Command::PtjCheck(a) => ("ptj-check", config_map(a), commands::ptj_check(a)?, Format::Csv),
        Command::BernsteinCheck(a) => {
            ("bernstein-check", config_map(a), commands::bernstein_check(a)?, Format::Csv)
        }
    };
    let meta = report::Meta { command: name.to_string(), config };
    let (text, hash) = report::render(&report, &meta, common.format.unwrap_or(default_format))
        .map_err(|e| Failure::Other(format!("cannot render report: {e}")))?;
    match &common.output {
        Some(path) => {
            std::fs::write(path, &text)
                .map_err(|e| Failure::Other(format!("cannot write {}: {e}", path.display())))?;
            report::write_sidecar(path, &hash)
                .map_err(|e| Failure::Other(format!("cannot write sidecar: {e}")))?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match config::expand_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Hypothesis(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
