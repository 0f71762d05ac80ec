//! Flag definitions, the optional TOML config file, and the merge into
//! fully resolved run configurations. Precedence: flag > file > default.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use ppfit::loss::{BoundaryMode, LossConfig, RegMode};
use ppfit::optim::{Hyperparams, InitStrategy, OptimizerKind, TrainConfig};
use ppfit::{Basis, Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "ppfit",
    version,
    about = "Fit smooth piecewise polynomials to 1-D samples by gradient descent"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a benchmark dataset CSV (plus a .meta.json sidecar).
    GenData(GenDataArgs),
    /// Compute the segment-wise least-squares baselines l2* and l2~*.
    Baseline(BaselineArgs),
    /// Train one model on a CSV sample set and export its artifacts.
    Fit(FitArgs),
    /// Train a grid of alpha values in both bases and tabulate the results.
    Sweep(SweepArgs),
    /// Train every optimizer in both bases on one dataset.
    CompareOptimizers(CompareArgs),
    /// Re-execute a recorded run from its manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Dataset preset: A (sin, quarter period), B (sin, full period),
    /// C (quadratic chirp).
    #[arg(long)]
    pub dataset: String,
    /// Gaussian noise scale added to the target values.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// Input CSV with header x,y.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub segments: usize,
    #[arg(long, default_value_t = 7)]
    pub degree: usize,
    /// Continuity order enforced on the corrected baseline.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value = "cheb")]
    pub basis: String,
    /// Directory for the fitted/corrected model profiles.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Default)]
pub struct FitArgs {
    /// Input CSV with header x,y.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Optional TOML file supplying any of the other options;
    /// explicit flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub segments: Option<usize>,
    #[arg(long)]
    pub degree: Option<usize>,
    /// Continuity order targeted by the penalty (and --ckmin).
    #[arg(long)]
    pub k: Option<usize>,
    /// cheb | power
    #[arg(long)]
    pub basis: Option<String>,
    /// Weight of the continuity term; the data term gets 1 - alpha.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// open | cyclic | periodic
    #[arg(long)]
    pub boundary: Option<String>,
    /// factorial | chebendpoint | none
    #[arg(long)]
    pub reg: Option<String>,
    #[arg(long)]
    pub optimizer: Option<String>,
    /// Learning rate; defaults to 1.0 for alpha = 0 and 0.1 otherwise.
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Consecutive non-improving epochs tolerated; 0 disables.
    #[arg(long)]
    pub patience: Option<usize>,
    /// l2 | zero | random
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Enforce exact continuity on the trained model before export.
    #[arg(long)]
    pub ckmin: bool,
    /// Profile JSON path (default: <out-dir>/profile.json).
    #[arg(long)]
    pub export: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated alpha grid (default 0,0.1,…,1.0).
    #[arg(long)]
    pub alphas: Option<String>,
    #[arg(long)]
    pub segments: Option<usize>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub boundary: Option<String>,
    #[arg(long)]
    pub reg: Option<String>,
    #[arg(long)]
    pub optimizer: Option<String>,
    /// Learning rate; per-cell default is alpha-dependent (1.0 / 0.1).
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out/sweep")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run the full optimizer set (the default; present for symmetry).
    #[arg(long, conflicts_with = "optimizers")]
    pub all: bool,
    /// Comma-separated subset of optimizer names.
    #[arg(long)]
    pub optimizers: Option<String>,
    #[arg(long)]
    pub segments: Option<usize>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub boundary: Option<String>,
    #[arg(long)]
    pub reg: Option<String>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out/compare")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    /// Manifest JSON of the run to repeat.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Redirect the re-run's artifacts instead of overwriting the originals.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// TOML mirror of the fit/sweep/compare flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub segments: Option<usize>,
    pub degree: Option<usize>,
    pub k: Option<usize>,
    pub basis: Option<String>,
    pub alpha: Option<f64>,
    pub boundary: Option<String>,
    pub reg: Option<String>,
    pub optimizer: Option<String>,
    pub lr: Option<f64>,
    pub epochs: Option<usize>,
    pub patience: Option<usize>,
    pub init: Option<String>,
    pub seed: Option<u64>,
    pub ckmin: Option<bool>,
}

pub fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text)
        .map_err(|e| Error::invalid(format!("config file {}: {e}", path.display())))
}

fn parse_opt<T>(value: Option<&String>) -> Result<Option<T>>
where
    T: std::str::FromStr<Err = Error>,
{
    value.map(|v| v.parse()).transpose()
}

/// A fit with every choice pinned down — exactly what a manifest
/// records and a rerun replays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolvedFit {
    pub input: PathBuf,
    pub segments: usize,
    pub degree: usize,
    pub basis: Basis,
    pub train: TrainConfig,
    pub ckmin: bool,
}

/// The built-in defaults, before any file or flag is applied.
pub struct FitDefaults {
    pub alpha: f64,
    pub optimizer: OptimizerKind,
    pub lr: Option<f64>,
    pub epochs: usize,
    pub patience: usize,
    pub init: InitStrategy,
}

impl Default for FitDefaults {
    fn default() -> Self {
        FitDefaults {
            alpha: 0.1,
            optimizer: OptimizerKind::Amsgrad,
            lr: None, // alpha-dependent: 1.0 when alpha = 0, else 0.1
            epochs: 2000,
            patience: 500,
            init: InitStrategy::L2Optimum,
        }
    }
}

/// Learning rate used when none is given: pure-approximation runs
/// tolerate (and want) a full step, combined runs a tenth.
pub fn default_lr(alpha: f64) -> f64 {
    if alpha == 0.0 {
        1.0
    } else {
        0.1
    }
}

impl FitArgs {
    pub fn resolve(&self) -> Result<ResolvedFit> {
        let file = load_file_config(self.config.as_deref())?;
        let d = FitDefaults::default();

        let segments = self.segments.or(file.segments).unwrap_or(2);
        let degree = self.degree.or(file.degree).unwrap_or(7);
        let k = self.k.or(file.k).unwrap_or(3);
        let basis = parse_opt(self.basis.as_ref().or(file.basis.as_ref()))?
            .unwrap_or(Basis::Chebyshev);
        let alpha = self.alpha.or(file.alpha).unwrap_or(d.alpha);
        let boundary = parse_opt(self.boundary.as_ref().or(file.boundary.as_ref()))?
            .unwrap_or(BoundaryMode::Open);
        let regularization =
            parse_opt(self.reg.as_ref().or(file.reg.as_ref()))?.unwrap_or(RegMode::Factorial);
        let optimizer = parse_opt(self.optimizer.as_ref().or(file.optimizer.as_ref()))?
            .unwrap_or(d.optimizer);
        let lr = self.lr.or(file.lr).unwrap_or_else(|| default_lr(alpha));
        let epochs = self.epochs.or(file.epochs).unwrap_or(d.epochs);
        // The stock patience is meant for long runs; cap it so a short
        // --epochs without an explicit --patience stays valid.
        let patience = self.patience.or(file.patience).unwrap_or(d.patience.min(epochs));
        let init = parse_opt(self.init.as_ref().or(file.init.as_ref()))?.unwrap_or(d.init);
        let seed = self.seed.or(file.seed).unwrap_or(0);
        let ckmin = self.ckmin || file.ckmin.unwrap_or(false);

        Ok(ResolvedFit {
            input: self.input.clone(),
            segments,
            degree,
            basis,
            train: TrainConfig {
                optimizer,
                hyper: Hyperparams::default(),
                lr,
                epochs,
                patience,
                init,
                loss: LossConfig { alpha, k, boundary, regularization },
                seed,
            },
            ckmin,
        })
    }
}
