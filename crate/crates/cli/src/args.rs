use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use robshap::Strategy;

#[derive(Debug, Parser)]
#[command(name = "robshap", version, about = "Attribute ROC/PR robustness metrics to features with Shapley values")]
pub struct Cli {
    #[command(subcommand)]
    pub command: TopLevel,
}

#[derive(Debug, Subcommand)]
pub enum TopLevel {
    #[command(flatten)]
    Run(Command),
    /// Re-executes the run recorded in a manifest.json
    Rerun {
        manifest: PathBuf,
        /// Write to this directory instead of the recorded one
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Shapley decomposition of the AUC
    ExplainAuc {
        #[command(flatten)]
        #[serde(flatten)]
        common: Common,
    },
    /// Shapley decomposition of the ROC curve over an fpr grid
    ExplainRoc {
        #[command(flatten)]
        #[serde(flatten)]
        common: Common,
        /// Also decompose the TPR at this single fpr
        #[arg(long)]
        fpr: Option<f64>,
    },
    /// Shapley decomposition of the PR curve over a recall grid
    ExplainPrc {
        #[command(flatten)]
        #[serde(flatten)]
        common: Common,
        /// Also decompose the precision at this single recall
        #[arg(long)]
        recall: Option<f64>,
    },
    /// Shapley decomposition of the area under the PR curve
    ExplainAuprc {
        #[command(flatten)]
        #[serde(flatten)]
        common: Common,
    },
    /// Monte-Carlo cross-validation bands for curves and attributions
    Uncertainty {
        #[command(flatten)]
        #[serde(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        #[arg(long, value_enum, default_value_t = McKind::Roc)]
        target: McKind,
    },
    /// Compares the metric with and without some features
    FeatureSelect {
        #[command(flatten)]
        #[serde(flatten)]
        common: Common,
        /// Features to drop (comma separated or repeated)
        #[arg(long, value_delimiter = ',', required = true)]
        drop: Vec<String>,
        #[arg(long, value_enum, default_value_t = AreaKind::Auc)]
        target: AreaKind,
    },
    /// Appends a copy of a feature and re-runs the attribution
    Duplicate {
        #[command(flatten)]
        #[serde(flatten)]
        common: Common,
        #[arg(long)]
        feature: String,
        /// Name of the copy (default: <feature>_dup)
        #[arg(long)]
        new_name: Option<String>,
        #[arg(long, value_enum, default_value_t = AreaKind::Auc)]
        target: AreaKind,
    },
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct Common {
    /// Headered CSV with numeric features and a 0/1 label column
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "class")]
    pub label: String,
    /// Output directory (created if missing)
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for the split, sub-sampling and permutation sampling
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Number of evenly spaced grid points on [0, 1]
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::Interpolation)]
    pub strategy: StrategyArg,
    /// Sub-sample to this fraction of positives first
    #[arg(long)]
    pub imbalance: Option<f64>,
    /// Estimate with this many sampled permutations instead of exactly
    #[arg(long)]
    pub sampled: Option<usize>,
    #[arg(long, default_value_t = robshap::DEFAULT_EXACT_CAP)]
    pub exact_cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyArg {
    Optimistic,
    Pessimistic,
    #[value(alias = "interpolate")]
    Interpolation,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Optimistic => Strategy::Optimistic,
            StrategyArg::Pessimistic => Strategy::Pessimistic,
            StrategyArg::Interpolation => Strategy::Interpolation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AreaKind {
    Auc,
    Auprc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum McKind {
    Auc,
    Auprc,
    Roc,
    Prc,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::ExplainAuc { common }
            | Command::ExplainRoc { common, .. }
            | Command::ExplainPrc { common, .. }
            | Command::ExplainAuprc { common }
            | Command::Uncertainty { common, .. }
            | Command::FeatureSelect { common, .. }
            | Command::Duplicate { common, .. } => common,
        }
    }

    pub fn common_mut(&mut self) -> &mut Common {
        match self {
            Command::ExplainAuc { common }
            | Command::ExplainRoc { common, .. }
            | Command::ExplainPrc { common, .. }
            | Command::ExplainAuprc { common }
            | Command::Uncertainty { common, .. }
            | Command::FeatureSelect { common, .. }
            | Command::Duplicate { common, .. } => common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::ExplainAuc { .. } => "explain-auc",
            Command::ExplainRoc { .. } => "explain-roc",
            Command::ExplainPrc { .. } => "explain-prc",
            Command::ExplainAuprc { .. } => "explain-auprc",
            Command::Uncertainty { .. } => "uncertainty",
            Command::FeatureSelect { .. } => "feature-select",
            Command::Duplicate { .. } => "duplicate",
        }
    }
}

/// Everything needed to reproduce a run. Written as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    #[serde(flatten)]
    pub command: Command,
}

impl RunManifest {
    pub fn new(command: Command) -> Self {
        RunManifest { tool_version: env!("CARGO_PKG_VERSION").to_owned(), command }
    }
}
