//! JSON sweep configuration.
//!
//! ```json
//! {
//!   "family": "cart",
//!   "grid": [2, 4, 8, 16],
//!   "members": 20,
//!   "seed": 7,
//!   "dataset": { "blobs": { "n": 400, "d": 10, "num_classes": 2, "class_sep": 1.0, "label_noise": 0.1, "seed": 1 } }
//! }
//! ```
//!
//! A CSV dataset is given as `{ "csv": { "path": "data.csv", "split_seed": 0 } }`;
//! relative paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use eir_core::TieRule;
use serde::{Deserialize, Serialize};

use crate::bagging::TrainOptions;
use crate::cart::FeatureSubset;
use crate::dataset::{load_csv, make_blobs, BlobParams, Dataset};
use crate::error::LabError;
use crate::logistic::{LogisticOptions, Solver};
use crate::sweep::{capacity_sweep, validate_grid, FamilyKind, SweepResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Blobs(BlobParams),
    Csv {
        path: PathBuf,
        #[serde(default)]
        split_seed: u64,
    },
}

fn default_l2() -> f64 {
    LogisticOptions::default().l2
}

fn default_max_iters() -> usize {
    LogisticOptions::default().max_iters
}

fn default_tol() -> f64 {
    LogisticOptions::default().tol
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub family: FamilyKind,
    pub grid: Vec<usize>,
    pub members: usize,
    #[serde(default)]
    pub seed: u64,
    pub dataset: DatasetSource,
    #[serde(default = "default_l2")]
    pub l2: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default)]
    pub features_per_split: FeatureSubset,
    #[serde(default)]
    pub tie_rule: TieRule,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        let cfg: SweepConfig = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |m: String| Err(LabError::Config(m));
        validate_grid(self.family, &self.grid).or_else(|e| bad(e.to_string()))?;
        if self.members == 0 {
            return bad("members must be at least 1".into());
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return bad(format!("l2 must be finite and non-negative, got {}", self.l2));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return bad(format!("tol must be finite and non-negative, got {}", self.tol));
        }
        Ok(())
    }

    pub fn train_options(&self) -> TrainOptions {
        TrainOptions {
            logistic: LogisticOptions {
                l2: self.l2,
                max_iters: self.max_iters,
                tol: self.tol,
                solver: self.solver,
            },
            features_per_split: self.features_per_split,
        }
    }

    /// Generates or loads the dataset. `base` resolves relative CSV paths.
    pub fn dataset(&self, base: &Path) -> Result<Dataset, LabError> {
        match &self.dataset {
            DatasetSource::Blobs(p) => make_blobs(p).map_err(|e| LabError::Config(e.to_string())),
            DatasetSource::Csv { path, split_seed } => load_csv(&base.join(path), *split_seed),
        }
    }

    pub fn run(&self, base: &Path) -> Result<SweepResult, LabError> {
        let ds = self.dataset(base)?;
        capacity_sweep(
            &ds,
            self.family,
            &self.grid,
            self.members,
            self.seed,
            &self.train_options(),
            self.tie_rule,
        )
    }
}
