//! Capacity sweeps and interpolation-threshold detection.

use eir_core::{diagnostics, TieRule};
use serde::{Deserialize, Serialize};

use crate::bagging::{train_bagged_ensemble, ModelFamily, TrainOptions};
use crate::dataset::Dataset;
use crate::error::{param, LabError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    RandomFeatures,
    Cart,
}

impl FamilyKind {
    pub fn at(self, capacity: usize) -> ModelFamily {
        match self {
            FamilyKind::RandomFeatures => ModelFamily::RandomFeatures { n_features: capacity },
            FamilyKind::Cart => ModelFamily::Cart {
                max_leaf_nodes: capacity,
            },
        }
    }

    pub fn capacity_name(self) -> &'static str {
        match self {
            FamilyKind::RandomFeatures => "number of random features",
            FamilyKind::Cart => "max leaf nodes",
        }
    }

    pub fn min_capacity(self) -> usize {
        match self {
            FamilyKind::RandomFeatures => 1,
            FamilyKind::Cart => 2,
        }
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random_features" => Ok(FamilyKind::RandomFeatures),
            "cart" => Ok(FamilyKind::Cart),
            other => Err(format!("unknown model family `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub capacity: usize,
    pub avg_error: f64,
    pub mv_error: f64,
    pub eir: Option<f64>,
    pub der: Option<f64>,
    pub mean_in_bag_error: f64,
    pub interpolating: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub family: FamilyKind,
    pub rows: Vec<SweepRow>,
    /// Smallest capacity at which every member has zero in-bag error.
    pub interpolation_threshold: Option<usize>,
}

impl SweepResult {
    pub fn threshold_index(&self) -> Option<usize> {
        let t = self.interpolation_threshold?;
        self.rows.iter().position(|r| r.capacity == t)
    }
}

pub fn validate_grid(kind: FamilyKind, grid: &[usize]) -> Result<(), LabError> {
    if grid.is_empty() {
        return Err(param("capacity grid is empty"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(param("capacity grid must be strictly ascending"));
    }
    if grid[0] < kind.min_capacity() {
        return Err(param(format!("capacity must be at least {}", kind.min_capacity())));
    }
    Ok(())
}

/// Trains one ensemble per grid point. Member `i` uses the same random
/// stream at every grid point.
pub fn capacity_sweep(
    dataset: &Dataset,
    kind: FamilyKind,
    grid: &[usize],
    num_members: usize,
    seed: u64,
    opts: &TrainOptions,
    tie_rule: TieRule,
) -> Result<SweepResult, LabError> {
    validate_grid(kind, grid)?;
    let mut rows = Vec::with_capacity(grid.len());
    for &capacity in grid {
        let ens = train_bagged_ensemble(dataset, kind.at(capacity), num_members, seed, opts)?;
        let report = diagnostics(&ens.test_predictions, tie_rule);
        rows.push(SweepRow {
            capacity,
            avg_error: report.avg_error,
            mv_error: report.mv_error,
            eir: report.eir,
            der: report.der,
            mean_in_bag_error: ens.mean_in_bag_error(),
            interpolating: ens.interpolating(),
        });
    }
    let interpolation_threshold = rows.iter().find(|r| r.interpolating).map(|r| r.capacity);
    Ok(SweepResult {
        family: kind,
        rows,
        interpolation_threshold,
    })
}

const CSV_HEADER: &str = "capacity,avg_error,mv_error,eir,der,mean_in_bag_error,interpolating";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One line per row; undefined ratios are empty fields.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.capacity,
            r.avg_error,
            r.mv_error,
            opt(r.eir),
            opt(r.der),
            r.mean_in_bag_error,
            r.interpolating
        ));
    }
    out
}

pub fn rows_from_csv(text: &str) -> Result<Vec<SweepRow>, LabError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => {
            return Err(LabError::Csv {
                line: 1,
                message: format!("expected header `{CSV_HEADER}`"),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| LabError::Csv { line: idx + 1, message };
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 7 {
            return Err(bad(format!("expected 7 fields, found {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("`{s}` is not a number")));
        let opt_num = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
        rows.push(SweepRow {
            capacity: f[0].parse().map_err(|_| bad(format!("`{}` is not a capacity", f[0])))?,
            avg_error: num(f[1])?,
            mv_error: num(f[2])?,
            eir: opt_num(f[3])?,
            der: opt_num(f[4])?,
            mean_in_bag_error: num(f[5])?,
            interpolating: f[6].parse().map_err(|_| bad(format!("`{}` is not a boolean", f[6])))?,
        });
    }
    Ok(rows)
}
