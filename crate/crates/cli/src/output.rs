use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use eir_core::bounds::{BoundCheck, ComparisonRow};
use eir_core::{BoundTable, CompetenceVerdict, CurvePoint, DiagnosticsReport, TieRule};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Bad arguments or configuration; exits with status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(message: impl Into<String>) -> anyhow::Error {
    ConfigError(message.into()).into()
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub input: String,
    pub tie_rule: TieRule,
    pub diagnostics: DiagnosticsReport<f64>,
    pub competence: CompetenceVerdict<f64>,
    pub bounds: BoundTable<f64>,
    pub checks: Vec<BoundCheck<f64>>,
}

/// Contents of `competence.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompetenceReport {
    pub schema_version: u32,
    pub input: String,
    pub verdict: CompetenceVerdict<f64>,
    pub curve: Vec<CurvePoint<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleChecks {
    pub input: String,
    pub competent: bool,
    pub bounds: BoundTable<f64>,
    pub checks: Vec<BoundCheck<f64>>,
}

/// Contents of `bounds.json` from the `bounds` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub schema_version: u32,
    pub tie_rule: TieRule,
    pub ensembles: Vec<EnsembleChecks>,
    pub comparison: Vec<ComparisonRow<f64>>,
}

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> Result<Self> {
        fs::create_dir_all(path).with_context(|| format!("creating output directory {}", path.display()))?;
        Ok(Self(path.to_path_buf()))
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.0.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6}"))
}
