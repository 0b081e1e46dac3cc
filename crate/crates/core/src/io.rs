//! Prediction-matrix files.
//!
//! CSV layout:
//!
//! ```text
//! # K=2 m=4 M=3
//! labels,0,0,1,1
//! h1,0,0,1,0
//! h2,0,1,1,1
//! h3,1,0,1,1
//! weights,0.2,0.3,0.5
//! ```
//!
//! The `weights` line is optional (uniform otherwise). An optional
//! `classes,<name_0>,...,<name_{K-1}>` line before `labels` lets labels and
//! predictions be written as class names.
//!
//! JSON layout: `{"num_classes": K, "labels": [...], "predictions": [[...], ...],
//! "weights": [...]}` with optional `weights` and optional `class_names`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ensemble::PredictionMatrix;
use crate::error::EnsembleError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictionFormat {
    Csv,
    Json,
}

impl PredictionFormat {
    /// Guesses the format from a `.csv` / `.json` extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(PredictionFormat::Csv),
            "json" => Some(PredictionFormat::Json),
            _ => None,
        }
    }
}

impl FromStr for PredictionFormat {
    type Err = EnsembleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(PredictionFormat::Csv),
            "json" => Ok(PredictionFormat::Json),
            other => Err(EnsembleError::Format(other.to_string())),
        }
    }
}

pub fn load_predictions(path: &Path, format: PredictionFormat) -> Result<PredictionMatrix<f64>, EnsembleError> {
    let text = fs::read_to_string(path)?;
    match format {
        PredictionFormat::Csv => parse_csv(&text),
        PredictionFormat::Json => parse_json(&text),
    }
}

struct ClassNames(HashMap<String, usize>);

impl ClassNames {
    fn resolve(&self, token: &str, line: usize) -> Result<usize, EnsembleError> {
        let token = token.trim();
        if let Ok(v) = token.parse::<usize>() {
            return Ok(v);
        }
        self.0
            .get(token)
            .copied()
            .ok_or_else(|| EnsembleError::parse(line, format!("`{token}` is neither a class index nor a class name")))
    }
}

fn parse_header(line: &str) -> Result<(usize, usize, usize), EnsembleError> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| EnsembleError::parse(1, "expected header `# K=<int> m=<int> M=<int>`"))?;
    let (mut k, mut m, mut big_m) = (None, None, None);
    for token in body.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| EnsembleError::parse(1, format!("bad header token `{token}`")))?;
        let value: usize = value
            .parse()
            .map_err(|_| EnsembleError::parse(1, format!("`{value}` is not a non-negative integer")))?;
        match key {
            "K" => k = Some(value),
            "m" => m = Some(value),
            "M" => big_m = Some(value),
            other => return Err(EnsembleError::parse(1, format!("unknown header key `{other}`"))),
        }
    }
    match (k, m, big_m) {
        (Some(k), Some(m), Some(big_m)) => Ok((k, m, big_m)),
        _ => Err(EnsembleError::parse(1, "header must define K, m and M")),
    }
}

pub fn parse_csv(text: &str) -> Result<PredictionMatrix<f64>, EnsembleError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or_else(|| EnsembleError::parse(1, "empty file"))?;
    let (num_classes, m, num_classifiers) = parse_header(header)?;

    let mut names = ClassNames(HashMap::new());
    let mut labels: Option<Vec<usize>> = None;
    let mut rows = Vec::new();
    let mut weights = None;

    for (lineno, line) in lines {
        if line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',');
        let key = fields.next().unwrap_or_default().trim();
        let values: Vec<&str> = fields.map(str::trim).collect();
        if weights.is_some() {
            return Err(EnsembleError::parse(lineno, "`weights` must be the last line"));
        }
        match key {
            "classes" => {
                if labels.is_some() || !names.0.is_empty() {
                    return Err(EnsembleError::parse(lineno, "`classes` must precede `labels` and appear once"));
                }
                if values.len() != num_classes {
                    return Err(EnsembleError::parse(
                        lineno,
                        format!("{} class names for K={num_classes}", values.len()),
                    ));
                }
                names.0 = values.iter().enumerate().map(|(i, n)| (n.to_string(), i)).collect();
            }
            "labels" => {
                if labels.is_some() {
                    return Err(EnsembleError::parse(lineno, "duplicate `labels` line"));
                }
                labels = Some(resolve_row(&names, &values, m, lineno)?);
            }
            "weights" => {
                let w = values
                    .iter()
                    .map(|v| {
                        v.parse::<f64>()
                            .map_err(|_| EnsembleError::parse(lineno, format!("bad weight `{v}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                weights = Some(w);
            }
            name if is_classifier_name(name) => {
                if labels.is_none() {
                    return Err(EnsembleError::parse(lineno, "`labels` must precede classifier rows"));
                }
                rows.push(resolve_row(&names, &values, m, lineno)?);
            }
            other => return Err(EnsembleError::parse(lineno, format!("unexpected row key `{other}`"))),
        }
    }
    let labels = labels.ok_or_else(|| EnsembleError::parse(1, "missing `labels` line"))?;
    if rows.len() != num_classifiers {
        return Err(EnsembleError::parse(
            1,
            format!("header declares M={num_classifiers} but {} classifier rows found", rows.len()),
        ));
    }
    PredictionMatrix::new(rows, labels, num_classes, weights)
}

fn is_classifier_name(name: &str) -> bool {
    name.strip_prefix('h')
        .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
}

fn resolve_row(names: &ClassNames, values: &[&str], m: usize, lineno: usize) -> Result<Vec<usize>, EnsembleError> {
    if values.len() != m {
        return Err(EnsembleError::parse(lineno, format!("{} entries, expected m={m}", values.len())));
    }
    values.iter().map(|v| names.resolve(v, lineno)).collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonClass {
    Index(usize),
    Name(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonPredictions {
    num_classes: Option<usize>,
    #[serde(default)]
    class_names: Option<Vec<String>>,
    labels: Vec<JsonClass>,
    predictions: Vec<Vec<JsonClass>>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct JsonPredictionsOut<'a> {
    num_classes: usize,
    labels: &'a [usize],
    predictions: Vec<&'a [usize]>,
    weights: &'a [f64],
}

pub fn parse_json(text: &str) -> Result<PredictionMatrix<f64>, EnsembleError> {
    let raw: JsonPredictions = serde_json::from_str(text).map_err(|e| EnsembleError::parse(e.line(), e.to_string()))?;
    let num_classes = match (raw.num_classes, &raw.class_names) {
        (Some(k), Some(names)) if names.len() != k => {
            return Err(EnsembleError::parse(1, format!("{} class names for K={k}", names.len())))
        }
        (Some(k), _) => k,
        (None, Some(names)) => names.len(),
        (None, None) => return Err(EnsembleError::parse(1, "missing `num_classes`")),
    };
    let names: HashMap<&str, usize> = raw
        .class_names
        .iter()
        .flatten()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let resolve = |c: &JsonClass| match c {
        JsonClass::Index(i) => Ok(*i),
        JsonClass::Name(n) => names
            .get(n.as_str())
            .copied()
            .ok_or_else(|| EnsembleError::parse(1, format!("unknown class name `{n}`"))),
    };
    let labels = raw.labels.iter().map(resolve).collect::<Result<Vec<_>, _>>()?;
    let rows = raw
        .predictions
        .iter()
        .map(|row| row.iter().map(resolve).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    PredictionMatrix::new(rows, labels, num_classes, raw.weights)
}

/// CSV text in the layout documented at module level; weights always
/// written, with shortest round-trip formatting.
pub fn to_csv(pm: &PredictionMatrix<f64>) -> String {
    let join = |vals: &[usize]| vals.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    let mut out = format!(
        "# K={} m={} M={}\nlabels,{}\n",
        pm.num_classes(),
        pm.num_examples(),
        pm.num_classifiers(),
        join(pm.labels())
    );
    for (i, row) in pm.classifiers().enumerate() {
        let _ = writeln!(out, "h{},{}", i + 1, join(row));
    }
    let weights: Vec<String> = pm.weights().iter().map(f64::to_string).collect();
    let _ = writeln!(out, "weights,{}", weights.join(","));
    out
}

pub fn to_json(pm: &PredictionMatrix<f64>) -> String {
    let doc = JsonPredictionsOut {
        num_classes: pm.num_classes(),
        labels: pm.labels(),
        predictions: pm.classifiers().collect(),
        weights: pm.weights(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

pub fn save_predictions(pm: &PredictionMatrix<f64>, path: &Path, format: PredictionFormat) -> Result<(), EnsembleError> {
    let text = match format {
        PredictionFormat::Csv => to_csv(pm),
        PredictionFormat::Json => to_json(pm),
    };
    fs::write(path, text)?;
    Ok(())
}
