//! Finite ensembles on which the majority vote is (almost) twice as bad as
//! an average member, so the first-order bound `L(MV) ≤ 2·E[L]` is tight.
//!
//! Both constructions are binary and use two weighted classifiers: a perfect
//! one with weight `1/2 - ε` and a faulty one with weight `1/2 + ε`.
//!
//! * [`PathologyKind::Example1`]: the faulty classifier is wrong everywhere.
//!   `E[L] = 1/2 + ε`, `L(MV) = 1`.
//! * [`PathologyKind::Example2`]: the faulty classifier is wrong only on the
//!   last `2δm` examples. `E[L] = δ(1 + 2ε)`, `L(MV) = 2δ`, and the mean
//!   margin `1 - 2δ(1 + 2ε)` can be close to one.

use serde::{Deserialize, Serialize};

use crate::competence::{competence_check, CompetenceGrid, CompetenceVerdict};
use crate::ensemble::{error_profile, PredictionMatrix};
use crate::error::PathologyError;
use crate::metrics::{diagnostics, DiagnosticsReport, TieRule};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathologyKind {
    Example1,
    Example2,
}

impl std::str::FromStr for PathologyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "example1" => Ok(PathologyKind::Example1),
            "example2" => Ok(PathologyKind::Example2),
            other => Err(format!("unknown pathology `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathologySpec<T> {
    pub kind: PathologyKind,
    pub epsilon: T,
    /// Only used by `Example2`.
    pub delta: Option<T>,
    /// Test-set size.
    pub m: usize,
}

impl<T: Scalar> PathologySpec<T> {
    pub fn example1(epsilon: T, m: usize) -> Self {
        Self {
            kind: PathologyKind::Example1,
            epsilon,
            delta: None,
            m,
        }
    }

    pub fn example2(delta: T, epsilon: T, m: usize) -> Self {
        Self {
            kind: PathologyKind::Example2,
            epsilon,
            delta: Some(delta),
            m,
        }
    }

    /// Weights of the perfect and the faulty classifier.
    pub fn weights(&self) -> (T, T) {
        let half = T::half();
        (half - self.epsilon, half + self.epsilon)
    }

    /// Number of examples the faulty classifier gets wrong.
    pub fn error_count(&self) -> Result<usize, PathologyError> {
        self.validate()?;
        match self.kind {
            PathologyKind::Example1 => Ok(self.m),
            PathologyKind::Example2 => {
                let delta = self.delta.expect("validated");
                let exact = T::two() * delta * T::from_usize(self.m);
                let rounded = exact.to_f64().round();
                let count = rounded as usize;
                let scale = T::one().max_val(exact);
                if rounded < 0.0 || (exact - T::from_usize(count)).abs_val() > T::tolerance() * scale {
                    return Err(PathologyError::Spec(format!(
                        "2·delta·m = {} is not an integer",
                        exact.to_f64()
                    )));
                }
                Ok(count)
            }
        }
    }

    fn validate(&self) -> Result<(), PathologyError> {
        let in_open_half = |v: T| v > T::zero() && v < T::half();
        if !in_open_half(self.epsilon) {
            return Err(PathologyError::Spec(format!(
                "epsilon must lie in (0, 1/2), got {}",
                self.epsilon.to_f64()
            )));
        }
        if self.m == 0 {
            return Err(PathologyError::Spec("m must be positive".into()));
        }
        match (self.kind, self.delta) {
            (PathologyKind::Example2, None) => Err(PathologyError::Spec("example2 needs delta".into())),
            (PathologyKind::Example2, Some(d)) if !in_open_half(d) => Err(PathologyError::Spec(format!(
                "delta must lie in (0, 1/2), got {}",
                d.to_f64()
            ))),
            _ => Ok(()),
        }
    }

    /// Closed-form `(avg_error, mv_error, margin_mean)`.
    pub fn closed_forms(&self) -> ClosedForms<T> {
        let one = T::one();
        let two = T::two();
        let eps = self.epsilon;
        match self.kind {
            PathologyKind::Example1 => ClosedForms {
                avg_error: T::half() + eps,
                mv_error: one,
                // correct mass 1/2 - ε minus wrong mass 1/2 + ε
                margin_mean: T::zero() - two * eps,
            },
            PathologyKind::Example2 => {
                let delta = self.delta.unwrap_or_else(T::zero);
                ClosedForms {
                    avg_error: delta * (one + two * eps),
                    mv_error: two * delta,
                    margin_mean: one - two * delta * (one + two * eps),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedForms<T> {
    pub avg_error: T,
    pub mv_error: T,
    pub margin_mean: T,
}

/// Builds the pathological binary ensemble. Labels alternate `0, 1, 0, …`.
pub fn make_pathology<T: Scalar>(spec: &PathologySpec<T>) -> Result<PredictionMatrix<T>, PathologyError> {
    let wrong = spec.error_count()?;
    let labels: Vec<usize> = (0..spec.m).map(|j| j % 2).collect();
    let faulty: Vec<usize> = labels
        .iter()
        .enumerate()
        .map(|(j, &y)| if j >= spec.m - wrong { 1 - y } else { y })
        .collect();
    let (good_w, bad_w) = spec.weights();
    PredictionMatrix::new(vec![labels.clone(), faulty], labels, 2, Some(vec![good_w, bad_w]))
        .map_err(|e| PathologyError::Spec(e.to_string()))
}

/// Generated matrix checked against its closed forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathologyAudit<T> {
    pub spec: PathologySpec<T>,
    pub expected: ClosedForms<T>,
    pub report: DiagnosticsReport<T>,
    pub verdict: CompetenceVerdict<T>,
    pub avg_error_matches: bool,
    pub mv_error_matches: bool,
    pub margin_matches: bool,
    pub incompetent: bool,
    /// A negative EIR must come with an incompetent verdict.
    pub eir_consistent: bool,
}

impl<T> PathologyAudit<T> {
    pub fn passed(&self) -> bool {
        self.avg_error_matches && self.mv_error_matches && self.margin_matches && self.incompetent && self.eir_consistent
    }
}

pub fn pathology_audit<T: Scalar>(spec: &PathologySpec<T>) -> Result<PathologyAudit<T>, PathologyError> {
    let pm = make_pathology(spec)?;
    let report = diagnostics(&pm, TieRule::Pessimistic);
    let verdict = competence_check(&error_profile(&pm), &CompetenceGrid::Auto, T::zero())
        .expect("pathology has at least one example");
    let expected = spec.closed_forms();
    let eir_negative = report.eir.is_some_and(|e| e < T::zero() - T::tolerance());
    Ok(PathologyAudit {
        avg_error_matches: report.avg_error.approx_eq(expected.avg_error),
        mv_error_matches: report.mv_error.approx_eq(expected.mv_error),
        margin_matches: report.margin_mean.approx_eq(expected.margin_mean),
        incompetent: !verdict.competent,
        eir_consistent: !eir_negative || !verdict.competent,
        spec: spec.clone(),
        expected,
        report,
        verdict,
    })
}
