//! Scalar diagnostics of a weighted majority-vote ensemble.
//!
//! Every quantity is an empirical estimate over the examples of a
//! [`PredictionMatrix`]: the weighted average error of a single member, the
//! error of the weighted majority vote, the expected pairwise disagreement and
//! tandem loss, the vote margin moments, and the two ratios built from them,
//! the ensemble improvement rate (EIR) and the disagreement-error ratio (DER).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ensemble::{class_mass, error_profile, ClassMassProfile, ErrorProfile, PredictionMatrix};
use crate::scalar::{mean, pairwise_sum, Scalar};

/// How the majority vote resolves classes whose vote masses are equal
/// (within [`Scalar::tolerance`]).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    /// Smallest tied class index wins.
    #[default]
    LowestIndex,
    /// A tie is an error whatever the label.
    Pessimistic,
}

impl fmt::Display for TieRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieRule::LowestIndex => "lowest-index",
            TieRule::Pessimistic => "pessimistic",
        })
    }
}

impl FromStr for TieRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lowest-index" => Ok(TieRule::LowestIndex),
            "pessimistic" => Ok(TieRule::Pessimistic),
            other => Err(format!("unknown tie rule `{other}`")),
        }
    }
}

/// Per-example majority-vote predictions.
#[derive(Clone, Debug, PartialEq)]
pub struct MajorityVote {
    /// `None` is the pessimistic "always wrong" sentinel for a tied example.
    pub predictions: Vec<Option<usize>>,
    pub tie_count: usize,
}

impl MajorityVote {
    pub fn num_errors(&self, labels: &[usize]) -> usize {
        self.predictions
            .iter()
            .zip(labels)
            .filter(|(p, &y)| **p != Some(y))
            .count()
    }
}

fn vote(mass: &ClassMassProfile<impl Scalar>, tie_rule: TieRule) -> MajorityVote {
    let mut tie_count = 0;
    let predictions = mass
        .rows()
        .map(|row| {
            let top = row.iter().copied().fold(row[0], Scalar::max_val);
            let mut winners = row.iter().enumerate().filter(|(_, &v)| v.approx_eq(top));
            let first = winners.next().map(|(k, _)| k).expect("row is non-empty");
            if winners.next().is_some() {
                tie_count += 1;
                match tie_rule {
                    TieRule::LowestIndex => Some(first),
                    TieRule::Pessimistic => None,
                }
            } else {
                Some(first)
            }
        })
        .collect();
    MajorityVote {
        predictions,
        tie_count,
    }
}

pub fn majority_vote<T: Scalar>(pm: &PredictionMatrix<T>, tie_rule: TieRule) -> MajorityVote {
    vote(&class_mass(pm), tie_rule)
}

/// Error rate of the majority-vote classifier.
pub fn mv_error<T: Scalar>(pm: &PredictionMatrix<T>, tie_rule: TieRule) -> T {
    let mv = majority_vote(pm, tie_rule);
    T::ratio(mv.num_errors(pm.labels()), pm.num_examples())
}

/// `E_ρ[L(h)] = Σ_i ρ_i L(h_i)`.
pub fn average_error<T: Scalar>(pm: &PredictionMatrix<T>) -> T {
    let terms: Vec<T> = pm
        .classifier_error_rates()
        .into_iter()
        .zip(pm.weights())
        .map(|(err, &w)| err * w)
        .collect();
    pairwise_sum(&terms)
}

fn disagreement_from_mass<T: Scalar>(mass: &ClassMassProfile<T>) -> T {
    let per_example: Vec<T> = mass
        .rows()
        .map(|row| T::one() - row.iter().fold(T::zero(), |acc, &p| acc + p * p))
        .collect();
    mean(&per_example)
}

/// Expected disagreement `E_{h,h'~ρ}[dis(h,h')]` with `h, h'` drawn
/// independently, so identical pairs are included (and contribute zero).
///
/// Computed per example as `1 - Σ_k mass_k²`, which is `O(mK)` instead of the
/// `O(M²m)` pairwise sum.
pub fn disagreement<T: Scalar>(pm: &PredictionMatrix<T>) -> T {
    disagreement_from_mass(&class_mass(pm))
}

/// Tandem loss `E_{h,h'}[L(h,h')]`, the probability that two independent
/// draws both err; equal to `E[W_ρ²]`.
pub fn tandem_loss<T: Scalar>(pm: &PredictionMatrix<T>) -> T {
    error_profile(pm).mean_w_sq
}

fn margins<T: Scalar>(mass: &ClassMassProfile<T>, labels: &[usize]) -> Vec<T> {
    mass.rows()
        .zip(labels)
        .map(|(row, &y)| {
            let best_wrong = row
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != y)
                .map(|(_, &v)| v)
                .fold(T::zero(), Scalar::max_val);
            row[y] - best_wrong
        })
        .collect()
}

/// First and second moments of the margin `M_ρ = mass[y] - max_{k≠y} mass[k]`.
pub fn margin_moments<T: Scalar>(pm: &PredictionMatrix<T>) -> (T, T) {
    let m = margins(&class_mass(pm), pm.labels());
    let sq: Vec<T> = m.iter().map(|&v| v * v).collect();
    (mean(&m), mean(&sq))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticWarning {
    /// Average error is zero, so EIR and DER are undefined.
    ZeroAverageError,
}

/// Every scalar diagnostic of one ensemble on one labelled sample.
///
/// `disagreement` draws both classifiers independently from the weights,
/// diagonal pairs included. `eir` and `der` are `None` (serialized as
/// `null`) exactly when `avg_error` is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport<T> {
    pub avg_error: T,
    pub mv_error: T,
    pub disagreement: T,
    pub tandem: T,
    pub eir: Option<T>,
    pub der: Option<T>,
    pub margin_mean: T,
    pub margin_sq_mean: T,
    pub tie_count: usize,
    pub tie_rule: TieRule,
    pub num_classes: usize,
    pub warnings: Vec<DiagnosticWarning>,
}

pub fn diagnostics<T: Scalar>(pm: &PredictionMatrix<T>, tie_rule: TieRule) -> DiagnosticsReport<T> {
    let mass = class_mass(pm);
    let profile: ErrorProfile<T> = error_profile(pm);
    let mv = vote(&mass, tie_rule);
    let avg_error = average_error(pm);
    let mv_error = T::ratio(mv.num_errors(pm.labels()), pm.num_examples());
    let disagreement = disagreement_from_mass(&mass);
    let m = margins(&mass, pm.labels());
    let m_sq: Vec<T> = m.iter().map(|&v| v * v).collect();

    let defined = avg_error > T::zero();
    let (eir, der, warnings) = if defined {
        (
            Some((avg_error - mv_error) / avg_error),
            Some(disagreement / avg_error),
            vec![],
        )
    } else {
        (None, None, vec![DiagnosticWarning::ZeroAverageError])
    };

    DiagnosticsReport {
        avg_error,
        mv_error,
        disagreement,
        tandem: profile.mean_w_sq,
        eir,
        der,
        margin_mean: mean(&m),
        margin_sq_mean: mean(&m_sq),
        tie_count: mv.tie_count,
        tie_rule,
        num_classes: pm.num_classes(),
        warnings,
    }
}

impl<T: Scalar> DiagnosticsReport<T> {
    pub fn has_zero_error_warning(&self) -> bool {
        self.warnings.contains(&DiagnosticWarning::ZeroAverageError)
    }
}
