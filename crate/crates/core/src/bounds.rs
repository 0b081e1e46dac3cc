//! Upper and lower bounds on the majority-vote error and on the EIR, and
//! their verification against observed values.
//!
//! Some bounds need the ensemble to be competent; they are still computed for
//! incompetent ensembles but marked [`BoundStatus::Conditional`], so a
//! violation there is expected data rather than a refutation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::competence::{competence_check, CompetenceGrid, CompetenceVerdict};
use crate::ensemble::{error_profile, PredictionMatrix};
use crate::error::EnsembleError;
use crate::metrics::{diagnostics, DiagnosticsReport, TieRule};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    /// Hypotheses hold; the bound must hold.
    Applies,
    /// Needs competence, which failed on this data.
    Conditional,
    /// Undefined here (wrong `K`, non-positive margin, zero average error).
    Inapplicable,
}

impl BoundStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundStatus::Applies => "applies",
            BoundStatus::Conditional => "conditional",
            BoundStatus::Inapplicable => "inapplicable",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Applicability {
    pub first_order_ub: BoundStatus,
    pub competent_ub: BoundStatus,
    pub second_order_ub: BoundStatus,
    pub prior_binary_ub: BoundStatus,
    pub c_bound: BoundStatus,
    pub mv_lower: BoundStatus,
    pub eir_ub: BoundStatus,
    pub eir_lb: BoundStatus,
}

/// Every bound, as raw (unclipped) values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundTable<T> {
    pub num_classes: usize,
    /// `2·E[L]`, Markov on `W ≥ 1/2`.
    pub first_order_ub: T,
    /// `E[L]`, valid for competent ensembles.
    pub competent_ub: T,
    /// `(4(K-1)/K)·(E[L] - E[dis]/2)`, valid for competent ensembles.
    pub second_order_ub: T,
    /// `4·E[L] - 2·E[dis]`, binary problems only.
    pub prior_binary_ub: Option<T>,
    /// `1 - E[M]²/E[M²]`, defined when `E[M] > 0`.
    pub c_bound: Option<T>,
    /// `E[L] - E[dis]`.
    pub mv_lower: T,
    /// Upper bound on the EIR: the DER itself.
    pub eir_ub: Option<T>,
    /// `(2(K-1)/K)·DER - (3K-4)/K`, valid for competent ensembles.
    pub eir_lb: Option<T>,
    pub applicable: Applicability,
}

impl<T: Scalar> BoundTable<T> {
    /// `(name, raw value, status)` for every bound, in display order.
    pub fn entries(&self) -> Vec<(&'static str, Option<T>, BoundStatus)> {
        let a = &self.applicable;
        vec![
            ("first_order_ub", Some(self.first_order_ub), a.first_order_ub),
            ("competent_ub", Some(self.competent_ub), a.competent_ub),
            ("second_order_ub", Some(self.second_order_ub), a.second_order_ub),
            ("prior_binary_ub", self.prior_binary_ub, a.prior_binary_ub),
            ("c_bound", self.c_bound, a.c_bound),
            ("mv_lower", Some(self.mv_lower), a.mv_lower),
            ("eir_ub", self.eir_ub, a.eir_ub),
            ("eir_lb", self.eir_lb, a.eir_lb),
        ]
    }

    /// Whether any bound whose hypotheses hold is contradicted by `report`.
    pub fn any_applicable_violation(&self, report: &DiagnosticsReport<T>) -> bool {
        check_all(self, report).iter().any(|c| c.holds == Some(false))
    }
}

/// Clips an upper bound on an error rate to `[0, 1]` for display.
pub fn display_value<T: Scalar>(name: &str, raw: T) -> T {
    if name.starts_with("eir") {
        raw
    } else {
        raw.clamp_unit()
    }
}

pub fn bound_table<T: Scalar>(report: &DiagnosticsReport<T>, verdict: &CompetenceVerdict<T>) -> BoundTable<T> {
    let k = T::from_usize(report.num_classes);
    let two = T::two();
    let avg = report.avg_error;
    let dis = report.disagreement;
    let conditional = if verdict.competent {
        BoundStatus::Applies
    } else {
        BoundStatus::Conditional
    };

    let k_factor = two * (k - T::one()) / k;
    let binary = report.num_classes == 2;
    let prior_binary_ub = binary.then(|| two * two * avg - two * dis);
    let c_bound = (report.margin_mean > T::zero())
        .then(|| T::one() - report.margin_mean * report.margin_mean / report.margin_sq_mean);
    let eir_lb = report
        .der
        .map(|der| k_factor * der - (T::from_usize(3) * k - two * two) / k);

    let defined = |present: bool, status: BoundStatus| {
        if present {
            status
        } else {
            BoundStatus::Inapplicable
        }
    };

    BoundTable {
        num_classes: report.num_classes,
        first_order_ub: two * avg,
        competent_ub: avg,
        second_order_ub: two * k_factor * (avg - dis / two),
        applicable: Applicability {
            first_order_ub: BoundStatus::Applies,
            competent_ub: conditional,
            second_order_ub: conditional,
            prior_binary_ub: defined(prior_binary_ub.is_some(), BoundStatus::Applies),
            c_bound: defined(c_bound.is_some(), BoundStatus::Applies),
            mv_lower: BoundStatus::Applies,
            eir_ub: defined(report.der.is_some(), BoundStatus::Applies),
            eir_lb: defined(eir_lb.is_some(), conditional),
        },
        prior_binary_ub,
        c_bound,
        mv_lower: avg - dis,
        eir_ub: report.der,
        eir_lb,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Upper,
    Lower,
}

/// One bound compared against the quantity it bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck<T> {
    pub bound: String,
    pub kind: BoundKind,
    /// `"mv_error"` or `"eir"`.
    pub target: String,
    pub value: Option<T>,
    pub observed: Option<T>,
    pub status: BoundStatus,
    /// Whether the inequality holds (within tolerance), whatever the status.
    pub satisfied: Option<bool>,
    /// Outcome of the assertion; `None` when skipped (conditional or
    /// inapplicable).
    pub holds: Option<bool>,
    /// Signed distance in the direction of the inequality; negative means
    /// violated.
    pub slack: Option<T>,
}

fn check_all<T: Scalar>(table: &BoundTable<T>, report: &DiagnosticsReport<T>) -> Vec<BoundCheck<T>> {
    table
        .entries()
        .into_iter()
        .map(|(name, value, status)| {
            let (kind, target, observed) = match name {
                "mv_lower" => (BoundKind::Lower, "mv_error", Some(report.mv_error)),
                "eir_ub" => (BoundKind::Upper, "eir", report.eir),
                "eir_lb" => (BoundKind::Lower, "eir", report.eir),
                _ => (BoundKind::Upper, "mv_error", Some(report.mv_error)),
            };
            let slack = value.zip(observed).map(|(b, o)| match kind {
                BoundKind::Upper => b - o,
                BoundKind::Lower => o - b,
            });
            let satisfied = slack.map(|s| s >= T::zero() - T::tolerance());
            let holds = match status {
                BoundStatus::Applies => satisfied,
                _ => None,
            };
            BoundCheck {
                bound: name.to_string(),
                kind,
                target: target.to_string(),
                value,
                observed,
                status,
                satisfied,
                holds,
                slack,
            }
        })
        .collect()
}

/// Diagnostics, competence verdict, bound table, and per-bound checks for
/// one ensemble. Failures are recorded, never raised.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundVerification<T> {
    pub report: DiagnosticsReport<T>,
    pub verdict: CompetenceVerdict<T>,
    pub table: BoundTable<T>,
    pub checks: Vec<BoundCheck<T>>,
}

impl<T: Scalar> BoundVerification<T> {
    pub fn failures(&self) -> impl Iterator<Item = &BoundCheck<T>> {
        self.checks.iter().filter(|c| c.holds == Some(false))
    }

    pub fn all_pass(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn check(&self, bound: &str) -> Option<&BoundCheck<T>> {
        self.checks.iter().find(|c| c.bound == bound)
    }
}

/// Runs diagnostics, a strict (slack 0) competence check, and the bound
/// table, then compares every bound with the observed value.
pub fn verify_bounds<T: Scalar>(pm: &PredictionMatrix<T>, tie_rule: TieRule) -> BoundVerification<T> {
    verify_bounds_with_slack(pm, tie_rule, T::zero())
}

/// [`verify_bounds`] with a competence slack. A positive slack can admit
/// incompetent ensembles, whose conditional bounds may then fail.
pub fn verify_bounds_with_slack<T: Scalar>(
    pm: &PredictionMatrix<T>,
    tie_rule: TieRule,
    slack: T,
) -> BoundVerification<T> {
    let report = diagnostics(pm, tie_rule);
    let verdict = competence_check(&error_profile(pm), &CompetenceGrid::Auto, slack)
        .expect("a valid prediction matrix has at least one example");
    let table = bound_table(&report, &verdict);
    let checks = check_all(&table, &report);
    BoundVerification {
        report,
        verdict,
        table,
        checks,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tighter {
    Ours,
    CBound,
    Tie,
    /// The C-bound is undefined (non-positive mean margin).
    NotComparable,
}

impl Tighter {
    pub fn as_str(self) -> &'static str {
        match self {
            Tighter::Ours => "ours",
            Tighter::CBound => "c_bound",
            Tighter::Tie => "tie",
            Tighter::NotComparable => "n/a",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow<T> {
    pub ensemble_id: String,
    pub ours: T,
    pub c_bound: Option<T>,
    pub tighter: Tighter,
    /// The second-order bound is only guaranteed for competent ensembles.
    pub competent: bool,
}

/// Second-order bound against the C-bound, one row per ensemble. Both use
/// the lowest-index tie rule (neither depends on it).
pub fn bound_comparison<T: Scalar>(ensembles: &[(String, PredictionMatrix<T>)]) -> Vec<ComparisonRow<T>> {
    ensembles
        .iter()
        .map(|(id, pm)| {
            let v = verify_bounds(pm, TieRule::LowestIndex);
            let ours = v.table.second_order_ub;
            let tighter = match v.table.c_bound {
                None => Tighter::NotComparable,
                Some(c) if ours.approx_eq(c) => Tighter::Tie,
                Some(c) if ours < c => Tighter::Ours,
                Some(_) => Tighter::CBound,
            };
            ComparisonRow {
                ensemble_id: id.clone(),
                ours,
                c_bound: v.table.c_bound,
                tighter,
                competent: v.verdict.competent,
            }
        })
        .collect()
}

const COMPARISON_HEADER: &str = "ensemble_id,ours,c_bound,tighter,competent";
const CHECKS_HEADER: &str = "bound,kind,target,raw,display,observed,status,holds,slack";

/// CSV with header `ensemble_id,ours,c_bound,tighter,competent`; an undefined
/// C-bound is an empty field.
pub fn comparison_to_csv<T: Scalar>(rows: &[ComparisonRow<T>]) -> String {
    let mut out = format!("{COMPARISON_HEADER}\n");
    for r in rows {
        let c = r.c_bound.map(|c| c.to_f64().to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.ensemble_id,
            r.ours.to_f64(),
            c,
            r.tighter.as_str(),
            r.competent
        );
    }
    out
}

fn data_lines<'a>(text: &'a str, header: &str) -> Result<Vec<(usize, Vec<&'a str>)>, EnsembleError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        _ => return Err(EnsembleError::parse(1, format!("expected header `{header}`"))),
    }
    let width = header.split(',').count();
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let fields: Vec<&str> = l.split(',').map(str::trim).collect();
            if fields.len() == width {
                Ok((i + 1, fields))
            } else {
                Err(EnsembleError::parse(
                    i + 1,
                    format!("expected {width} fields, found {}", fields.len()),
                ))
            }
        })
        .collect()
}

fn parse_f64(line: usize, s: &str) -> Result<f64, EnsembleError> {
    s.parse().map_err(|_| EnsembleError::parse(line, format!("`{s}` is not a number")))
}

fn parse_opt(line: usize, s: &str) -> Result<Option<f64>, EnsembleError> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(line, s).map(Some)
    }
}

pub fn comparison_from_csv(text: &str) -> Result<Vec<ComparisonRow<f64>>, EnsembleError> {
    data_lines(text, COMPARISON_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            let tighter = match f[3] {
                "ours" => Tighter::Ours,
                "c_bound" => Tighter::CBound,
                "tie" => Tighter::Tie,
                "n/a" => Tighter::NotComparable,
                other => return Err(EnsembleError::parse(line, format!("unknown verdict `{other}`"))),
            };
            Ok(ComparisonRow {
                ensemble_id: f[0].to_string(),
                ours: parse_f64(line, f[1])?,
                c_bound: parse_opt(line, f[2])?,
                tighter,
                competent: f[4]
                    .parse()
                    .map_err(|_| EnsembleError::parse(line, format!("`{}` is not a boolean", f[4])))?,
            })
        })
        .collect()
}

/// CSV of a verification: `bound,kind,target,raw,display,observed,status,holds,slack`.
pub fn checks_to_csv<T: Scalar>(checks: &[BoundCheck<T>]) -> String {
    let opt = |v: Option<T>| v.map(|x| x.to_f64().to_string()).unwrap_or_default();
    let mut out = format!("{CHECKS_HEADER}\n");
    for c in checks {
        let kind = match c.kind {
            BoundKind::Upper => "upper",
            BoundKind::Lower => "lower",
        };
        let holds = match c.holds {
            Some(true) => "pass",
            Some(false) => "fail",
            None => "skipped",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            c.bound,
            kind,
            c.target,
            opt(c.value),
            opt(c.value.map(|v| display_value(&c.bound, v))),
            opt(c.observed),
            c.status.as_str(),
            holds,
            opt(c.slack),
        );
    }
    out
}

/// Reads the output of [`checks_to_csv`]. The `display` column is derived
/// and ignored; `satisfied` is recomputed from `slack`.
pub fn checks_from_csv(text: &str) -> Result<Vec<BoundCheck<f64>>, EnsembleError> {
    data_lines(text, CHECKS_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            let bad = |what: &str, v: &str| EnsembleError::parse(line, format!("unknown {what} `{v}`"));
            let kind = match f[1] {
                "upper" => BoundKind::Upper,
                "lower" => BoundKind::Lower,
                other => return Err(bad("kind", other)),
            };
            let status = match f[6] {
                "applies" => BoundStatus::Applies,
                "conditional" => BoundStatus::Conditional,
                "inapplicable" => BoundStatus::Inapplicable,
                other => return Err(bad("status", other)),
            };
            let holds = match f[7] {
                "pass" => Some(true),
                "fail" => Some(false),
                "skipped" => None,
                other => return Err(bad("outcome", other)),
            };
            let slack = parse_opt(line, f[8])?;
            Ok(BoundCheck {
                bound: f[0].to_string(),
                kind,
                target: f[2].to_string(),
                value: parse_opt(line, f[3])?,
                observed: parse_opt(line, f[5])?,
                status,
                satisfied: slack.map(|s| s >= -f64::tolerance()),
                holds,
                slack,
            })
        })
        .collect()
}
