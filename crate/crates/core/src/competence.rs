//! Empirical competence check.
//!
//! An ensemble is competent when, for every `t` in `[0, 1/2]`, the error mass
//! `W` lands in `[t, 1/2)` at least as often as in `[1/2, 1 - t]`. Both sides
//! are step functions of `t` under the empirical law of `W`, so checking them
//! at the breakpoints `{w_j} ∪ {1 - w_j}` decides the condition exactly.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensemble::ErrorProfile;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum CompetenceError {
    #[error("competence curve needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("error profile is empty")]
    EmptyProfile,
    #[error("grid value {0} lies outside [0, 1/2]")]
    GridOutOfRange(f64),
    #[error("malformed competence CSV at line {line}: {message}")]
    Csv { line: usize, message: String },
}

/// Where to evaluate the two interval probabilities.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum CompetenceGrid<T> {
    /// Breakpoints of the empirical step functions, plus `0` and `1/2`.
    #[default]
    Auto,
    Explicit(Vec<T>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompetenceVerdict<T> {
    pub t_grid: Vec<T>,
    /// `P̂(W ∈ [t, 1/2))` at each grid point.
    pub lhs: Vec<T>,
    /// `P̂(W ∈ [1/2, 1 - t])` at each grid point.
    pub rhs: Vec<T>,
    pub competent: bool,
    /// `max(0, max_t (rhs - lhs))`.
    pub max_violation: T,
    /// Smallest grid point attaining a positive `max_violation`.
    pub violation_t: Option<T>,
    pub slack: T,
}

/// One row of a competence plot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint<T> {
    pub t: T,
    pub lhs: T,
    pub rhs: T,
}

/// Error masses sorted ascending, for counting by binary search.
struct SortedMasses<T> {
    w: Vec<T>,
}

impl<T: Scalar> SortedMasses<T> {
    fn new(profile: &ErrorProfile<T>) -> Self {
        let mut w = profile.w.clone();
        w.sort_by(|a, b| a.partial_cmp(b).expect("error masses are finite"));
        Self { w }
    }

    /// Number of masses strictly below `x`.
    fn below(&self, x: T) -> usize {
        self.w.partition_point(|&v| v < x)
    }

    /// Number of masses `<= x`.
    fn at_most(&self, x: T) -> usize {
        self.w.partition_point(|&v| v <= x)
    }

    /// `(P̂(W ∈ [t, 1/2)), P̂(W ∈ [1/2, 1 - t]))`. Boundaries are widened by
    /// the scalar tolerance so a mass that is 1/2 up to rounding counts to the
    /// right interval only.
    fn interval_masses(&self, t: T) -> (T, T) {
        let tol = T::tolerance();
        let half = T::half();
        let m = self.w.len();
        let lhs = self.below(half - tol).saturating_sub(self.below(t - tol));
        let rhs = self.at_most(T::one() - t + tol).saturating_sub(self.below(half - tol));
        (T::ratio(lhs, m), T::ratio(rhs, m))
    }
}

/// Both interval probabilities at a single `t`.
pub fn interval_masses<T: Scalar>(profile: &ErrorProfile<T>, t: T) -> (T, T) {
    SortedMasses::new(profile).interval_masses(t)
}

fn auto_grid<T: Scalar>(profile: &ErrorProfile<T>) -> Vec<T> {
    let half = T::half();
    let mut grid: Vec<T> = profile
        .w
        .iter()
        .flat_map(|&w| [w, T::one() - w])
        .map(|v| v.max_val(T::zero()).min_val(half))
        .chain([T::zero(), half])
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    grid.dedup();
    grid
}

pub fn competence_check<T: Scalar>(
    profile: &ErrorProfile<T>,
    grid: &CompetenceGrid<T>,
    slack: T,
) -> Result<CompetenceVerdict<T>, CompetenceError> {
    if profile.is_empty() {
        return Err(CompetenceError::EmptyProfile);
    }
    let t_grid = match grid {
        CompetenceGrid::Auto => auto_grid(profile),
        CompetenceGrid::Explicit(ts) => {
            if let Some(t) = ts.iter().find(|&&t| t < T::zero() || t > T::half()) {
                return Err(CompetenceError::GridOutOfRange(t.to_f64()));
            }
            ts.clone()
        }
    };
    let sorted = SortedMasses::new(profile);
    let (lhs, rhs): (Vec<T>, Vec<T>) = t_grid.iter().map(|&t| sorted.interval_masses(t)).unzip();

    let mut worst = T::zero();
    let mut violation_t = None;
    for ((&t, &l), &r) in t_grid.iter().zip(&lhs).zip(&rhs) {
        if r - l > worst {
            worst = r - l;
            violation_t = Some(t);
        }
    }
    Ok(CompetenceVerdict {
        competent: worst <= slack,
        max_violation: worst,
        violation_t,
        slack,
        t_grid,
        lhs,
        rhs,
    })
}

/// Interval probabilities on a uniform grid of `n_points` over `[0, 1/2]`.
pub fn competence_curve<T: Scalar>(
    profile: &ErrorProfile<T>,
    n_points: usize,
) -> Result<Vec<CurvePoint<T>>, CompetenceError> {
    if n_points < 2 {
        return Err(CompetenceError::TooFewPoints(n_points));
    }
    if profile.is_empty() {
        return Err(CompetenceError::EmptyProfile);
    }
    let sorted = SortedMasses::new(profile);
    Ok((0..n_points)
        .map(|i| {
            let t = T::ratio(i, 2 * (n_points - 1));
            let (lhs, rhs) = sorted.interval_masses(t);
            CurvePoint { t, lhs, rhs }
        })
        .collect())
}

/// Renders curve points as CSV with header `t,lhs,rhs`.
pub fn curve_to_csv<T: Scalar>(points: &[CurvePoint<T>]) -> String {
    let mut out = String::from("t,lhs,rhs\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.t.to_f64(), p.lhs.to_f64(), p.rhs.to_f64());
    }
    out
}

pub fn curve_from_csv(text: &str) -> Result<Vec<CurvePoint<f64>>, CompetenceError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "t,lhs,rhs")) => {}
        _ => {
            return Err(CompetenceError::Csv {
                line: 1,
                message: "expected header `t,lhs,rhs`".into(),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let fields: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
            match fields.as_deref() {
                Ok([t, lhs, rhs]) => Ok(CurvePoint {
                    t: *t,
                    lhs: *lhs,
                    rhs: *rhs,
                }),
                _ => Err(CompetenceError::Csv {
                    line: i + 1,
                    message: format!("expected three numbers, got `{line}`"),
                }),
            }
        })
        .collect()
}

impl<T: Scalar> CompetenceVerdict<T> {
    /// The verdict's grid as plot rows.
    pub fn points(&self) -> Vec<CurvePoint<T>> {
        self.t_grid
            .iter()
            .zip(&self.lhs)
            .zip(&self.rhs)
            .map(|((&t, &lhs), &rhs)| CurvePoint { t, lhs, rhs })
            .collect()
    }
}
