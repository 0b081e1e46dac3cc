//! Multinomial logistic regression trained by full-batch gradient descent.
//!
//! Objective: weighted mean softmax cross-entropy plus `(l2/2)·‖W‖²`. The
//! biases are not penalized. Each iteration moves along a descent direction
//! (steepest descent or L-BFGS) by a step found with Armijo backtracking.

use std::collections::VecDeque;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{param, LabError};

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-18;
const LBFGS_MEMORY: usize = 10;

/// Search direction. Both use the same backtracking line search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Steepest descent; each trial step starts at twice the last accepted one.
    GradientDescent,
    /// Limited-memory BFGS, unit trial step.
    #[default]
    Lbfgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticOptions {
    pub l2: f64,
    pub max_iters: usize,
    /// Stop once the gradient's ∞-norm drops below this.
    pub tol: f64,
    #[serde(default)]
    pub solver: Solver,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self {
            l2: 1e-6,
            max_iters: 2000,
            tol: 1e-6,
            solver: Solver::Lbfgs,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    /// `K × N`.
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

impl LinearModel {
    pub fn zeros(num_classes: usize, n_features: usize) -> Self {
        Self {
            weights: Array2::zeros((num_classes, n_features)),
            biases: Array1::zeros(num_classes),
        }
    }

    pub fn num_classes(&self) -> usize {
        self.biases.len()
    }

    pub fn logits(&self, z: ArrayView2<f64>) -> Array2<f64> {
        z.dot(&self.weights.t()) + &self.biases
    }

    /// Arg-max class per row, lowest index on ties.
    pub fn predict(&self, z: ArrayView2<f64>) -> Vec<usize> {
        self.logits(z).rows().into_iter().map(argmax).collect()
    }

    fn axpy(&self, alpha: f64, dir: &LinearModel) -> LinearModel {
        LinearModel {
            weights: &self.weights + &(&dir.weights * alpha),
            biases: &self.biases + &(&dir.biases * alpha),
        }
    }

    fn scaled(&self, alpha: f64) -> LinearModel {
        LinearModel {
            weights: &self.weights * alpha,
            biases: &self.biases * alpha,
        }
    }

    fn dot(&self, other: &LinearModel) -> f64 {
        let w: f64 = self.weights.iter().zip(&other.weights).map(|(a, b)| a * b).sum();
        w + self.biases.dot(&other.biases)
    }

    fn sq_norm(&self) -> f64 {
        self.dot(self)
    }

    fn inf_norm(&self) -> f64 {
        self.weights.iter().chain(&self.biases).fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn argmax(row: ArrayView1<f64>) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = k;
        }
    }
    best
}

/// Training problem with per-row weights (bootstrap multiplicities).
pub struct Problem<'a> {
    z: ArrayView2<'a, f64>,
    y: &'a [usize],
    /// Row weights normalized to sum to one.
    w: Array1<f64>,
    l2: f64,
}

impl<'a> Problem<'a> {
    pub fn new(
        z: ArrayView2<'a, f64>,
        y: &'a [usize],
        sample_weights: Option<&[f64]>,
        num_classes: usize,
        l2: f64,
    ) -> Result<Self, LabError> {
        if z.nrows() != y.len() || z.nrows() == 0 {
            return Err(param(format!("{} rows but {} labels", z.nrows(), y.len())));
        }
        if y.iter().any(|&c| c >= num_classes) {
            return Err(param("label outside 0..K"));
        }
        if !(l2 >= 0.0 && l2.is_finite()) {
            return Err(param(format!("l2 must be finite and non-negative, got {l2}")));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(param("features must be finite"));
        }
        let w = match sample_weights {
            Some(sw) if sw.len() != y.len() => return Err(param("sample weight length mismatch")),
            Some(sw) => Array1::from(sw.to_vec()),
            None => Array1::ones(y.len()),
        };
        let total = w.sum();
        if total.is_nan() || total <= 0.0 || w.iter().any(|&v| v < 0.0) {
            return Err(param("sample weights must be non-negative with positive sum"));
        }
        Ok(Self {
            z,
            y,
            w: w / total,
            l2,
        })
    }

    /// Objective value and the softmax probabilities it was computed from.
    fn evaluate(&self, model: &LinearModel) -> (f64, Array2<f64>) {
        let mut probs = model.logits(self.z);
        let mut data_loss = 0.0;
        for ((mut row, &y), &w) in probs.rows_mut().into_iter().zip(self.y).zip(&self.w) {
            let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            data_loss += w * (lse - row[y]);
            row.mapv_inplace(|v| (v - lse).exp());
        }
        let penalty = 0.5 * self.l2 * model.weights.iter().map(|v| v * v).sum::<f64>();
        (data_loss + penalty, probs)
    }

    pub fn objective(&self, model: &LinearModel) -> f64 {
        self.evaluate(model).0
    }

    fn gradient_from(&self, model: &LinearModel, mut probs: Array2<f64>) -> LinearModel {
        for (j, &y) in self.y.iter().enumerate() {
            probs[[j, y]] -= 1.0;
        }
        Zip::from(probs.rows_mut()).and(&self.w).for_each(|mut row, &w| row *= w);
        let weights = probs.t().dot(&self.z) + &(&model.weights * self.l2);
        LinearModel {
            weights,
            biases: probs.sum_axis(Axis(0)),
        }
    }

    pub fn gradient(&self, model: &LinearModel) -> LinearModel {
        let (_, probs) = self.evaluate(model);
        self.gradient_from(model, probs)
    }
}

#[derive(Clone, Debug)]
pub struct LogisticFit {
    pub model: LinearModel,
    pub iterations: usize,
    pub loss: f64,
    pub grad_inf_norm: f64,
    pub converged: bool,
}

pub fn fit_multinomial_logistic(
    z: ArrayView2<f64>,
    y: &[usize],
    num_classes: usize,
    opts: &LogisticOptions,
) -> Result<LogisticFit, LabError> {
    fit_weighted(z, y, None, num_classes, opts)
}

pub fn fit_weighted(
    z: ArrayView2<f64>,
    y: &[usize],
    sample_weights: Option<&[f64]>,
    num_classes: usize,
    opts: &LogisticOptions,
) -> Result<LogisticFit, LabError> {
    let problem = Problem::new(z, y, sample_weights, num_classes, opts.l2)?;
    let mut model = LinearModel::zeros(num_classes, z.ncols());
    let (mut loss, mut probs) = problem.evaluate(&model);
    let mut history: VecDeque<Curvature> = VecDeque::with_capacity(LBFGS_MEMORY);
    let mut pending: Option<(LinearModel, LinearModel)> = None;
    let mut step = 1.0;
    let mut iterations = 0;
    loop {
        if !loss.is_finite() {
            return Err(LabError::NonFinite { iteration: iterations });
        }
        let grad = problem.gradient_from(&model, probs.clone());
        let grad_inf_norm = grad.inf_norm();
        let finish = |model, iterations, converged| LogisticFit {
            model,
            iterations,
            loss,
            grad_inf_norm,
            converged,
        };
        if grad_inf_norm < opts.tol {
            return Ok(finish(model, iterations, true));
        }
        if iterations >= opts.max_iters {
            return Ok(finish(model, iterations, false));
        }

        if let Some((s, old_grad)) = pending.take() {
            let y = grad.axpy(-1.0, &old_grad);
            let sy = s.dot(&y);
            if sy > 1e-12 * s.sq_norm().sqrt() * y.sq_norm().sqrt() {
                if history.len() == LBFGS_MEMORY {
                    history.pop_front();
                }
                history.push_back(Curvature { rho: 1.0 / sy, s, y });
            }
        }

        let (mut direction, mut trial) = match opts.solver {
            Solver::GradientDescent => (grad.scaled(-1.0), 2.0 * step),
            Solver::Lbfgs if history.is_empty() => (grad.scaled(-1.0), (1.0 / grad.sq_norm().sqrt()).min(1.0)),
            Solver::Lbfgs => (two_loop(&grad, &history), 1.0),
        };
        let mut slope = grad.dot(&direction);
        if slope >= 0.0 {
            history.clear();
            direction = grad.scaled(-1.0);
            slope = -grad.sq_norm();
            trial = (1.0 / grad.sq_norm().sqrt()).min(1.0);
        }

        let accepted = loop {
            let candidate = model.axpy(trial, &direction);
            let (new_loss, new_probs) = problem.evaluate(&candidate);
            if new_loss <= loss + ARMIJO * trial * slope {
                break Some((candidate, new_loss, new_probs));
            }
            trial *= 0.5;
            if trial < MIN_STEP {
                break None;
            }
        };
        iterations += 1;
        let Some((candidate, new_loss, new_probs)) = accepted else {
            // No representable step decreases the objective.
            return Ok(finish(model, iterations, false));
        };
        if opts.solver == Solver::Lbfgs {
            pending = Some((direction.scaled(trial), grad));
        }
        model = candidate;
        loss = new_loss;
        probs = new_probs;
        step = trial;
    }
}

struct Curvature {
    s: LinearModel,
    y: LinearModel,
    rho: f64,
}

/// `-H·g` for the limited-memory inverse Hessian estimate `H`.
fn two_loop(grad: &LinearModel, history: &VecDeque<Curvature>) -> LinearModel {
    let mut q = grad.clone();
    let mut alphas = Vec::with_capacity(history.len());
    for c in history.iter().rev() {
        let a = c.rho * c.s.dot(&q);
        q = q.axpy(-a, &c.y);
        alphas.push(a);
    }
    let last = history.back().expect("non-empty history");
    let mut r = q.scaled(last.s.dot(&last.y) / last.y.sq_norm());
    for (c, a) in history.iter().zip(alphas.iter().rev()) {
        let b = c.rho * c.y.dot(&r);
        r = r.axpy(a - b, &c.s);
    }
    r.scaled(-1.0)
}
