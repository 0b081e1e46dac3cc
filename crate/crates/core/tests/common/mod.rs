//! Random ensembles and brute-force reference implementations.
//!
//! The oracles below loop over classifiers, pairs and classes directly and
//! share no code with the library.

#![allow(dead_code)]

use eir_core::{PredictionMatrix, TieRule};
use rand::Rng;

#[derive(Clone, Debug)]
pub struct RawEnsemble {
    pub preds: Vec<Vec<usize>>,
    pub labels: Vec<usize>,
    pub k: usize,
    pub weights: Vec<f64>,
}

impl RawEnsemble {
    pub fn matrix(&self) -> PredictionMatrix<f64> {
        PredictionMatrix::new(self.preds.clone(), self.labels.clone(), self.k, Some(self.weights.clone())).unwrap()
    }

    pub fn m(&self) -> usize {
        self.labels.len()
    }
}

/// Corpus generator: `M ≤ 6`, `m ≤ 30`, `K ≤ 4`.
///
/// Predictions are biased toward the label so that competent ensembles
/// are common. A third of the ensembles use uniform weights, which makes
/// exact vote ties frequent.
pub fn random_ensemble<R: Rng>(rng: &mut R) -> RawEnsemble {
    let big_m = rng.random_range(1..=6);
    let m = rng.random_range(1..=30);
    let k = rng.random_range(2..=4);
    let accuracy: f64 = rng.random_range(0.0..1.0);
    let labels: Vec<usize> = (0..m).map(|_| rng.random_range(0..k)).collect();
    let preds = (0..big_m)
        .map(|_| {
            labels
                .iter()
                .map(|&y| if rng.random_bool(accuracy) { y } else { rng.random_range(0..k) })
                .collect()
        })
        .collect();
    let weights = if rng.random_bool(1.0 / 3.0) {
        vec![1.0 / big_m as f64; big_m]
    } else {
        let raw: Vec<f64> = (0..big_m).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|w| w / total).collect()
    };
    RawEnsemble {
        preds,
        labels,
        k,
        weights,
    }
}

pub fn corpus(seed: u64, n: usize) -> Vec<RawEnsemble> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_ensemble(&mut rng)).collect()
}

pub fn oracle_avg_error(e: &RawEnsemble) -> f64 {
    let m = e.m() as f64;
    e.preds
        .iter()
        .zip(&e.weights)
        .map(|(h, w)| w * h.iter().zip(&e.labels).filter(|(p, y)| p != y).count() as f64 / m)
        .sum()
}

fn vote_mass(e: &RawEnsemble, j: usize) -> Vec<f64> {
    let mut mass = vec![0.0; e.k];
    for (h, w) in e.preds.iter().zip(&e.weights) {
        mass[h[j]] += w;
    }
    mass
}

pub fn oracle_mv_error(e: &RawEnsemble, rule: TieRule, tol: f64) -> f64 {
    let mut errors = 0;
    for j in 0..e.m() {
        let mass = vote_mass(e, j);
        let top = mass.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let winners: Vec<usize> = (0..e.k).filter(|&c| mass[c] >= top - tol).collect();
        let wrong = match rule {
            TieRule::LowestIndex => winners[0] != e.labels[j],
            TieRule::Pessimistic => winners.len() > 1 || winners[0] != e.labels[j],
        };
        errors += wrong as usize;
    }
    errors as f64 / e.m() as f64
}

/// `Σ_{i,i'} ρ_i ρ_i' · P(h_i ≠ h_i')`, diagonal included.
pub fn oracle_pairwise_disagreement(e: &RawEnsemble) -> f64 {
    let m = e.m() as f64;
    let mut total = 0.0;
    for (a, wa) in e.preds.iter().zip(&e.weights) {
        for (b, wb) in e.preds.iter().zip(&e.weights) {
            let differ = a.iter().zip(b).filter(|(x, y)| x != y).count() as f64;
            total += wa * wb * differ / m;
        }
    }
    total
}

/// `Σ_{i,i'} ρ_i ρ_i' · P(h_i and h_i' both wrong)`.
pub fn oracle_tandem(e: &RawEnsemble) -> f64 {
    let m = e.m() as f64;
    let mut total = 0.0;
    for (a, wa) in e.preds.iter().zip(&e.weights) {
        for (b, wb) in e.preds.iter().zip(&e.weights) {
            let both = (0..e.m()).filter(|&j| a[j] != e.labels[j] && b[j] != e.labels[j]).count() as f64;
            total += wa * wb * both / m;
        }
    }
    total
}

pub fn oracle_margins(e: &RawEnsemble) -> Vec<f64> {
    (0..e.m())
        .map(|j| {
            let mass = vote_mass(e, j);
            let y = e.labels[j];
            let best_wrong = (0..e.k).filter(|&c| c != y).map(|c| mass[c]).fold(f64::NEG_INFINITY, f64::max);
            mass[y] - best_wrong
        })
        .collect()
}

pub fn oracle_error_mass(e: &RawEnsemble) -> Vec<f64> {
    (0..e.m())
        .map(|j| {
            e.preds
                .iter()
                .zip(&e.weights)
                .filter(|(h, _)| h[j] != e.labels[j])
                .map(|(_, w)| w)
                .sum()
        })
        .collect()
}

/// Competence by scanning every `t` in a fine grid plus all breakpoints.
pub fn oracle_competent(e: &RawEnsemble, tol: f64) -> bool {
    let w = oracle_error_mass(e);
    let mut ts: Vec<f64> = (0..=200).map(|i| i as f64 / 400.0).collect();
    for &v in &w {
        ts.push(v.min(0.5));
        ts.push((1.0 - v).clamp(0.0, 0.5));
    }
    let m = w.len() as f64;
    ts.into_iter().all(|t| {
        let lhs = w.iter().filter(|&&v| v >= t - tol && v < 0.5 - tol).count() as f64 / m;
        let rhs = w.iter().filter(|&&v| v >= 0.5 - tol && v <= 1.0 - t + tol).count() as f64 / m;
        rhs - lhs <= 0.0
    })
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub mod strategy {
    use super::RawEnsemble;
    use proptest::collection::vec;
    use proptest::prelude::*;

    /// Same shape limits as [`super::random_ensemble`], with shrinking.
    pub fn ensemble() -> impl Strategy<Value = RawEnsemble> {
        (1usize..=6, 1usize..=30, 2usize..=4, any::<bool>())
            .prop_flat_map(|(big_m, m, k, uniform)| {
                (
                    vec(vec(0..k, m), big_m),
                    vec(0..k, m),
                    Just(k),
                    vec(1u32..=20, big_m),
                    Just(uniform),
                )
            })
            .prop_map(|(preds, labels, k, raw, uniform)| {
                let raw: Vec<f64> = if uniform { vec![1.0; raw.len()] } else { raw.into_iter().map(f64::from).collect() };
                let total: f64 = raw.iter().sum();
                RawEnsemble {
                    preds,
                    labels,
                    k,
                    weights: raw.iter().map(|w| w / total).collect(),
                }
            })
    }

    /// Integer weights, kept unnormalized for exact-arithmetic tests.
    pub fn integer_weighted() -> impl Strategy<Value = (RawEnsemble, Vec<i64>)> {
        (1usize..=5, 1usize..=20, 2usize..=4)
            .prop_flat_map(|(big_m, m, k)| (vec(vec(0..k, m), big_m), vec(0..k, m), Just(k), vec(1i64..=9, big_m)))
            .prop_map(|(preds, labels, k, ints)| {
                let total: i64 = ints.iter().sum();
                let weights = ints.iter().map(|&w| w as f64 / total as f64).collect();
                (
                    RawEnsemble {
                        preds,
                        labels,
                        k,
                        weights,
                    },
                    ints,
                )
            })
    }
}
