//! Bootstrap-aggregated ensembles.
//!
//! Member `i` of an ensemble with master seed `s` draws everything (its
//! bootstrap, then its feature map or split features) from ChaCha8 stream `i`
//! of seed `s`. The bootstrap is therefore the same at every capacity, and
//! results do not depend on thread count or scheduling.

use eir_core::PredictionMatrix;
use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cart::{fit_cart_tree, CartOptions, FeatureSubset, Tree};
use crate::dataset::Dataset;
use crate::error::{param, LabError};
use crate::features::ReluFeatureMap;
use crate::logistic::{fit_weighted, LinearModel, LogisticOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    RandomFeatures { n_features: usize },
    Cart { max_leaf_nodes: usize },
}

impl ModelFamily {
    pub fn capacity(self) -> usize {
        match self {
            ModelFamily::RandomFeatures { n_features } => n_features,
            ModelFamily::Cart { max_leaf_nodes } => max_leaf_nodes,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub logistic: LogisticOptions,
    pub features_per_split: FeatureSubset,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Member {
    RandomFeatures { map: ReluFeatureMap, model: LinearModel },
    Cart(Tree),
}

impl Member {
    pub fn predict(&self, x: ndarray::ArrayView2<f64>) -> Vec<usize> {
        match self {
            Member::RandomFeatures { map, model } => model.predict(map.transform(x).view()),
            Member::Cart(tree) => tree.predict(x),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedEnsemble {
    pub members: Vec<Member>,
    /// Per member, positions into `Dataset::train` (with repeats).
    pub bootstraps: Vec<Vec<usize>>,
    pub in_bag_errors: Vec<f64>,
    pub test_predictions: PredictionMatrix<f64>,
    pub capacity: usize,
    pub seed: u64,
}

impl TrainedEnsemble {
    pub fn interpolating(&self) -> bool {
        self.in_bag_errors.iter().all(|&e| e == 0.0)
    }

    pub fn mean_in_bag_error(&self) -> f64 {
        self.in_bag_errors.iter().fold(0.0, |acc, e| acc + e) / self.in_bag_errors.len() as f64
    }
}

pub fn member_rng(seed: u64, member: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member as u64);
    rng
}

/// `n` indices drawn uniformly with replacement from `0..n`.
pub fn bootstrap_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

struct Split {
    x_train: Array2<f64>,
    y_train: Vec<usize>,
    x_test: Array2<f64>,
    y_test: Vec<usize>,
    num_classes: usize,
}

struct TrainedMember {
    member: Member,
    bootstrap: Vec<usize>,
    in_bag_error: f64,
    test_predictions: Vec<usize>,
}

fn train_member(
    data: &Split,
    family: ModelFamily,
    opts: &TrainOptions,
    mut rng: ChaCha8Rng,
) -> Result<TrainedMember, LabError> {
    let n = data.y_train.len();
    let bootstrap = bootstrap_sample(n, &mut rng);
    let mut counts = vec![0.0; n];
    for &j in &bootstrap {
        counts[j] += 1.0;
    }
    let in_bag: Vec<usize> = (0..n).filter(|&j| counts[j] > 0.0).collect();
    let in_bag_counts: Vec<f64> = in_bag.iter().map(|&j| counts[j]).collect();
    let in_bag_labels: Vec<usize> = in_bag.iter().map(|&j| data.y_train[j]).collect();
    let x_in_bag = data.x_train.select(Axis(0), &in_bag);

    let member = match family {
        ModelFamily::RandomFeatures { n_features } => {
            let map = ReluFeatureMap::sample(data.x_train.ncols(), n_features, &mut rng);
            let z = map.transform(x_in_bag.view());
            let fit = fit_weighted(
                z.view(),
                &in_bag_labels,
                Some(&in_bag_counts),
                data.num_classes,
                &opts.logistic,
            )?;
            Member::RandomFeatures { map, model: fit.model }
        }
        ModelFamily::Cart { max_leaf_nodes } => {
            let cart = CartOptions {
                max_leaf_nodes,
                features_per_split: opts.features_per_split,
            };
            Member::Cart(fit_cart_tree(
                x_in_bag.view(),
                &in_bag_labels,
                Some(&in_bag_counts),
                data.num_classes,
                &cart,
                &mut rng,
            )?)
        }
    };

    let wrong: f64 = member
        .predict(x_in_bag.view())
        .iter()
        .zip(&in_bag_labels)
        .zip(&in_bag_counts)
        .filter(|((p, y), _)| p != y)
        .fold(0.0, |acc, (_, c)| acc + c);
    Ok(TrainedMember {
        test_predictions: member.predict(data.x_test.view()),
        in_bag_error: wrong / n as f64,
        member,
        bootstrap,
    })
}

/// Trains `num_members` members on independent bootstraps of the training
/// split, in parallel on the current rayon pool.
pub fn train_bagged_ensemble(
    dataset: &Dataset,
    family: ModelFamily,
    num_members: usize,
    seed: u64,
    opts: &TrainOptions,
) -> Result<TrainedEnsemble, LabError> {
    if num_members == 0 {
        return Err(param("ensemble needs at least one member"));
    }
    match family {
        ModelFamily::RandomFeatures { n_features: 0 } => return Err(param("n_features must be at least 1")),
        ModelFamily::Cart { max_leaf_nodes } if max_leaf_nodes < 2 => {
            return Err(param("max_leaf_nodes must be at least 2"))
        }
        _ => {}
    }
    let data = Split {
        x_train: dataset.train_features(),
        y_train: dataset.train_labels(),
        x_test: dataset.test_features(),
        y_test: dataset.test_labels(),
        num_classes: dataset.num_classes,
    };
    let trained = (0..num_members)
        .into_par_iter()
        .map(|i| train_member(&data, family, opts, member_rng(seed, i)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut members = Vec::with_capacity(num_members);
    let mut bootstraps = Vec::with_capacity(num_members);
    let mut in_bag_errors = Vec::with_capacity(num_members);
    let mut test_rows = Vec::with_capacity(num_members);
    for t in trained {
        members.push(t.member);
        bootstraps.push(t.bootstrap);
        in_bag_errors.push(t.in_bag_error);
        test_rows.push(t.test_predictions);
    }
    let test_predictions = PredictionMatrix::new(test_rows, data.y_test, data.num_classes, None)?;
    Ok(TrainedEnsemble {
        members,
        bootstraps,
        in_bag_errors,
        test_predictions,
        capacity: family.capacity(),
        seed,
    })
}
