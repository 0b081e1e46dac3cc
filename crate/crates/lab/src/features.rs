//! Random ReLU features `z(x) = max(Ux, 0)` with unit-norm rows of `U`.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Clone, Debug, PartialEq)]
pub struct ReluFeatureMap {
    /// `N × d`, each row on the unit sphere.
    pub directions: Array2<f64>,
}

impl ReluFeatureMap {
    /// Draws `n_features` directions row by row, so the first `N` rows drawn
    /// from a given stream do not depend on how many rows follow.
    pub fn sample<R: Rng + ?Sized>(dim: usize, n_features: usize, rng: &mut R) -> Self {
        let mut directions = Array2::<f64>::zeros((n_features, dim));
        for mut row in directions.rows_mut() {
            loop {
                row.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                let norm = row.dot(&row).sqrt();
                if norm > 0.0 {
                    row /= norm;
                    break;
                }
            }
        }
        Self { directions }
    }

    pub fn n_features(&self) -> usize {
        self.directions.nrows()
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Array2<f64> {
        x.dot(&self.directions.t()).mapv_into(|v| v.max(0.0))
    }
}

/// One-shot helper: sample a map with `n_features` rows and apply it.
pub fn random_relu_features<R: Rng + ?Sized>(x: ArrayView2<f64>, n_features: usize, rng: &mut R) -> Array2<f64> {
    ReluFeatureMap::sample(x.ncols(), n_features, rng).transform(x)
}
