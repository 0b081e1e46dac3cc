//! Ensembles represented as weighted prediction matrices.

use serde::{Deserialize, Serialize};

use crate::error::EnsembleError;
use crate::scalar::{mean, Scalar};

/// Sums within this distance of one are silently renormalized.
pub const WEIGHT_RENORMALIZE_WINDOW: f64 = 1e-3;

/// Hard class predictions of `M` classifiers on `m` labelled examples, with a
/// discrete distribution over the classifiers.
///
/// Immutable once constructed; every constructor validates the invariants
/// (labels and predictions below `K`, non-negative weights summing to one).
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionMatrix<T> {
    // row-major, one row per classifier
    preds: Vec<usize>,
    labels: Vec<usize>,
    num_classes: usize,
    num_classifiers: usize,
    weights: Vec<T>,
}

impl<T: Scalar> PredictionMatrix<T> {
    /// Builds a validated matrix. `weights = None` means uniform `1/M`.
    pub fn new(
        predictions: Vec<Vec<usize>>,
        labels: Vec<usize>,
        num_classes: usize,
        weights: Option<Vec<T>>,
    ) -> Result<Self, EnsembleError> {
        if num_classes < 2 {
            return Err(EnsembleError::Shape(format!(
                "K must be at least 2, got {num_classes}"
            )));
        }
        let num_classifiers = predictions.len();
        let m = labels.len();
        if num_classifiers == 0 {
            return Err(EnsembleError::Shape("no classifiers".into()));
        }
        if m == 0 {
            return Err(EnsembleError::Shape("no examples".into()));
        }
        for (j, &y) in labels.iter().enumerate() {
            if y >= num_classes {
                return Err(EnsembleError::LabelRange {
                    what: format!("label of example {j}"),
                    value: y,
                    num_classes,
                });
            }
        }
        let mut preds = Vec::with_capacity(num_classifiers * m);
        for (i, row) in predictions.into_iter().enumerate() {
            if row.len() != m {
                return Err(EnsembleError::Shape(format!(
                    "classifier {i} has {} predictions, expected {m}",
                    row.len()
                )));
            }
            if let Some(&p) = row.iter().find(|&&p| p >= num_classes) {
                return Err(EnsembleError::LabelRange {
                    what: format!("prediction of classifier {i}"),
                    value: p,
                    num_classes,
                });
            }
            preds.extend(row);
        }
        let weights = match weights {
            None => vec![T::ratio(1, num_classifiers); num_classifiers],
            Some(w) => normalize_weights(w, num_classifiers)?,
        };
        Ok(Self {
            preds,
            labels,
            num_classes,
            num_classifiers,
            weights,
        })
    }

    pub fn num_classifiers(&self) -> usize {
        self.num_classifiers
    }

    pub fn num_examples(&self) -> usize {
        self.labels.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Predictions of classifier `i` on every example.
    pub fn classifier(&self, i: usize) -> &[usize] {
        let m = self.num_examples();
        &self.preds[i * m..(i + 1) * m]
    }

    pub fn prediction(&self, classifier: usize, example: usize) -> usize {
        self.preds[classifier * self.num_examples() + example]
    }

    pub fn classifiers(&self) -> impl Iterator<Item = &[usize]> {
        self.preds.chunks(self.num_examples())
    }

    /// Per-classifier test error rate `L(h_i)`.
    pub fn classifier_error_rates(&self) -> Vec<T> {
        let m = self.num_examples();
        self.classifiers()
            .map(|row| {
                let wrong = row
                    .iter()
                    .zip(&self.labels)
                    .filter(|(p, y)| p != y)
                    .count();
                T::ratio(wrong, m)
            })
            .collect()
    }

    /// Same ensemble in another scalar type. Weights are converted through
    /// `f64` and re-validated.
    pub fn convert<U: Scalar>(&self) -> Result<PredictionMatrix<U>, EnsembleError> {
        let weights = self
            .weights
            .iter()
            .map(|w| {
                U::from_f64(w.to_f64())
                    .ok_or_else(|| EnsembleError::Weight(format!("weight {w:?} not representable")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        PredictionMatrix::new(self.rows(), self.labels.clone(), self.num_classes, Some(weights))
    }

    /// Predictions as nested rows (one `Vec` per classifier).
    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.classifiers().map(<[usize]>::to_vec).collect()
    }

    /// Every example repeated `times` times in a row. Rates are unchanged.
    pub fn repeat_examples(&self, times: usize) -> Self {
        assert!(times >= 1);
        let repeat = |row: &[usize]| -> Vec<usize> {
            row.iter().flat_map(|&v| std::iter::repeat_n(v, times)).collect()
        };
        Self {
            preds: self.classifiers().flat_map(repeat).collect(),
            labels: repeat(&self.labels),
            num_classes: self.num_classes,
            num_classifiers: self.num_classifiers,
            weights: self.weights.clone(),
        }
    }
}

fn normalize_weights<T: Scalar>(weights: Vec<T>, expected: usize) -> Result<Vec<T>, EnsembleError> {
    if weights.len() != expected {
        return Err(EnsembleError::Weight(format!(
            "{} weights given for {expected} classifiers",
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite_val() || **w < T::zero()) {
        return Err(EnsembleError::Weight(format!("weight {w:?} is negative or not finite")));
    }
    let total = weights.iter().fold(T::zero(), |acc, &w| acc + w);
    if total.approx_eq(T::one()) {
        return Ok(weights);
    }
    let window = T::from_f64(WEIGHT_RENORMALIZE_WINDOW).unwrap_or_else(T::tolerance);
    if (total - T::one()).abs_val() <= window && total > T::zero() {
        Ok(weights.into_iter().map(|w| w / total).collect())
    } else {
        Err(EnsembleError::Weight(format!(
            "weights sum to {total:?}, not 1"
        )))
    }
}

/// Weighted vote mass `mass[j][k] = Σ_i ρ_i 1(h_i(x_j) = k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMassProfile<T> {
    mass: Vec<T>,
    num_classes: usize,
}

impl<T: Scalar> ClassMassProfile<T> {
    pub fn num_examples(&self) -> usize {
        self.mass.len() / self.num_classes
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Vote mass of every class on example `j`.
    pub fn row(&self, j: usize) -> &[T] {
        &self.mass[j * self.num_classes..(j + 1) * self.num_classes]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.mass.chunks(self.num_classes)
    }
}

pub fn class_mass<T: Scalar>(pm: &PredictionMatrix<T>) -> ClassMassProfile<T> {
    let m = pm.num_examples();
    let k = pm.num_classes();
    let mut mass = vec![T::zero(); m * k];
    for (row, &w) in pm.classifiers().zip(pm.weights()) {
        for (j, &p) in row.iter().enumerate() {
            mass[j * k + p] = mass[j * k + p] + w;
        }
    }
    ClassMassProfile {
        mass,
        num_classes: k,
    }
}

/// Empirical law of the error mass `W_ρ`: the weighted fraction of
/// classifiers that err on each example.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorProfile<T> {
    pub w: Vec<T>,
    pub mean_w: T,
    pub mean_w_sq: T,
}

impl<T: Scalar> ErrorProfile<T> {
    /// Profile from raw per-example error masses, each expected in `[0, 1]`.
    pub fn from_values(w: Vec<T>) -> Self {
        let squares: Vec<T> = w.iter().map(|&v| v * v).collect();
        Self {
            mean_w: mean(&w),
            mean_w_sq: mean(&squares),
            w,
        }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

pub fn error_profile<T: Scalar>(pm: &PredictionMatrix<T>) -> ErrorProfile<T> {
    let mut w = vec![T::zero(); pm.num_examples()];
    for (row, &weight) in pm.classifiers().zip(pm.weights()) {
        for ((slot, &p), &y) in w.iter_mut().zip(row).zip(pm.labels()) {
            if p != y {
                *slot = *slot + weight;
            }
        }
    }
    ErrorProfile::from_values(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;
    use crate::fixtures::e1;

    #[test]
    fn uniform_default_weights() {
        let pm = e1::<f64>();
        assert_eq!(pm.num_classifiers(), 3);
        assert_eq!(pm.num_examples(), 4);
        assert_eq!(pm.weights(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn rejects_out_of_range_prediction() {
        let err = PredictionMatrix::<f64>::new(vec![vec![0, 2]], vec![0, 1], 2, None).unwrap_err();
        assert!(matches!(err, EnsembleError::LabelRange { value: 2, .. }));
        let err = PredictionMatrix::<f64>::new(vec![vec![0, 1]], vec![0, 3], 2, None).unwrap_err();
        assert!(matches!(err, EnsembleError::LabelRange { value: 3, .. }));
    }

    #[test]
    fn weights_preserved_or_renormalized_or_rejected() {
        let preds = vec![vec![0, 1], vec![1, 1]];
        let pm = PredictionMatrix::new(preds.clone(), vec![0, 1], 2, Some(vec![0.3, 0.7])).unwrap();
        assert_eq!(pm.weights(), &[0.3, 0.7]);

        let pm = PredictionMatrix::new(preds.clone(), vec![0, 1], 2, Some(vec![0.3, 0.7005])).unwrap();
        let total: f64 = pm.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);

        for bad in [vec![0.3, 0.8], vec![-0.1, 1.1], vec![f64::NAN, 1.0], vec![1.0]] {
            let err = PredictionMatrix::new(preds.clone(), vec![0, 1], 2, Some(bad)).unwrap_err();
            assert!(matches!(err, EnsembleError::Weight(_)), "{err}");
        }
    }

    #[test]
    fn rejects_degenerate_shapes() {
        assert!(PredictionMatrix::<f64>::new(vec![], vec![0], 2, None).is_err());
        assert!(PredictionMatrix::<f64>::new(vec![vec![]], vec![], 2, None).is_err());
        assert!(PredictionMatrix::<f64>::new(vec![vec![0]], vec![0], 1, None).is_err());
        assert!(PredictionMatrix::<f64>::new(vec![vec![0, 1], vec![0]], vec![0, 1], 2, None).is_err());
    }

    #[test]
    fn class_mass_examples() {
        let pm = PredictionMatrix::<Exact>::new(vec![vec![0], vec![0], vec![1]], vec![0], 2, None).unwrap();
        assert_eq!(class_mass(&pm).row(0), &[Exact::new(2, 3), Exact::new(1, 3)]);

        let pm = PredictionMatrix::<f64>::new(vec![vec![0]; 4], vec![1], 3, None).unwrap();
        assert_eq!(class_mass(&pm).row(0), &[1.0, 0.0, 0.0]);

        let pm = PredictionMatrix::new(vec![vec![0], vec![1]], vec![0], 2, Some(vec![0.3, 0.7])).unwrap();
        assert_eq!(class_mass(&pm).row(0), &[0.3, 0.7]);
    }

    #[test]
    fn error_profile_examples() {
        let profile = error_profile(&e1::<Exact>());
        let third = Exact::new(1, 3);
        assert_eq!(profile.w, vec![third, third, Exact::from_usize(0), third]);
        assert_eq!(profile.mean_w, Exact::new(1, 4));

        let perfect = PredictionMatrix::<f64>::new(vec![vec![0, 1, 1]; 3], vec![0, 1, 1], 2, None).unwrap();
        assert!(error_profile(&perfect).w.iter().all(|&w| w == 0.0));

        let single = PredictionMatrix::<f64>::new(vec![vec![0, 1, 0, 0]], vec![0, 0, 0, 0], 2, None).unwrap();
        let profile = error_profile(&single);
        assert_eq!(profile.w, vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(profile.mean_w, 0.25);
    }

    #[test]
    fn repeat_examples_keeps_shape_consistent() {
        let pm = e1::<f64>().repeat_examples(3);
        assert_eq!(pm.num_examples(), 12);
        assert_eq!(&pm.classifier(0)[..6], &[0, 0, 0, 0, 0, 0]);
        assert_eq!(pm.labels()[11], 1);
    }
}
