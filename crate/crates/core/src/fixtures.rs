//! Small hand-checkable ensembles used in docs, tests, and the CLI smoke runs.

use crate::ensemble::PredictionMatrix;
use crate::scalar::Scalar;

/// Three uniformly weighted binary classifiers on four examples.
///
/// Labels `[0,0,1,1]`; each classifier errs on exactly one example and no two
/// err on the same one, so the majority vote is perfect.
pub fn e1<T: Scalar>() -> PredictionMatrix<T> {
    PredictionMatrix::new(
        vec![vec![0, 0, 1, 0], vec![0, 1, 1, 1], vec![1, 0, 1, 1]],
        vec![0, 0, 1, 1],
        2,
        None,
    )
    .expect("E1 is valid")
}

/// `num_classifiers` copies of the true labels.
pub fn unanimous_correct<T: Scalar>(labels: Vec<usize>, num_classes: usize, num_classifiers: usize) -> PredictionMatrix<T> {
    PredictionMatrix::new(vec![labels.clone(); num_classifiers], labels, num_classes, None)
        .expect("labels must be below num_classes")
}
