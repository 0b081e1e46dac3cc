//! Small bagged ensembles trained from scratch, for watching ensemble
//! diagnostics change as member capacity grows.
//!
//! Two families are provided: multinomial logistic regression on random ReLU
//! features (capacity = number of features) and CART trees (capacity =
//! maximum leaf count). [`capacity_sweep`] trains one bagged ensemble per
//! capacity and reports test-set diagnostics together with the smallest
//! capacity at which every member fits its bootstrap sample perfectly.
//!
//! Everything here is `f64` and a pure function of its inputs and seed.

pub mod bagging;
pub mod cart;
pub mod config;
pub mod dataset;
pub mod error;
pub mod features;
pub mod logistic;
pub mod sweep;

pub use bagging::{train_bagged_ensemble, Member, ModelFamily, TrainOptions, TrainedEnsemble};
pub use cart::{fit_cart_tree, CartOptions, FeatureSubset, Tree};
pub use config::{DatasetSource, SweepConfig};
pub use dataset::{make_blobs, BlobParams, Dataset};
pub use error::LabError;
pub use features::{random_relu_features, ReluFeatureMap};
pub use logistic::{fit_multinomial_logistic, LinearModel, LogisticOptions, Solver};
pub use sweep::{capacity_sweep, FamilyKind, SweepResult, SweepRow};
