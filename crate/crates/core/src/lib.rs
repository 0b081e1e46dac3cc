//! Diagnostics for weighted majority-vote ensembles.
//!
//! An ensemble is a [`PredictionMatrix`]: hard predictions of `M` classifiers
//! on `m` labelled examples plus a weight per classifier. From it this crate
//! computes the average member error, the majority-vote error, disagreement,
//! tandem loss and margins ([`metrics`]), tests competence of the error-mass
//! distribution ([`competence`]), evaluates every majority-vote and EIR bound
//! ([`bounds`]), and builds ensembles where the first-order bound is tight
//! ([`pathology`]).
//!
//! The math is generic over [`Scalar`], implemented for `f64`, `f32` and the
//! exact rational [`Exact`]. Concrete aliases for each are exported below.

pub mod bounds;
pub mod competence;
pub mod ensemble;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod metrics;
pub mod pathology;
pub mod plot;
pub mod scalar;

pub use bounds::{
    bound_comparison, bound_table, verify_bounds, verify_bounds_with_slack, BoundStatus, BoundTable, BoundVerification,
};
pub use competence::{competence_check, competence_curve, CompetenceGrid, CompetenceVerdict, CurvePoint};
pub use ensemble::{class_mass, error_profile, ClassMassProfile, ErrorProfile, PredictionMatrix};
pub use error::{EnsembleError, PathologyError};
pub use io::{load_predictions, PredictionFormat};
pub use metrics::{
    average_error, diagnostics, disagreement, majority_vote, margin_moments, mv_error, tandem_loss, DiagnosticsReport,
    MajorityVote, TieRule,
};
pub use pathology::{make_pathology, pathology_audit, PathologyAudit, PathologyKind, PathologySpec};
pub use scalar::{Exact, Scalar};

pub type PredictionMatrixF64 = PredictionMatrix<f64>;
pub type PredictionMatrixF32 = PredictionMatrix<f32>;
pub type PredictionMatrixExact = PredictionMatrix<Exact>;

pub type ErrorProfileF64 = ErrorProfile<f64>;
pub type ClassMassProfileF64 = ClassMassProfile<f64>;
pub type DiagnosticsReportF64 = DiagnosticsReport<f64>;
pub type DiagnosticsReportExact = DiagnosticsReport<Exact>;
pub type CompetenceVerdictF64 = CompetenceVerdict<f64>;
pub type BoundTableF64 = BoundTable<f64>;
pub type BoundVerificationF64 = BoundVerification<f64>;
pub type PathologySpecF64 = PathologySpec<f64>;
