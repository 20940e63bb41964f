//! Detection scoring: one-to-one matching, FROC curves, partial area under
//! the FROC curve, and bootstrap uncertainty.

mod assignment;
mod bootstrap;
mod froc;
mod matching;

use thiserror::Error;

use crate::detection::DetectionSet;
use crate::grid::DotSet;

pub use assignment::min_cost_assignment;
pub use bootstrap::{
    bootstrap_fauc, percentile, resample_indices, BootstrapSummary, DEFAULT_BOOTSTRAP_SAMPLES,
};
pub use froc::{
    evaluate_at, froc, operating_point, partial_area, FrocCurve, FrocPoint, FrocTable,
    OperatingMetrics, SensitivityMode, DEFAULT_FP_LIMIT,
};
pub use matching::{match_detections, match_points, MatchResult, MatchedPair, DEFAULT_HIT_RADIUS};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("no annotations in the evaluation set")]
    NoAnnotations,
    #[error("no images to evaluate")]
    NoImages,
    #[error("the FROC curve has no points")]
    EmptyCurve,
    #[error("bootstrap needs at least one resample")]
    ZeroSamples,
    #[error("hit radius must be finite and nonnegative, got {0}")]
    BadRadius(f64),
    #[error("false-positive limit must be positive, got {0}")]
    BadFpLimit(f64),
}

/// One image's unthresholded candidates and its annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageCase {
    pub candidates: DetectionSet,
    pub annotations: DotSet,
}
