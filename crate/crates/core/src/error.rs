//! Crate-wide error type.

use thiserror::Error;

use crate::measure::MeasureViolation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum Error {
    /// Evaluation time outside the function's domain `[0, horizon]`.
    #[error("time {time} outside domain [0, {horizon}]")]
    TimeOutOfDomain { time: f64, horizon: f64 },

    /// Binary operations require exactly equal horizons.
    #[error("horizon mismatch: {left} vs {right}")]
    HorizonMismatch { left: f64, right: f64 },

    /// A scalar parameter failed validation.
    #[error("invalid {name} = {value}: must be {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    /// A step function's jump list failed validation.
    #[error("invalid step function: {0}")]
    Step(&'static str),

    /// A point measure failed validation.
    #[error("invalid point measure: {0}")]
    Measure(#[from] MeasureViolation),

    /// Too few perturbation draws to cover every walk index up to the horizon.
    #[error("need at least {needed} perturbation draws, got {got}")]
    TooFewPerturbations { needed: usize, got: usize },

    /// Thresholded point counts differ, so no time change pairs them off yet.
    #[error(
        "big points not yet matched at gamma = {gamma}: \
         {left} above threshold vs {right} in the reference measure"
    )]
    UnmatchedBigPoints { gamma: f64, left: usize, right: usize },

    /// Time-change knots must increase strictly in both coordinates.
    #[error("time-change knots must increase strictly in both coordinates")]
    NonMonotoneKnots,

    /// A sample statistic was requested on an empty sample.
    #[error("empty sample")]
    EmptySample,

    /// A sample contained NaN.
    #[error("sample value at index {index} is NaN")]
    NanSample { index: usize },

    /// A path was requested from a measure with no points under a convention
    /// that needs a first point.
    #[error("point measure has no points; nothing to extend before the first point")]
    EmptyMeasure,

    /// A demo instance violates the hypotheses its bound argument needs.
    #[error("demo hypotheses violated: {0}")]
    HypothesesViolated(String),
}
