//! Loss tables, the EWA online learner and the offline learners whose
//! output the generalization bounds are about.

mod ewa;
mod loss;
mod offline;

pub use ewa::{ewa_minimizer_check, ewa_stability_bound, EwaState, MinimizerCheck, OnlineLearner};
pub use loss::LossTable;
pub use offline::{erm_posterior, gibbs_posterior, OfflineKind, OfflinePosterior};

use thiserror::Error;

use crate::measure::MeasureError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnerError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("loss table has {rows} rows but H has {points} points")]
    HDimension { rows: usize, points: usize },
    #[error("loss row {row} has {len} columns but Z has {points} points")]
    ZDimension { row: usize, len: usize, points: usize },
    #[error("loss entry [{h}][{z}] = {value} is negative or not finite")]
    NegativeLoss { h: usize, z: usize, value: f64 },
    #[error("loss differs between two {space} points at distance zero")]
    ZeroDistanceConflict { space: &'static str },
    #[error("max |loss| = {max} exceeds the derived bound B = {bound}")]
    BoundViolated { max: f64, bound: f64 },
    #[error("cost vector has length {got}, expected {expected}")]
    CostDimension { expected: usize, got: usize },
    #[error("cost vector contains a non-finite entry")]
    NonFiniteCost,
    #[error("learning rate must be finite and nonnegative, got {0}")]
    BadEta(f64),
    #[error("the minimizer identity needs a positive learning rate")]
    ZeroEta,
    #[error("gamma must be finite and nonnegative, got {0}")]
    BadGamma(f64),
    #[error("sample sequence is empty")]
    EmptySample,
    #[error("sample index {index} out of range for a space of {points} points")]
    SampleIndex { index: usize, points: usize },
}
