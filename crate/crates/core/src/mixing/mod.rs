//! Data sources: finite time-homogeneous Markov chains and their exact β/φ
//! mixing coefficients.
//!
//! An i.i.d. source is the memoryless chain whose rows all equal the
//! per-letter law; both coefficients vanish identically there.

mod chain;
mod fit;
mod linalg;
mod profile;

pub use chain::{MarkovChain, PRNG_NAME};
pub use fit::{fit_geometric_rate, GeometricFit, GeometricRate};
pub use profile::MixingProfile;

use thiserror::Error;

use crate::measure::MeasureError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MixingError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("transition matrix has {rows} rows, space has {points} points")]
    TransitionShape { rows: usize, points: usize },
    #[error("transition row {row} has length {len}, expected {expected}")]
    RaggedTransition { row: usize, len: usize, expected: usize },
    #[error("transition row {row} entry {col} = {value} is negative or not finite")]
    NegativeTransition { row: usize, col: usize, value: f64 },
    #[error("transition row {row} sums to {sum}, expected 1")]
    RowSum { row: usize, sum: f64 },
    #[error("stationary distribution is not unique (eigenvalue-1 eigenspace has dimension {dim})")]
    NonUniqueStationary { dim: usize },
    #[error("lag k must be at least 1")]
    ZeroLag,
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("geometric fit needs at least 3 positive coefficients, got {0}")]
    TooFewPoints(usize),
}
