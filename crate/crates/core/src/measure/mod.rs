//! Finite metric spaces, discrete distributions and the exact divergence and
//! transport computations defined on them.

mod distribution;
mod divergence;
mod lp;
mod space;
mod transport;

pub use distribution::DiscreteDistribution;
pub use divergence::{
    check_pinsker, check_w1_tv, donsker_varadhan_gap, kl_divergence, tv_distance, PinskerCheck,
    W1TvCheck,
};
pub use space::FiniteMetricSpace;
pub use transport::{wasserstein1_dual, wasserstein1_primal, DualSolution, TransportPlan};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("metric space must contain at least one point")]
    EmptySpace,
    #[error("label count {labels} does not match distance matrix size {size}")]
    LabelCount { labels: usize, size: usize },
    #[error("distance matrix row {row} has length {len}, expected {expected}")]
    RaggedMatrix { row: usize, len: usize, expected: usize },
    #[error("distance d[{i}][{j}] = {value} is negative or not finite")]
    BadDistance { i: usize, j: usize, value: f64 },
    #[error("distance d[{i}][{i}] = {value} must be zero")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("distance matrix is not symmetric at ({i}, {j}): {a} vs {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("triangle inequality fails: d[{i}][{k}] > d[{i}][{j}] + d[{j}][{k}]")]
    Triangle { i: usize, j: usize, k: usize },
    #[error("mass vector has length {got}, space has {expected} points")]
    Dimension { expected: usize, got: usize },
    #[error("mass entry {index} = {value} is negative or not finite")]
    NegativeMass { index: usize, value: f64 },
    #[error("mass sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("distributions live on different metric spaces")]
    SpaceMismatch,
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("linear program did not converge within {0} pivots")]
    PivotLimit(usize),
}
