//! The generalization game: each round the online learner commits to `P_t`,
//! the adversary reveals `Z_t`, and the learner pays
//! `⟨P_t, c_t⟩` with `c_t(h) = ℓ(h, Z_t) − E_{Z'∼D} ℓ(h, Z')`.

mod diagnostics;
mod trace;

pub use diagnostics::{
    ewa_regret_check, generalization_error, genbar_decomposition_check, regret, taushift_check,
    InequalityCheck,
};
pub use trace::{cost_vector, run_game, run_game_on_path, GameTrace};

use thiserror::Error;

use crate::learners::LearnerError;
use crate::measure::MeasureError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error("{0} does not match the loss table")]
    SpaceMismatch(&'static str),
    #[error("the game needs at least one round")]
    ZeroRounds,
    #[error("path of length {len} is too short for {n} rounds")]
    ShortPath { len: usize, n: usize },
    #[error("tau = {tau} outside the admissible range 1..={max}")]
    TauRange { tau: usize, max: usize },
    #[error("generalization error disagrees between direct ({direct}) and cost ({via_costs}) forms")]
    IdentityMismatch { direct: f64, via_costs: f64 },
}
