//! Experiment runner for the online-to-batch laboratory: config validation,
//! Monte Carlo sweeps with invariant checking, and CSV/JSON artifacts.

use std::path::PathBuf;

use otb_core::bounds::BoundError;
use otb_core::game::GameError;
use otb_core::learners::LearnerError;
use otb_core::measure::MeasureError;
use otb_core::mixing::MixingError;

pub mod config;
pub mod plotdata;
pub mod runner;

pub use config::{parse_config, validate_config, ExperimentConfig, ValidationErrors};
pub use plotdata::{emit_plot_data, PlotRow};
pub use runner::{mixing_profile, run_experiment, CoverageRow, RunOptions, RunOutcome, Violation};

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "OTB_LAB_OUT";

/// Default output directory when neither flag, environment nor config sets one.
pub const DEFAULT_OUT_DIR: &str = "out";

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid config:\n{0}")]
    Validation(ValidationErrors),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    PlotData(String),
    #[error("{} invariant violation(s); first: {:?}", .0.len(), .0.first())]
    Invariant(Vec<Violation>),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Mixing(#[from] MixingError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

impl LabError {
    /// Process exit status: 1 validation, 2 invariant violation, 3 I/O.
    ///
    /// Core-library errors during a run mean the inputs were unusable and
    /// count as validation failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Invariant(_) => 2,
            LabError::Io { .. } => 3,
            _ => 1,
        }
    }
}
