//! Finite-space laboratory for online-to-batch generalization bounds on
//! mixing (non-i.i.d.) data.
//!
//! Everything lives on finite metric spaces so that every quantity entering
//! the bounds can be computed exactly:
//!
//! - [`measure`]: metric spaces, distributions, KL/TV, Wasserstein-1 via an
//!   exact transportation simplex and an independent dual potential LP.
//! - [`mixing`]: finite Markov chains, stationary laws, exact β/φ mixing
//!   coefficients and path sampling.
//! - [`learners`]: loss tables with their Lipschitz constants, the EWA
//!   online learner and the offline learners (ERM, Gibbs).
//! - [`game`]: the generalization game between an online learner and the
//!   centered-loss adversary, with regret and the deterministic diagnostics.
//! - [`bounds`]: evaluators for the expected, high-probability and
//!   EWA-specific generalization bounds, plus Monte Carlo coverage.

#![allow(clippy::needless_range_loop)]

pub mod bounds;
pub mod game;
pub mod learners;
pub mod measure;
pub mod mixing;
pub mod tolerance;

mod numfmt;

pub use numfmt::fmt_f64;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
