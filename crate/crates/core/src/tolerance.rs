//! Numeric tolerances shared across the crate.
//!
//! LP-derived quantities are compared at [`LP`], closed-form sums at
//! [`SUM`]. Keeping the two apart separates solver error from plain
//! floating-point accumulation.

/// Agreement tolerance for quantities produced by a linear program.
pub const LP: f64 = 1e-9;

/// Tolerance for closed-form sums (normalization, identities).
pub const SUM: f64 = 1e-12;

/// Slack allowed on "always true" inequalities evaluated from simulated traces.
pub const INEQUALITY: f64 = 1e-9;

/// Relative tolerance used when validating metric axioms.
pub const METRIC: f64 = 1e-12;
