//! Evaluators for the generalization bounds of the online-to-batch
//! framework, each reported as a list of named terms plus their total.

mod coverage;

pub use coverage::{coverage, BoundReport, Coverage};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("{name} = {value} is invalid: {why}")]
    InvalidParam { name: &'static str, value: f64, why: &'static str },
    #[error("tau = {tau} must lie in 1..={n}")]
    TauRange { tau: usize, n: usize },
    #[error("bound not applicable: {0}")]
    NotApplicable(&'static str),
}

/// Every constant entering the bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundParams {
    pub n: usize,
    pub tau: usize,
    pub delta: f64,
    pub eta: f64,
    pub g_h: f64,
    pub g_z: f64,
    pub r_h: f64,
    pub r_z: f64,
    pub b_ell: f64,
    /// `Σ_{t=1..n} κ(t)`, theoretical or measured.
    pub kappa_sum: f64,
    /// `β(τ+1)`.
    pub beta_tau1: f64,
    /// `φ(τ+1)`.
    pub phi_tau1: f64,
    /// `KL(P_{A(S_n)}‖P_1)`; may be `+∞`.
    pub kl_comparator: f64,
    /// Geometric mixing constant `K`.
    pub k_const: f64,
    /// Geometric mixing rate `r`; `+∞` for an i.i.d. source.
    pub r_rate: f64,
}

impl BoundParams {
    pub fn validate(&self) -> Result<(), BoundError> {
        if self.tau == 0 || self.tau > self.n {
            return Err(BoundError::TauRange { tau: self.tau, n: self.n });
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(BoundError::InvalidParam {
                name: "delta",
                value: self.delta,
                why: "must lie in (0, 1)",
            });
        }
        let finite = [
            ("eta", self.eta),
            ("g_h", self.g_h),
            ("g_z", self.g_z),
            ("r_h", self.r_h),
            ("r_z", self.r_z),
            ("b_ell", self.b_ell),
            ("kappa_sum", self.kappa_sum),
            ("beta_tau1", self.beta_tau1),
            ("phi_tau1", self.phi_tau1),
            ("k_const", self.k_const),
        ];
        for (name, value) in finite {
            if !value.is_finite() || value < 0.0 {
                return Err(BoundError::InvalidParam { name, value, why: "must be finite and nonnegative" });
            }
        }
        for (name, value) in [("kl_comparator", self.kl_comparator), ("r_rate", self.r_rate)] {
            if value.is_nan() || value < 0.0 {
                return Err(BoundError::InvalidParam { name, value, why: "must be nonnegative" });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundTerm {
    pub name: &'static str,
    pub value: f64,
}

/// A bound as the sum of its named terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bound {
    pub terms: Vec<BoundTerm>,
    pub total: f64,
    /// Set when a `sqrt(… ln(x) …)` term had `x ≤ 1` and was clamped to 0.
    pub log_clamped: bool,
}

impl Bound {
    fn from_terms(terms: Vec<(&'static str, f64)>, log_clamped: bool) -> Self {
        let terms: Vec<BoundTerm> =
            terms.into_iter().map(|(name, value)| BoundTerm { name, value }).collect();
        let total = terms.iter().map(|t| t.value).sum();
        Bound { terms, total, log_clamped }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }
}

/// `max(1, ⌈ln n⌉ − 1)`.
pub fn log_tau(n: usize) -> usize {
    let t = (n as f64).ln().ceil() as i64 - 1;
    t.max(1) as usize
}

/// `sqrt(c · ln(x))`, clamped to 0 when `x ≤ 1`.
fn sqrt_log(c: f64, x: f64) -> (f64, bool) {
    if x <= 1.0 {
        (0.0, true)
    } else {
        ((c * x.ln()).sqrt(), false)
    }
}

/// Terms shared by the expected and high-probability bounds.
fn common_terms(p: &BoundParams, regret: f64) -> Vec<(&'static str, f64)> {
    let n = p.n as f64;
    let tau = p.tau as f64;
    vec![
        ("regret", regret / n),
        ("stability", 2.0 * tau * p.g_h / n * (p.kappa_sum + 2.0 * p.r_h)),
        ("instance", tau * p.g_z * p.r_z / n),
    ]
}

/// Expected generalization error bound:
/// `E[regret]/n + (2τG_H/n)(Σκ + 2R_H) + τG_Z R_Z/n + B_ℓ β(τ+1)`.
pub fn bound_expected(p: &BoundParams, expected_regret: f64) -> Result<Bound, BoundError> {
    p.validate()?;
    let mut terms = common_terms(p, expected_regret);
    terms.push(("mixing", p.b_ell * p.beta_tau1));
    Ok(Bound::from_terms(terms, false))
}

/// High-probability bound: the expected form with the observed regret,
/// `2 G_H R_H sqrt(2τ ln(τ/δ)/n)` added and `φ` in place of `β`.
pub fn bound_highprob(p: &BoundParams, regret_observed: f64) -> Result<Bound, BoundError> {
    p.validate()?;
    let n = p.n as f64;
    let tau = p.tau as f64;
    let mut terms = common_terms(p, regret_observed);
    let (root, clamped) = sqrt_log(2.0 * tau / n, tau / p.delta);
    terms.push(("martingale", 2.0 * p.g_h * p.r_h * root));
    terms.push(("mixing", p.b_ell * p.phi_tau1));
    Ok(Bound::from_terms(terms, clamped))
}

fn check_ewa_regime(p: &BoundParams) -> Result<(), BoundError> {
    p.validate()?;
    if p.n <= 1 {
        return Err(BoundError::NotApplicable("n must exceed 1"));
    }
    if p.r_rate.is_nan() || p.r_rate <= 1.0 {
        return Err(BoundError::NotApplicable("geometric mixing rate r must exceed 1"));
    }
    Ok(())
}

/// EWA bound with `τ = ⌈ln n⌉ − 1` substituted:
/// `KL/(nη) + (ηB² + 4ηG_H²R_H² ln n)/2 + 4G_H R_H ln n/n + G_Z R_Z ln n/n
///  + 2G_H R_H sqrt(2 ln n ln(ln n/δ)/n) + B K/n`.
pub fn bound_ewa(p: &BoundParams) -> Result<Bound, BoundError> {
    check_ewa_regime(p)?;
    if p.eta.is_nan() || p.eta <= 0.0 {
        return Err(BoundError::NotApplicable("learning rate must be positive"));
    }
    let n = p.n as f64;
    let ln_n = n.ln();
    let gr = p.g_h * p.r_h;
    let (root, clamped) = sqrt_log(2.0 * ln_n / n, ln_n / p.delta);
    let terms = vec![
        ("kl", p.kl_comparator / (n * p.eta)),
        ("learning_rate", (p.eta * p.b_ell * p.b_ell + 4.0 * p.eta * gr * gr * ln_n) / 2.0),
        ("shift", 4.0 * gr * ln_n / n),
        ("instance", p.g_z * p.r_z * ln_n / n),
        ("martingale", 2.0 * gr * root),
        ("mixing", p.b_ell * p.k_const / n),
    ];
    Ok(Bound::from_terms(terms, clamped))
}

/// The learning-rate-free form at `η = 1/√n`:
/// `KL/√n + (B² + 4G_H²R_H² ln n)/(2√n) + …`, remaining terms as in [`bound_ewa`].
pub fn bound_etaind(p: &BoundParams) -> Result<Bound, BoundError> {
    check_ewa_regime(p)?;
    let n = p.n as f64;
    let sqrt_n = n.sqrt();
    let ln_n = n.ln();
    let gr = p.g_h * p.r_h;
    let (root, clamped) = sqrt_log(2.0 * ln_n / n, ln_n / p.delta);
    let terms = vec![
        ("kl", p.kl_comparator / sqrt_n),
        ("learning_rate", (p.b_ell * p.b_ell + 4.0 * gr * gr * ln_n) / (2.0 * sqrt_n)),
        ("shift", 4.0 * gr * ln_n / n),
        ("instance", p.g_z * p.r_z * ln_n / n),
        ("martingale", 2.0 * gr * root),
        ("mixing", p.b_ell * p.k_const / n),
    ];
    Ok(Bound::from_terms(terms, clamped))
}
