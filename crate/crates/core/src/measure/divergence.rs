use serde::Serialize;

use super::{wasserstein1_primal, DiscreteDistribution, MeasureError};
use crate::tolerance;

/// `KL(p‖q) = Σ p_i ln(p_i/q_i)` with `0·ln(0/q) = 0`.
///
/// Returns `+∞` when `p` puts mass where `q` does not.
pub fn kl_divergence(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64, MeasureError> {
    p.same_space(q)?;
    let mut kl = 0.0;
    for (&pi, &qi) in p.mass().iter().zip(q.mass()) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Ok(f64::INFINITY);
        }
        kl += pi * (pi / qi).ln();
    }
    // rounding can push an exact zero slightly negative
    Ok(kl.max(0.0))
}

/// Total variation distance `½ Σ |p_i − q_i|`.
pub fn tv_distance(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64, MeasureError> {
    p.same_space(q)?;
    let s: f64 = p.mass().iter().zip(q.mass()).map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * s).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinskerCheck {
    pub tv: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Evaluates both sides of `TV(p,q) ≤ sqrt(KL(p‖q)/2)`.
pub fn check_pinsker(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<PinskerCheck, MeasureError> {
    let tv = tv_distance(p, q)?;
    let bound = (kl_divergence(p, q)? / 2.0).sqrt();
    Ok(PinskerCheck { tv, bound, holds: tv <= bound + tolerance::SUM })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct W1TvCheck {
    pub w1: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Evaluates both sides of `W(p,q) ≤ diam · TV(p,q)`.
pub fn check_w1_tv(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<W1TvCheck, MeasureError> {
    let w1 = wasserstein1_primal(p, q)?.cost;
    let bound = p.space().diameter() * tv_distance(p, q)?;
    Ok(W1TvCheck { w1, bound, holds: w1 <= bound + tolerance::LP })
}

/// Gap between the two sides of the Donsker–Varadhan identity
///
/// `ln E_P[e^{λ(X − E_P X)}] = λ⟨Q* − P, X⟩ − KL(Q*‖P)`, with `Q* ∝ P·e^{λX}`
///
/// the exact maximizer on a finite space. Exponentials are shifted by
/// `max λ·x` over the support of `p`.
pub fn donsker_varadhan_gap(p: &DiscreteDistribution, x: &[f64], lambda: f64) -> Result<f64, MeasureError> {
    if x.len() != p.len() {
        return Err(MeasureError::Dimension { expected: p.len(), got: x.len() });
    }
    if !lambda.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(MeasureError::NonFinite("Donsker-Varadhan input"));
    }
    let support: Vec<usize> = (0..p.len()).filter(|&i| p.mass()[i] > 0.0).collect();
    let mean = p.expect(x);
    let shift = support
        .iter()
        .map(|&i| lambda * x[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let mut weights = vec![0.0; p.len()];
    for &i in &support {
        weights[i] = p.mass()[i] * (lambda * x[i] - shift).exp();
    }
    let z: f64 = weights.iter().sum();
    // ln E_P[e^{λX}] − λ E_P X
    let lhs = z.ln() + shift - lambda * mean;

    let tilted = DiscreteDistribution::from_weights(p.space().clone(), weights)?;
    let rhs = lambda * (tilted.expect(x) - mean) - kl_divergence(&tilted, p)?;
    Ok((lhs - rhs).abs())
}
