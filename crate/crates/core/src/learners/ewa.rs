use serde::Serialize;

use super::{LearnerError, LossTable};
use crate::measure::{kl_divergence, DiscreteDistribution};

/// An online learner in the generalization game: it commits to a
/// distribution over H, then sees the round's cost vector.
///
/// Implementations are immutable values; `observe` returns the next state.
pub trait OnlineLearner: Clone + Send + Sync {
    fn distribution(&self) -> &DiscreteDistribution;

    /// Next state after the round with cost `cost`. `prefix` holds the
    /// samples revealed so far (`Z_1..Z_t`); EWA ignores it.
    fn observe(&self, cost: &[f64], prefix: &[usize]) -> Result<Self, LearnerError>;

    /// Uniform bound on `W(P_t, P_{t+1})` for this learner.
    fn stability_bound(&self, loss: &LossTable) -> f64;
}

/// Exponentially weighted averages over a finite hypothesis space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EwaState {
    eta: f64,
    prior: DiscreteDistribution,
    current: DiscreteDistribution,
}

impl EwaState {
    /// Starts at `P_1 = prior`. `eta = 0` gives a frozen learner.
    pub fn new(prior: DiscreteDistribution, eta: f64) -> Result<Self, LearnerError> {
        if !eta.is_finite() || eta < 0.0 {
            return Err(LearnerError::BadEta(eta));
        }
        Ok(EwaState { eta, current: prior.clone(), prior })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn prior(&self) -> &DiscreteDistribution {
        &self.prior
    }

    pub fn current(&self) -> &DiscreteDistribution {
        &self.current
    }

    /// `P'(h) ∝ P(h)·e^{−η c(h)}`, shifted by the smallest cost on the
    /// support before exponentiating.
    pub fn update(&self, cost: &[f64]) -> Result<Self, LearnerError> {
        let weights = tilt(&self.current, cost, self.eta)?;
        let Some(weights) = weights else {
            return Ok(self.clone());
        };
        let current = DiscreteDistribution::from_weights(self.current.space().clone(), weights)?;
        Ok(EwaState { current, ..self.clone() })
    }
}

impl OnlineLearner for EwaState {
    fn distribution(&self) -> &DiscreteDistribution {
        &self.current
    }

    fn observe(&self, cost: &[f64], _prefix: &[usize]) -> Result<Self, LearnerError> {
        self.update(cost)
    }

    fn stability_bound(&self, loss: &LossTable) -> f64 {
        ewa_stability_bound(loss, self.eta)
    }
}

/// Unnormalized `P(h)·e^{−η (c(h) − min c)}`, or `None` when every shifted
/// exponent on the support is zero and the update is the identity.
fn tilt(p: &DiscreteDistribution, cost: &[f64], eta: f64) -> Result<Option<Vec<f64>>, LearnerError> {
    if cost.len() != p.len() {
        return Err(LearnerError::CostDimension { expected: p.len(), got: cost.len() });
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(LearnerError::NonFiniteCost);
    }
    let mass = p.mass();
    let shift = (0..mass.len())
        .filter(|&h| mass[h] > 0.0)
        .map(|h| cost[h])
        .fold(f64::INFINITY, f64::min);
    let exps: Vec<f64> = cost.iter().map(|&c| -eta * (c - shift)).collect();
    if (0..mass.len()).all(|h| mass[h] == 0.0 || exps[h] == 0.0) {
        return Ok(None);
    }
    Ok(Some(mass.iter().zip(exps).map(|(&m, e)| if m > 0.0 { m * e.exp() } else { 0.0 }).collect()))
}

/// Both sides of the variational characterization of one EWA step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimizerCheck {
    /// `⟨P*, c⟩ + KL(P*‖P_t)/η` at the EWA update `P*`.
    pub lhs: f64,
    /// `−(1/η) ln E_{P_t} e^{−η c}`.
    pub rhs: f64,
    pub gap: f64,
}

/// Checks that the EWA update minimizes `⟨P, c⟩ + KL(P‖P_t)/η` by
/// comparing its objective with the closed-form minimum.
pub fn ewa_minimizer_check(state: &EwaState, cost: &[f64]) -> Result<MinimizerCheck, LearnerError> {
    if state.eta == 0.0 {
        return Err(LearnerError::ZeroEta);
    }
    let next = state.update(cost)?;
    let p = next.current();
    let lhs = p.expect(cost) + kl_divergence(p, state.current())? / state.eta;

    let mass = state.current().mass();
    let shift = (0..mass.len())
        .filter(|&h| mass[h] > 0.0)
        .map(|h| cost[h])
        .fold(f64::INFINITY, f64::min);
    let z: f64 = mass
        .iter()
        .zip(cost)
        .filter(|(&m, _)| m > 0.0)
        .map(|(&m, &c)| m * (-state.eta * (c - shift)).exp())
        .sum();
    let rhs = shift - z.ln() / state.eta;
    Ok(MinimizerCheck { lhs, rhs, gap: (lhs - rhs).abs() })
}

/// `η·G_H·R_H²`, the uniform bound on `W(P_t, P_{t+1})` for EWA.
pub fn ewa_stability_bound(loss: &LossTable, eta: f64) -> f64 {
    eta * loss.g_h() * loss.r_h() * loss.r_h()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::measure::FiniteMetricSpace;

    fn uniform2() -> DiscreteDistribution {
        DiscreteDistribution::uniform(Arc::new(FiniteMetricSpace::discrete(2).unwrap()))
    }

    #[test]
    fn update_examples() {
        let s = EwaState::new(uniform2(), 2f64.ln()).unwrap();
        let next = s.update(&[0.0, 1.0]).unwrap();
        // weights 1 and 1/2
        assert_abs_diff_eq!(next.current().mass()[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(next.current().mass()[1], 1.0 / 3.0, epsilon = 1e-15);

        let skewed = EwaState::new(
            DiscreteDistribution::new(uniform2().space().clone(), vec![0.3, 0.7]).unwrap(),
            0.8,
        )
        .unwrap();
        assert_eq!(skewed.update(&[4.0, 4.0]).unwrap(), skewed);
        let frozen = EwaState::new(skewed.prior().clone(), 0.0).unwrap();
        assert_eq!(frozen.update(&[0.0, 9.0]).unwrap(), frozen);
        assert!(EwaState::new(uniform2(), -1.0).is_err());
        assert!(s.update(&[0.0]).is_err());
    }

    #[test]
    fn minimizer_examples() {
        let s = EwaState::new(uniform2(), 2f64.ln()).unwrap();
        let chk = ewa_minimizer_check(&s, &[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(chk.rhs, -(0.75f64).ln() / 2f64.ln(), epsilon = 1e-15);
        assert!(chk.gap <= 1e-9);

        let chk = ewa_minimizer_check(&s, &[1.25, 1.25]).unwrap();
        assert_abs_diff_eq!(chk.lhs, 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(chk.rhs, 1.25, epsilon = 1e-15);

        let frozen = EwaState::new(uniform2(), 0.0).unwrap();
        assert_eq!(ewa_minimizer_check(&frozen, &[0.0, 1.0]), Err(LearnerError::ZeroEta));
    }

    #[test]
    fn support_is_preserved() {
        let p = DiscreteDistribution::new(uniform2().space().clone(), vec![0.0, 1.0]).unwrap();
        let s = EwaState::new(p, 1.0).unwrap();
        let next = s.update(&[-50.0, 3.0]).unwrap();
        assert_eq!(next.current().mass(), &[0.0, 1.0]);
        let full = EwaState::new(uniform2(), 1.0).unwrap().update(&[0.0, 700.0]).unwrap();
        assert!(full.current().has_full_support());
    }

    #[test]
    fn stability_bound_example() {
        let l = LossTable::derive(
            vec![vec![0.2], vec![0.8]],
            Arc::new(FiniteMetricSpace::line(&[0.0, 1.0]).unwrap()),
            Arc::new(FiniteMetricSpace::line(&[0.0]).unwrap()),
        )
        .unwrap();
        assert_eq!(ewa_stability_bound(&l, 0.0), 0.0);
        assert_abs_diff_eq!(ewa_stability_bound(&l, 0.5), 0.3, epsilon = 1e-15);
    }
}
