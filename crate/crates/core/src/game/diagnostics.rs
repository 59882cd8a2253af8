use serde::Serialize;

use super::{GameError, GameTrace};
use crate::learners::{LossTable, OfflinePosterior};
use crate::measure::{kl_divergence, DiscreteDistribution};
use crate::tolerance;

/// Both sides of an inequality that must hold on every trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        InequalityCheck { lhs, rhs, holds: lhs <= rhs + tolerance::INEQUALITY }
    }

    /// `rhs − lhs`; negative when violated.
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

fn check_comparator(trace: &GameTrace, comparator: &OfflinePosterior) -> Result<(), GameError> {
    if comparator.distribution.space().as_ref() != trace.h_space().as_ref() {
        return Err(GameError::SpaceMismatch("comparator hypothesis space"));
    }
    Ok(())
}

/// `Σ_{t=1..n} ⟨P_t − P*, c_t⟩`.
pub fn regret(trace: &GameTrace, comparator: &OfflinePosterior) -> Result<f64, GameError> {
    check_comparator(trace, comparator)?;
    let p = &comparator.distribution;
    Ok((0..trace.n)
        .map(|t| trace.round_costs[t] - p.expect(&trace.cost_vectors[t]))
        .sum())
}

/// `gen-bar = Σ_h P*(h)·[E_D ℓ(h,·) − (1/n) Σ_t ℓ(h, Z_t)]`.
///
/// Also evaluated as `−(1/n) Σ_t ⟨P*, c_t⟩`; the two forms must agree to
/// `1e-12` relative to the largest loss.
pub fn generalization_error(
    posterior: &OfflinePosterior,
    trace: &GameTrace,
    loss: &LossTable,
    d: &DiscreteDistribution,
) -> Result<f64, GameError> {
    check_comparator(trace, posterior)?;
    if trace.n == 0 {
        return Err(GameError::ZeroRounds);
    }
    let s = trace.training_samples();
    let direct: f64 = posterior
        .distribution
        .mass()
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0.0)
        .map(|(h, &m)| m * (loss.expected_offset(h, d) - loss.empirical_offset(h, s)))
        .sum();
    let via_costs = -(0..trace.n)
        .map(|t| posterior.distribution.expect(&trace.cost_vectors[t]))
        .sum::<f64>()
        / trace.n as f64;
    if (direct - via_costs).abs() > tolerance::SUM * loss.max_loss().max(1.0) {
        return Err(GameError::IdentityMismatch { direct, via_costs });
    }
    Ok(direct)
}

fn check_tau(trace: &GameTrace, tau: usize) -> Result<(), GameError> {
    let max = trace.tau_max.min(trace.n);
    if tau == 0 || tau > max {
        return Err(GameError::TauRange { tau, max });
    }
    Ok(())
}

/// `Σ_{t=1..n} ⟨P_t, c_{t+τ}⟩`.
fn shifted_learner_cost(trace: &GameTrace, tau: usize) -> f64 {
    (0..trace.n).map(|t| trace.p_seq[t].expect(&trace.cost_vectors[t + tau])).sum()
}

/// Shifted-cost regret against `regret + 2 G_H τ Σκ + 4 τ G_H R_H`, with
/// `κ` the learner's uniform stability bound.
pub fn taushift_check(
    trace: &GameTrace,
    comparator: &OfflinePosterior,
    loss: &LossTable,
    tau: usize,
) -> Result<InequalityCheck, GameError> {
    check_tau(trace, tau)?;
    let reg = regret(trace, comparator)?;
    let p = &comparator.distribution;
    let lhs: f64 = shifted_learner_cost(trace, tau)
        - (0..trace.n).map(|t| p.expect(&trace.cost_vectors[t + tau])).sum::<f64>();
    let (g_h, r_h, tau_f) = (loss.g_h(), loss.r_h(), tau as f64);
    let kappa_sum = trace.n as f64 * trace.kappa_bound;
    let rhs = reg + 2.0 * g_h * tau_f * kappa_sum + 4.0 * tau_f * g_h * r_h;
    Ok(InequalityCheck::new(lhs, rhs))
}

/// `gen-bar ≤ regret/n + (τ/n)[2 G_H Σκ + 4 G_H R_H + G_Z R_Z] − (1/n) Σ ⟨P_t, c_{t+τ}⟩`.
pub fn genbar_decomposition_check(
    trace: &GameTrace,
    comparator: &OfflinePosterior,
    loss: &LossTable,
    d: &DiscreteDistribution,
    tau: usize,
) -> Result<InequalityCheck, GameError> {
    check_tau(trace, tau)?;
    let n = trace.n as f64;
    let gen = generalization_error(comparator, trace, loss, d)?;
    let reg = regret(trace, comparator)?;
    let kappa_sum = n * trace.kappa_bound;
    let tau_f = tau as f64;
    let slack = 2.0 * loss.g_h() * kappa_sum
        + 4.0 * loss.g_h() * loss.r_h()
        + loss.g_z() * loss.r_z();
    let rhs = reg / n + tau_f / n * slack - shifted_learner_cost(trace, tau) / n;
    Ok(InequalityCheck::new(gen, rhs))
}

/// `regret ≤ KL(P*‖P_1)/η + (η/2) Σ_t ‖c_t‖_∞²`.
///
/// At `η = 0` the bound is read as `0` when `KL = 0` and `+∞` otherwise.
pub fn ewa_regret_check(
    trace: &GameTrace,
    comparator: &OfflinePosterior,
    prior: &DiscreteDistribution,
    eta: f64,
) -> Result<InequalityCheck, GameError> {
    let reg = regret(trace, comparator)?;
    let kl = kl_divergence(&comparator.distribution, prior)?;
    let sq: f64 = trace.cost_vectors[..trace.n]
        .iter()
        .map(|c| c.iter().fold(0.0_f64, |m, x| m.max(x.abs())).powi(2))
        .sum();
    let rhs = if eta > 0.0 {
        kl / eta + eta / 2.0 * sq
    } else if kl == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(InequalityCheck::new(reg, rhs))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::game::run_game_on_path;
    use crate::learners::{erm_posterior, EwaState};
    use crate::measure::FiniteMetricSpace;

    fn hand_trace() -> GameTrace {
        let h = Arc::new(FiniteMetricSpace::discrete(2).unwrap());
        let u = DiscreteDistribution::uniform(h);
        GameTrace {
            n: 2,
            tau_max: 0,
            seed: None,
            config_hash: None,
            samples: vec![0, 1],
            p_seq: vec![u.clone(), u.clone(), u],
            cost_vectors: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            round_costs: vec![0.5, 0.5],
            kappa_seq: vec![0.0, 0.0],
            kappa_bound: 0.0,
        }
    }

    #[test]
    fn regret_hand_trace() {
        let tr = hand_trace();
        let cmp = OfflinePosterior::external(DiscreteDistribution::point_mass(tr.h_space().clone(), 0));
        // (0.5 − 0) + (0.5 − 1)
        assert_eq!(regret(&tr, &cmp).unwrap(), 0.0);
        let itself = OfflinePosterior::external(tr.p_seq[0].clone());
        assert_eq!(regret(&tr, &itself).unwrap(), 0.0);
    }

    #[test]
    fn generalization_error_example() {
        let h = Arc::new(FiniteMetricSpace::discrete(1).unwrap());
        let z = Arc::new(FiniteMetricSpace::discrete(2).unwrap());
        let l = LossTable::derive(vec![vec![0.0, 1.0]], h.clone(), z.clone()).unwrap();
        let d = DiscreteDistribution::uniform(z);
        let ewa = EwaState::new(DiscreteDistribution::uniform(h.clone()), 0.1).unwrap();
        let tr = run_game_on_path(&l, &d, &ewa, vec![0, 0], 2).unwrap();
        let cmp = OfflinePosterior::external(DiscreteDistribution::point_mass(h, 0));
        assert_abs_diff_eq!(generalization_error(&cmp, &tr, &l, &d).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn checks_on_a_small_game() {
        let h = Arc::new(FiniteMetricSpace::line(&[0.0, 1.0, 2.0]).unwrap());
        let z = Arc::new(FiniteMetricSpace::discrete(2).unwrap());
        let l = LossTable::derive(vec![vec![0.0, 2.0], vec![1.0, 1.0], vec![2.0, 0.0]], h.clone(), z.clone())
            .unwrap();
        let d = DiscreteDistribution::new(z, vec![0.25, 0.75]).unwrap();
        let path = vec![0, 1, 1, 0, 1, 1, 1, 0, 0, 1, 1, 1];
        let prior = DiscreteDistribution::uniform(h);
        for eta in [0.0, 0.1, 1.0] {
            let ewa = EwaState::new(prior.clone(), eta).unwrap();
            let tr = run_game_on_path(&l, &d, &ewa, path.clone(), 9).unwrap();
            let cmp = erm_posterior(&l, tr.training_samples()).unwrap();
            for tau in 1..=3 {
                assert!(taushift_check(&tr, &cmp, &l, tau).unwrap().holds);
                assert!(genbar_decomposition_check(&tr, &cmp, &l, &d, tau).unwrap().holds);
            }
            assert!(ewa_regret_check(&tr, &cmp, &prior, eta).unwrap().holds);
            assert_eq!(taushift_check(&tr, &cmp, &l, 4), Err(GameError::TauRange { tau: 4, max: 3 }));
            assert!(taushift_check(&tr, &cmp, &l, 0).is_err());
        }
    }
}
