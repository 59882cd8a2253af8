use serde::Serialize;

use super::{LearnerError, LossTable};
use crate::measure::DiscreteDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OfflineKind {
    ErmPointMass,
    Gibbs { gamma: f64 },
    /// Supplied by the caller; no training rule is recorded.
    External,
}

/// The output law `P_{A(S_n)}` of an offline learner over H.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OfflinePosterior {
    pub kind: OfflineKind,
    pub distribution: DiscreteDistribution,
}

impl OfflinePosterior {
    pub fn external(distribution: DiscreteDistribution) -> Self {
        OfflinePosterior { kind: OfflineKind::External, distribution }
    }
}

/// Point mass on `argmin_h Σ_t ℓ(h, Z_t)`, ties to the lowest index.
pub fn erm_posterior(loss: &LossTable, samples: &[usize]) -> Result<OfflinePosterior, LearnerError> {
    if samples.is_empty() {
        return Err(LearnerError::EmptySample);
    }
    loss.check_samples(samples)?;
    let totals = cumulative_losses(loss, samples);
    let mut best = 0;
    for (h, &t) in totals.iter().enumerate() {
        if t < totals[best] {
            best = h;
        }
    }
    Ok(OfflinePosterior {
        kind: OfflineKind::ErmPointMass,
        distribution: DiscreteDistribution::point_mass(loss.h_space().clone(), best),
    })
}

/// `P(h) ∝ prior(h)·e^{−γ Σ_t ℓ(h, Z_t)}`, shifted by the smallest
/// cumulative loss on the prior's support.
pub fn gibbs_posterior(
    loss: &LossTable,
    samples: &[usize],
    prior: &DiscreteDistribution,
    gamma: f64,
) -> Result<OfflinePosterior, LearnerError> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(LearnerError::BadGamma(gamma));
    }
    if prior.len() != loss.num_hypotheses() {
        return Err(LearnerError::HDimension { rows: loss.num_hypotheses(), points: prior.len() });
    }
    loss.check_samples(samples)?;
    let kind = OfflineKind::Gibbs { gamma };
    if gamma == 0.0 {
        return Ok(OfflinePosterior { kind, distribution: prior.clone() });
    }
    let totals = cumulative_losses(loss, samples);
    let mass = prior.mass();
    let shift = (0..mass.len())
        .filter(|&h| mass[h] > 0.0)
        .map(|h| totals[h])
        .fold(f64::INFINITY, f64::min);
    let weights = mass
        .iter()
        .zip(&totals)
        .map(|(&m, &t)| if m > 0.0 { m * (-gamma * (t - shift)).exp() } else { 0.0 })
        .collect();
    let distribution = DiscreteDistribution::from_weights(prior.space().clone(), weights)?;
    Ok(OfflinePosterior { kind, distribution })
}

fn cumulative_losses(loss: &LossTable, samples: &[usize]) -> Vec<f64> {
    (0..loss.num_hypotheses())
        .map(|h| samples.iter().map(|&z| loss.value(h, z)).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::measure::{tv_distance, FiniteMetricSpace};

    fn table(values: Vec<Vec<f64>>) -> LossTable {
        let nh = values.len();
        let nz = values[0].len();
        LossTable::derive(
            values,
            Arc::new(FiniteMetricSpace::discrete(nh).unwrap()),
            Arc::new(FiniteMetricSpace::discrete(nz).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn erm_examples() {
        let l = table(vec![vec![0.0], vec![1.0]]);
        assert_eq!(erm_posterior(&l, &[0]).unwrap().distribution.mass(), &[1.0, 0.0]);
        let c = table(vec![vec![0.4, 0.4]; 3]);
        assert_eq!(erm_posterior(&c, &[1, 0, 1]).unwrap().distribution.mass(), &[1.0, 0.0, 0.0]);
        assert_eq!(erm_posterior(&c, &[]), Err(LearnerError::EmptySample));
    }

    #[test]
    fn gibbs_examples() {
        let l = table(vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
        let prior = DiscreteDistribution::uniform(l.h_space().clone());
        let g = gibbs_posterior(&l, &[0, 1], &prior, 2f64.ln()).unwrap();
        assert_abs_diff_eq!(g.distribution.mass()[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(gibbs_posterior(&l, &[0], &prior, 0.0).unwrap().distribution, prior);

        let sharp = gibbs_posterior(&l, &[0, 0, 1], &prior, 1e6).unwrap();
        let erm = erm_posterior(&l, &[0, 0, 1]).unwrap();
        assert!(tv_distance(&sharp.distribution, &erm.distribution).unwrap() <= 1e-6);
    }
}
