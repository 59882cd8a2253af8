use std::io::Write;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use super::GameError;
use crate::fmt_f64;
use crate::learners::{LearnerError, LossTable, OnlineLearner};
use crate::measure::{wasserstein1_primal, DiscreteDistribution, FiniteMetricSpace};
use crate::mixing::MarkovChain;

/// `c(h) = ℓ(h, z) − E_{Z'∼d} ℓ(h, Z')` for every hypothesis.
pub fn cost_vector(loss: &LossTable, z: usize, d: &DiscreteDistribution) -> Result<Vec<f64>, GameError> {
    if d.space().as_ref() != loss.z_space().as_ref() {
        return Err(GameError::SpaceMismatch("cost distribution"));
    }
    if z >= loss.z_space().len() {
        return Err(LearnerError::SampleIndex { index: z, points: loss.z_space().len() }.into());
    }
    Ok((0..loss.num_hypotheses())
        .map(|h| loss.offset(h, z) - loss.expected_offset(h, d))
        .collect())
}

/// Full record of one play of the game.
#[derive(Debug, Clone, PartialEq)]
pub struct GameTrace {
    pub n: usize,
    pub tau_max: usize,
    pub seed: Option<u64>,
    pub config_hash: Option<String>,
    /// `Z_1..Z_{n+τ_max}`.
    pub samples: Vec<usize>,
    /// `P_1..P_{n+1}`.
    pub p_seq: Vec<DiscreteDistribution>,
    /// `c_1..c_{n+τ_max}`.
    pub cost_vectors: Vec<Vec<f64>>,
    /// `⟨P_t, c_t⟩` for `t = 1..n`.
    pub round_costs: Vec<f64>,
    /// Measured `W(P_t, P_{t+1})` for `t = 1..n`.
    pub kappa_seq: Vec<f64>,
    /// The learner's uniform stability bound.
    pub kappa_bound: f64,
}

/// Samples `n + tau_max` states from `chain` and plays `n` rounds against
/// costs centered at the chain's stationary law.
pub fn run_game<L: OnlineLearner>(
    chain: &MarkovChain,
    loss: &LossTable,
    learner: &L,
    n: usize,
    tau_max: usize,
    seed: u64,
) -> Result<GameTrace, GameError> {
    if chain.space().as_ref() != loss.z_space().as_ref() {
        return Err(GameError::SpaceMismatch("chain state space"));
    }
    let samples = chain.sample_path(n + tau_max, seed);
    let mut trace = run_game_on_path(loss, chain.stationary_distribution(), learner, samples, n)?;
    trace.seed = Some(seed);
    Ok(trace)
}

/// Plays `n` rounds on a given path; the path beyond `n` only feeds the
/// shifted-cost diagnostics.
pub fn run_game_on_path<L: OnlineLearner>(
    loss: &LossTable,
    d: &DiscreteDistribution,
    learner: &L,
    samples: Vec<usize>,
    n: usize,
) -> Result<GameTrace, GameError> {
    if samples.len() < n {
        return Err(GameError::ShortPath { len: samples.len(), n });
    }
    if learner.distribution().space().as_ref() != loss.h_space().as_ref() {
        return Err(GameError::SpaceMismatch("learner hypothesis space"));
    }
    let cost_vectors = samples
        .iter()
        .map(|&z| cost_vector(loss, z, d))
        .collect::<Result<Vec<_>, _>>()?;

    let mut state = learner.clone();
    let mut p_seq = Vec::with_capacity(n + 1);
    let mut round_costs = Vec::with_capacity(n);
    let mut kappa_seq = Vec::with_capacity(n);
    p_seq.push(state.distribution().clone());
    for t in 0..n {
        let cost = &cost_vectors[t];
        round_costs.push(state.distribution().expect(cost));
        let next = state.observe(cost, &samples[..=t])?;
        kappa_seq.push(wasserstein1_primal(state.distribution(), next.distribution())?.cost);
        p_seq.push(next.distribution().clone());
        state = next;
    }
    Ok(GameTrace {
        n,
        tau_max: samples.len() - n,
        seed: None,
        config_hash: None,
        samples,
        p_seq,
        cost_vectors,
        round_costs,
        kappa_seq,
        kappa_bound: learner.stability_bound(loss),
    })
}

impl GameTrace {
    /// The training sample `S_n = (Z_1..Z_n)`.
    pub fn training_samples(&self) -> &[usize] {
        &self.samples[..self.n]
    }

    pub fn h_space(&self) -> &Arc<FiniteMetricSpace> {
        self.p_seq[0].space()
    }

    /// Largest measured `W(P_t, P_{t+1})`.
    pub fn max_kappa(&self) -> f64 {
        self.kappa_seq.iter().copied().fold(0.0, f64::max)
    }

    /// Measured `Σ_t W(P_t, P_{t+1})`.
    pub fn kappa_sum(&self) -> f64 {
        self.kappa_seq.iter().sum()
    }

    /// Writes `t,round_cost,kappa` rows for `t = 1..n`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["t", "round_cost", "kappa"])?;
        for (t, (c, k)) in self.round_costs.iter().zip(&self.kappa_seq).enumerate() {
            w.write_record([(t + 1).to_string(), fmt_f64(*c), fmt_f64(*k)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// JSON form stores H once and each `P_t` as its mass vector.
impl Serialize for GameTrace {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct View<'a> {
            n: usize,
            tau_max: usize,
            seed: Option<u64>,
            config_hash: Option<&'a str>,
            h_space: &'a FiniteMetricSpace,
            samples: &'a [usize],
            p_seq: Vec<&'a [f64]>,
            cost_vectors: &'a [Vec<f64>],
            round_costs: &'a [f64],
            kappa_seq: &'a [f64],
            kappa_bound: f64,
        }
        View {
            n: self.n,
            tau_max: self.tau_max,
            seed: self.seed,
            config_hash: self.config_hash.as_deref(),
            h_space: self.h_space(),
            samples: &self.samples,
            p_seq: self.p_seq.iter().map(|p| p.mass()).collect(),
            cost_vectors: &self.cost_vectors,
            round_costs: &self.round_costs,
            kappa_seq: &self.kappa_seq,
            kappa_bound: self.kappa_bound,
        }
        .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::learners::EwaState;

    fn spaces() -> (Arc<FiniteMetricSpace>, Arc<FiniteMetricSpace>) {
        (
            Arc::new(FiniteMetricSpace::line(&[0.0, 1.0, 2.0]).unwrap()),
            Arc::new(FiniteMetricSpace::discrete(2).unwrap()),
        )
    }

    #[test]
    fn cost_vector_examples() {
        let (h, z) = spaces();
        let d = DiscreteDistribution::uniform(z.clone());
        let l = LossTable::derive(vec![vec![0.0, 1.0]; 3], h.clone(), z.clone()).unwrap();
        assert_eq!(cost_vector(&l, 0, &d).unwrap(), vec![-0.5; 3]);
        assert_eq!(cost_vector(&l, 1, &d).unwrap(), vec![0.5; 3]);

        let c = LossTable::derive(vec![vec![0.3, 0.3]; 3], h, z.clone()).unwrap();
        let skew = DiscreteDistribution::new(z, vec![0.1, 0.9]).unwrap();
        assert_eq!(cost_vector(&c, 1, &skew).unwrap(), vec![0.0; 3]);

        // centering: E_{z∼d} c(h) = 0
        let l2 = LossTable::derive(
            vec![vec![0.2, 1.7], vec![0.9, 0.4], vec![1.3, 1.1]],
            l.h_space().clone(),
            l.z_space().clone(),
        )
        .unwrap();
        let c0 = cost_vector(&l2, 0, &skew).unwrap();
        let c1 = cost_vector(&l2, 1, &skew).unwrap();
        for h in 0..3 {
            assert_abs_diff_eq!(0.1 * c0[h] + 0.9 * c1[h], 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn frozen_and_constant_games() {
        let (h, z) = spaces();
        let chain = MarkovChain::two_state(z.clone(), 0.3, 0.1, vec![0.5, 0.5]).unwrap();
        let c = LossTable::derive(vec![vec![0.7, 0.7]; 3], h.clone(), z.clone()).unwrap();
        let ewa = EwaState::new(DiscreteDistribution::uniform(h.clone()), 0.5).unwrap();
        let tr = run_game(&chain, &c, &ewa, 20, 3, 1).unwrap();
        assert!(tr.cost_vectors.iter().flatten().all(|&x| x == 0.0));
        assert!(tr.round_costs.iter().all(|&x| x == 0.0));
        assert!(tr.kappa_seq.iter().all(|&x| x == 0.0));
        assert_eq!(tr.samples.len(), 23);
        assert_eq!(tr.p_seq.len(), 21);

        let l = LossTable::derive(vec![vec![0.0, 2.0], vec![1.0, 1.0], vec![2.0, 0.0]], h.clone(), z)
            .unwrap();
        let frozen = EwaState::new(DiscreteDistribution::uniform(h), 0.0).unwrap();
        let tr = run_game(&chain, &l, &frozen, 20, 0, 2).unwrap();
        assert!(tr.p_seq.iter().all(|p| p == &tr.p_seq[0]));
        assert!(tr.kappa_seq.iter().all(|&x| x == 0.0));
        assert_eq!(tr.kappa_bound, 0.0);
    }

    #[test]
    fn determinism_and_causality() {
        let (h, z) = spaces();
        let chain = MarkovChain::two_state(z.clone(), 0.3, 0.1, vec![0.5, 0.5]).unwrap();
        let l = LossTable::derive(vec![vec![0.0, 2.0], vec![1.0, 1.0], vec![2.0, 0.0]], h.clone(), z)
            .unwrap();
        let ewa = EwaState::new(DiscreteDistribution::uniform(h), 0.3).unwrap();
        let a = run_game(&chain, &l, &ewa, 40, 4, 11).unwrap();
        let b = run_game(&chain, &l, &ewa, 40, 4, 11).unwrap();
        assert_eq!(a, b);
        for t in 1..=41 {
            let prefix = a.samples[..t - 1].to_vec();
            let replay =
                run_game_on_path(&l, chain.stationary_distribution(), &ewa, prefix, t - 1).unwrap();
            assert_eq!(replay.p_seq[t - 1], a.p_seq[t - 1]);
        }
        let json = serde_json::to_value(&a).unwrap();
        assert_eq!(json["p_seq"].as_array().unwrap().len(), 41);
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 41);
    }
}
