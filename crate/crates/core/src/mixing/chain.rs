use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::linalg;
use super::MixingError;
use crate::measure::{DiscreteDistribution, FiniteMetricSpace};
use crate::tolerance;

/// Name and version of the path-sampling PRNG; recorded in run manifests.
pub const PRNG_NAME: &str = "chacha20/rand_chacha-0.3/seed_from_u64/u53-inverse-cdf";

/// A finite time-homogeneous Markov chain over an instance space, with its
/// (unique) stationary distribution computed at construction.
///
/// JSON form: `{"transition": [[...]], "initial": [...], "space": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChain", into = "RawChain")]
pub struct MarkovChain {
    space: Arc<FiniteMetricSpace>,
    transition: Vec<Vec<f64>>,
    initial: DiscreteDistribution,
    stationary: DiscreteDistribution,
    memoryless: bool,
}

#[derive(Serialize, Deserialize)]
struct RawChain {
    transition: Vec<Vec<f64>>,
    initial: Vec<f64>,
    space: FiniteMetricSpace,
}

impl TryFrom<RawChain> for MarkovChain {
    type Error = MixingError;

    fn try_from(raw: RawChain) -> Result<Self, Self::Error> {
        let space = Arc::new(raw.space);
        let initial = DiscreteDistribution::new(space.clone(), raw.initial)?;
        MarkovChain::new(raw.transition, initial)
    }
}

impl From<MarkovChain> for RawChain {
    fn from(c: MarkovChain) -> Self {
        RawChain {
            transition: c.transition,
            initial: c.initial.mass().to_vec(),
            space: (*c.space).clone(),
        }
    }
}

impl MarkovChain {
    /// Validates the transition matrix and solves for the stationary law.
    ///
    /// Rejects chains whose eigenvalue-1 eigenspace is not one-dimensional.
    pub fn new(transition: Vec<Vec<f64>>, initial: DiscreteDistribution) -> Result<Self, MixingError> {
        let space = initial.space().clone();
        let n = space.len();
        if transition.len() != n {
            return Err(MixingError::TransitionShape { rows: transition.len(), points: n });
        }
        for (row, r) in transition.iter().enumerate() {
            if r.len() != n {
                return Err(MixingError::RaggedTransition { row, len: r.len(), expected: n });
            }
            if let Some((col, &value)) =
                r.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0)
            {
                return Err(MixingError::NegativeTransition { row, col, value });
            }
            let sum: f64 = r.iter().sum();
            if (sum - 1.0).abs() > tolerance::SUM {
                return Err(MixingError::RowSum { row, sum });
            }
        }

        let memoryless = transition.iter().all(|r| r == &transition[0]);
        let stationary = if memoryless {
            // every row is already stationary
            DiscreteDistribution::new(space.clone(), transition[0].clone())?
        } else {
            DiscreteDistribution::new(space.clone(), solve_stationary(&transition)?)?
        };
        Ok(MarkovChain { space, transition, initial, stationary, memoryless })
    }

    /// A chain whose every row equals `law`: an i.i.d. source.
    pub fn iid(law: DiscreteDistribution) -> Result<Self, MixingError> {
        let row = law.mass().to_vec();
        let transition = vec![row; law.len()];
        MarkovChain::new(transition, law)
    }

    /// The two-state chain with flip probabilities `p` (0→1) and `q` (1→0).
    pub fn two_state(
        space: Arc<FiniteMetricSpace>,
        p: f64,
        q: f64,
        initial: Vec<f64>,
    ) -> Result<Self, MixingError> {
        let initial = DiscreteDistribution::new(space, initial)?;
        MarkovChain::new(vec![vec![1.0 - p, p], vec![q, 1.0 - q]], initial)
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn initial(&self) -> &DiscreteDistribution {
        &self.initial
    }

    /// True when all rows coincide, i.e. the source is i.i.d.
    pub fn is_memoryless(&self) -> bool {
        self.memoryless
    }

    /// The unique `π` with `πT = π`.
    pub fn stationary_distribution(&self) -> &DiscreteDistribution {
        &self.stationary
    }

    /// Same chain restarted from a different initial law.
    pub fn with_initial(&self, initial: DiscreteDistribution) -> Result<Self, MixingError> {
        initial.same_space(&self.initial)?;
        Ok(MarkovChain { initial, ..self.clone() })
    }

    /// `T^k` by repeated squaring, rows renormalized after every product.
    pub fn transition_power(&self, k: usize) -> Vec<Vec<f64>> {
        let n = self.space.len();
        if self.memoryless && k >= 1 {
            return self.transition.clone();
        }
        let mut result: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let mut base = self.transition.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = linalg::stochastic_mul(&result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = linalg::stochastic_mul(&base, &base);
            }
        }
        result
    }

    /// Exact marginal law of `Z_t` (1-based): `initial · T^{t−1}`.
    pub fn marginal(&self, t: usize) -> Vec<f64> {
        assert!(t >= 1, "time index is 1-based");
        let mut m = self.initial.mass().to_vec();
        for _ in 1..t {
            m = linalg::vec_mul(&m, &self.transition);
        }
        m
    }

    /// `TV(row_i(T^k), π)` for every state `i`.
    fn row_tv_to_stationary(&self, k: usize) -> Vec<f64> {
        let pow = self.transition_power(k);
        let pi = self.stationary.mass();
        pow.iter()
            .map(|row| 0.5 * row.iter().zip(pi).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .collect()
    }

    /// `φ(k) = 2 · max_i TV(row_i(T^k), π)`.
    ///
    /// The supremum over conditioning events `B ∈ F_t` reduces to a maximum
    /// over the current state: by the Markov property `P(Z_{t+k} ∈ · | B)` is
    /// a convex combination of rows of `T^k`, TV to a fixed law is convex, so
    /// the supremum sits at an extreme point (a single state). Homogeneity
    /// removes the dependence on `t`. The reduction is exact.
    pub fn phi_coefficient(&self, k: usize) -> Result<f64, MixingError> {
        if k == 0 {
            return Err(MixingError::ZeroLag);
        }
        let tv = self.row_tv_to_stationary(k);
        Ok(2.0 * tv.into_iter().fold(0.0, f64::max))
    }

    /// `β(k) = max_{1 ≤ t ≤ horizon} 2 · Σ_i m_t(i) · TV(row_i(T^k), π)`
    /// with `m_t` the exact marginal of `Z_t`. The supremum over all `t` is
    /// truncated at `horizon`.
    pub fn beta_coefficient(&self, k: usize, horizon: usize) -> Result<f64, MixingError> {
        if k == 0 {
            return Err(MixingError::ZeroLag);
        }
        if horizon == 0 {
            return Err(MixingError::ZeroHorizon);
        }
        let tv = self.row_tv_to_stationary(k);
        let mut m = self.initial.mass().to_vec();
        let mut best = 0.0_f64;
        for t in 1..=horizon {
            if t > 1 {
                m = linalg::vec_mul(&m, &self.transition);
            }
            let avg: f64 = m.iter().zip(&tv).map(|(a, b)| a * b).sum();
            best = best.max(2.0 * avg);
        }
        Ok(best)
    }

    /// Samples `Z_1, …, Z_n`: `Z_1 ~ initial`, `Z_{t+1} ~ row_{Z_t}(T)`.
    ///
    /// Fully determined by `seed` (see [`PRNG_NAME`]).
    pub fn sample_path(&self, n: usize, seed: u64) -> Vec<usize> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut path = Vec::with_capacity(n);
        if n == 0 {
            return path;
        }
        let mut state = draw(self.initial.mass(), &mut rng);
        path.push(state);
        for _ in 1..n {
            state = draw(&self.transition[state], &mut rng);
            path.push(state);
        }
        path
    }
}

/// Inverse-CDF draw with a 53-bit uniform in `[0, 1)`.
fn draw(weights: &[f64], rng: &mut ChaCha20Rng) -> usize {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding gap above the cumulative sum
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

fn solve_stationary(t: &[Vec<f64>]) -> Result<Vec<f64>, MixingError> {
    let n = t.len();
    // A = Tᵀ − I
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| t[j][i] - if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let rank = linalg::rank(a.clone(), 1e-10);
    if rank != n - 1 {
        return Err(MixingError::NonUniqueStationary { dim: n - rank });
    }
    let mut sys = a;
    sys[n - 1] = vec![1.0; n];
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    let mut pi = linalg::solve(sys.clone(), rhs.clone());

    // one step of iterative refinement
    let resid: Vec<f64> = (0..n)
        .map(|i| rhs[i] - (0..n).map(|j| sys[i][j] * pi[j]).sum::<f64>())
        .collect();
    let corr = linalg::solve(sys, resid);
    for (p, c) in pi.iter_mut().zip(corr) {
        *p += c;
    }
    linalg::normalize(&mut pi);
    Ok(pi)
}
