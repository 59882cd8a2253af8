#![allow(dead_code, clippy::needless_range_loop)]

use std::sync::Arc;

use otb_core::measure::{DiscreteDistribution, FiniteMetricSpace};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Random metric: Euclidean points in the plane, or shortest paths over a
/// random complete weighted graph.
pub fn random_space(rng: &mut ChaCha20Rng, n: usize) -> Arc<FiniteMetricSpace> {
    let dist = if rng.gen_bool(0.5) {
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))).collect();
        pts.iter()
            .map(|a| pts.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect())
            .collect()
    } else {
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let w = rng.gen_range(0.1..5.0);
                d[i][j] = w;
                d[j][i] = w;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        d
    };
    let labels = (0..n).map(|i| format!("x{i}")).collect();
    Arc::new(FiniteMetricSpace::new(labels, dist).unwrap())
}

/// Random distribution; with probability 1/3 some entries are zeroed.
pub fn random_dist(rng: &mut ChaCha20Rng, space: &Arc<FiniteMetricSpace>) -> DiscreteDistribution {
    let n = space.len();
    let sparse = rng.gen_bool(1.0 / 3.0);
    let mut w: Vec<f64> = (0..n)
        .map(|_| if sparse && rng.gen_bool(0.4) { 0.0 } else { rng.gen_range(0.0..1.0) })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[rng.gen_range(0..n)] = 1.0;
    }
    DiscreteDistribution::from_weights(space.clone(), w).unwrap()
}

pub fn full_support_dist(rng: &mut ChaCha20Rng, space: &Arc<FiniteMetricSpace>) -> DiscreteDistribution {
    let w: Vec<f64> = (0..space.len()).map(|_| rng.gen_range(0.05..1.0)).collect();
    DiscreteDistribution::from_weights(space.clone(), w).unwrap()
}

/// Sorted line coordinates with the absolute-difference metric.
pub fn random_line(rng: &mut ChaCha20Rng, n: usize) -> (Vec<f64>, Arc<FiniteMetricSpace>) {
    let mut xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
    xs.sort_by(f64::total_cmp);
    let s = Arc::new(FiniteMetricSpace::line(&xs).unwrap());
    (xs, s)
}

/// `Σ_i |F_P(x_i) − F_Q(x_i)| (x_{i+1} − x_i)` on sorted coordinates.
pub fn cdf_w1(xs: &[f64], p: &[f64], q: &[f64]) -> f64 {
    let (mut fp, mut fq, mut w) = (0.0, 0.0, 0.0);
    for i in 0..xs.len() - 1 {
        fp += p[i];
        fq += q[i];
        w += (fp - fq).abs() * (xs[i + 1] - xs[i]);
    }
    w
}
