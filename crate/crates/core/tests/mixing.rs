#![allow(clippy::needless_range_loop)]

mod common;

use std::sync::Arc;

use common::*;
use otb_core::measure::{DiscreteDistribution, FiniteMetricSpace};
use otb_core::mixing::{fit_geometric_rate, GeometricFit, MarkovChain, MixingProfile};
use rand::Rng;

fn random_chain(r: &mut rand_chacha::ChaCha20Rng, n: usize) -> MarkovChain {
    let s = Arc::new(FiniteMetricSpace::discrete(n).unwrap());
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let w: Vec<f64> = (0..n).map(|_| r.gen_range(0.01..1.0)).collect();
            let t: f64 = w.iter().sum();
            w.into_iter().map(|x| x / t).collect()
        })
        .collect();
    MarkovChain::new(rows, random_dist(r, &s)).unwrap()
}

/// Plain repeated multiplication, no renormalization.
fn naive_power(t: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    let n = t.len();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect();
    for _ in 0..k {
        m = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|l| m[i][l] * t[l][j]).sum()).collect())
            .collect();
    }
    m
}

#[test]
fn two_state_phi_closed_form() {
    let mut r = rng(20);
    let s = Arc::new(FiniteMetricSpace::discrete(2).unwrap());
    for _ in 0..200 {
        let p = r.gen_range(0.001..1.0);
        let q = r.gen_range(0.001..1.0);
        let c = MarkovChain::two_state(s.clone(), p, q, vec![1.0, 0.0]).unwrap();
        let pi = c.stationary_distribution().mass();
        for k in 1..=20 {
            let oracle = 2.0 * pi[0].max(pi[1]) * (1.0 - p - q).abs().powi(k as i32);
            assert!((c.phi_coefficient(k).unwrap() - oracle).abs() <= 1e-12);
        }
    }
}

#[test]
fn iid_coefficients_vanish_exactly() {
    let mut r = rng(21);
    for n in 1..=6 {
        let s = Arc::new(FiniteMetricSpace::discrete(n).unwrap());
        let law = random_dist(&mut r, &s);
        let c = MarkovChain::iid(law).unwrap();
        for k in 1..=20 {
            assert_eq!(c.phi_coefficient(k).unwrap(), 0.0);
            assert_eq!(c.beta_coefficient(k, 100).unwrap(), 0.0);
        }
    }
}

#[test]
fn coefficients_on_random_chains() {
    let mut r = rng(22);
    for _ in 0..100 {
        let n = r.gen_range(2..=6);
        let c = random_chain(&mut r, n);
        let pi = c.stationary_distribution().mass().to_vec();
        let resid = (0..n)
            .map(|j| ((0..n).map(|i| pi[i] * c.transition()[i][j]).sum::<f64>() - pi[j]).abs())
            .fold(0.0, f64::max);
        assert!(resid <= 1e-12);

        let prof = MixingProfile::compute(&c, 15, 30).unwrap();
        for k in 0..15 {
            assert!(prof.beta[k] <= prof.phi[k] + 1e-12);
            assert!((0.0..=2.0).contains(&prof.phi[k]));
            if k > 0 {
                assert!(prof.phi[k] <= prof.phi[k - 1] + 1e-15);
                assert!(prof.beta[k] <= prof.beta[k - 1] + 1e-15);
            }
            // matrix-power oracle
            let pow = naive_power(c.transition(), k + 1);
            let worst = pow
                .iter()
                .map(|row| row.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum::<f64>())
                .fold(0.0, f64::max);
            assert!((prof.phi[k] - worst).abs() <= 1e-12);
        }

        // started at stationarity, β is the π-average for any horizon
        let at_pi = c.with_initial(c.stationary_distribution().clone()).unwrap();
        for k in 1..6 {
            let pow = naive_power(c.transition(), k);
            let oracle: f64 = pow
                .iter()
                .zip(&pi)
                .map(|(row, w)| w * row.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum::<f64>())
                .sum();
            for h in [1, 7, 40] {
                assert!((at_pi.beta_coefficient(k, h).unwrap() - oracle).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn sampled_marginals_match_exact_marginals() {
    let s = Arc::new(FiniteMetricSpace::discrete(3).unwrap());
    let t = vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.6, 0.3], vec![0.4, 0.1, 0.5]];
    let c = MarkovChain::new(t, DiscreteDistribution::point_mass(s, 0)).unwrap();
    let reps = 100_000;
    let len = 5;
    let mut counts = vec![vec![0usize; 3]; len];
    for rep in 0..reps {
        for (t, &z) in c.sample_path(len, rep as u64).iter().enumerate() {
            counts[t][z] += 1;
        }
    }
    for t in 0..len {
        let m = c.marginal(t + 1);
        for z in 0..3 {
            let f = counts[t][z] as f64 / reps as f64;
            let se = (m[z] * (1.0 - m[z]) / reps as f64).sqrt();
            assert!((f - m[z]).abs() <= 3.0 * se + 1e-15, "t={} z={z}: {f} vs {}", t + 1, m[z]);
        }
    }
}

#[test]
fn fit_on_a_two_state_chain_with_unit_rate() {
    // p + q = 1 − e^{-1} makes φ(k) = c·e^{-k}
    let s = Arc::new(FiniteMetricSpace::discrete(2).unwrap());
    let sum = 1.0 - (-1.0f64).exp();
    let c = MarkovChain::two_state(s, 0.4 * sum, 0.6 * sum, vec![0.5, 0.5]).unwrap();
    let prof = MixingProfile::compute(&c, 20, 40).unwrap();
    let fit = prof.geometric_fit.unwrap();
    let GeometricFit::Fitted { r, .. } = fit else { panic!("expected a fit") };
    assert!((r - 1.0).abs() < 1e-6, "r = {r}");
    let cert = fit.certified();
    for (i, &phi) in prof.phi.iter().enumerate() {
        let k = (i + 1) as f64;
        assert!(phi <= cert.k * (-k.powf(cert.r)).exp() * (1.0 + 1e-12));
    }
}

#[test]
fn fit_on_the_slow_two_state_chain_is_below_one() {
    let s = Arc::new(FiniteMetricSpace::discrete(2).unwrap());
    let c = MarkovChain::two_state(s, 0.3, 0.1, vec![0.25, 0.75]).unwrap();
    let prof = MixingProfile::compute(&c, 20, 40).unwrap();
    let cert = prof.geometric_fit.unwrap().certified();
    assert!(!cert.is_super_geometric(), "r = {}", cert.r);
    let pts: Vec<(usize, f64)> = prof.phi.iter().enumerate().map(|(i, &p)| (i + 1, p)).collect();
    assert_eq!(fit_geometric_rate(&pts).unwrap(), prof.geometric_fit.unwrap());
}
