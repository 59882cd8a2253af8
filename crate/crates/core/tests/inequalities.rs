mod common;

use common::*;
use otb_core::measure::{
    check_pinsker, check_w1_tv, donsker_varadhan_gap, kl_divergence, DiscreteDistribution,
};
use rand::Rng;

#[test]
fn pinsker_and_w1_tv_hold() {
    let mut r = rng(10);
    for _ in 0..1000 {
        let n = r.gen_range(1..=8);
        let s = random_space(&mut r, n);
        let p = random_dist(&mut r, &s);
        let q = random_dist(&mut r, &s);
        let pin = check_pinsker(&p, &q).unwrap();
        assert!(pin.holds, "{pin:?}");
        let wt = check_w1_tv(&p, &q).unwrap();
        assert!(wt.holds, "{wt:?}");
    }
}

/// Direct evaluation of both sides, without any shift, for moderate inputs.
fn dv_sides(p: &DiscreteDistribution, x: &[f64], lambda: f64) -> (f64, f64) {
    let m = p.mass();
    let mean: f64 = m.iter().zip(x).map(|(a, b)| a * b).sum();
    let lhs = m.iter().zip(x).map(|(a, b)| a * (lambda * (b - mean)).exp()).sum::<f64>().ln();
    let w: Vec<f64> = m.iter().zip(x).map(|(a, b)| a * (lambda * b).exp()).collect();
    let tilted = DiscreteDistribution::from_weights(p.space().clone(), w).unwrap();
    let tmean: f64 = tilted.mass().iter().zip(x).map(|(a, b)| a * b).sum();
    (lhs, lambda * (tmean - mean) - kl_divergence(&tilted, p).unwrap())
}

#[test]
fn donsker_varadhan_identity() {
    let mut r = rng(11);
    for _ in 0..1000 {
        let n = r.gen_range(1..=8);
        let s = random_space(&mut r, n);
        let p = random_dist(&mut r, &s);
        let x: Vec<f64> = (0..n).map(|_| r.gen_range(-5.0..5.0)).collect();
        let lambda = r.gen_range(-10.0..10.0);
        let gap = donsker_varadhan_gap(&p, &x, lambda).unwrap();
        assert!(gap <= 1e-9, "gap {gap}");
        let (lhs, rhs) = dv_sides(&p, &x, lambda);
        assert!((lhs - rhs).abs() <= 1e-9);
    }
}
