//! Exact Wasserstein-1 on a finite metric space, by two independent routes.
//!
//! The primal route runs the transportation simplex directly on the
//! `n × n` plan polytope (north-west corner start, MODI potentials,
//! stepping-stone cycles). The dual route solves the Kantorovich potential
//! LP `max Σ φ_i (p_i − q_i)` subject to `φ_i − φ_j ≤ d_ij` with the
//! generic tableau simplex in [`super::lp`]. Both use Bland's rule.

use std::collections::VecDeque;

use serde::Serialize;

use super::{lp, DiscreteDistribution, MeasureError};

/// Reduced costs above `-REDUCED_EPS · scale` count as nonnegative.
const REDUCED_EPS: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    /// Optimal transport cost `Σ d_ij π_ij`.
    pub cost: f64,
    /// Row-major plan with row marginals `p` and column marginals `q`.
    pub plan: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualSolution {
    /// Optimal value `Σ φ_i (p_i − q_i)`.
    pub value: f64,
    /// A 1-Lipschitz potential attaining the value.
    pub potential: Vec<f64>,
}

/// Solves the transportation LP between `p` and `q` under the ground metric
/// of their common space.
pub fn wasserstein1_primal(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
) -> Result<TransportPlan, MeasureError> {
    p.same_space(q)?;
    let space = p.space();
    let n = space.len();
    let cost = space.matrix();
    let supply = p.mass();
    let demand = q.mass();

    let mut plan = vec![vec![0.0; n]; n];
    let mut basic = vec![vec![false; n]; n];

    // North-west corner start. Each step advances exactly one index, so the
    // staircase yields 2n − 1 basic cells forming a spanning tree even when
    // allocations are degenerate.
    {
        let mut s = supply.to_vec();
        let mut d = demand.to_vec();
        let (mut i, mut j) = (0, 0);
        loop {
            let x = s[i].min(d[j]);
            plan[i][j] = x;
            basic[i][j] = true;
            s[i] -= x;
            d[j] -= x;
            if i == n - 1 && j == n - 1 {
                break;
            }
            if j == n - 1 || (i < n - 1 && s[i] <= d[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
    }

    let scale = space.diameter().max(1.0);
    let max_pivots = 100 * n * n + 1000;
    let mut pivots = 0;
    loop {
        let (u, v) = potentials(&basic, cost);
        let entering = (0..n * n).map(|k| (k / n, k % n)).find(|&(i, j)| {
            !basic[i][j] && cost[i][j] - u[i] - v[j] < -REDUCED_EPS * scale
        });
        let Some((ei, ej)) = entering else {
            break;
        };
        pivots += 1;
        if pivots > max_pivots {
            return Err(MeasureError::PivotLimit(max_pivots));
        }

        // Tree path from column ej back to row ei; cells alternate −, +, −, …
        let path = tree_path(&basic, ej, ei);
        let minus: Vec<(usize, usize)> = path.iter().step_by(2).copied().collect();
        let theta = minus.iter().map(|&(i, j)| plan[i][j]).fold(f64::INFINITY, f64::min);
        // lowest row-major index among the blocking cells leaves
        let leaving = minus
            .iter()
            .copied()
            .filter(|&(i, j)| plan[i][j] <= theta)
            .min_by_key(|&(i, j)| i * n + j)
            .expect("cycle has a blocking cell");

        for (k, &(i, j)) in path.iter().enumerate() {
            if k % 2 == 0 {
                plan[i][j] = (plan[i][j] - theta).max(0.0);
            } else {
                plan[i][j] += theta;
            }
        }
        plan[ei][ej] = theta;
        basic[ei][ej] = true;
        basic[leaving.0][leaving.1] = false;
        plan[leaving.0][leaving.1] = 0.0;
    }

    let total = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| cost[i][j] * plan[i][j])
        .sum::<f64>()
        .max(0.0);
    Ok(TransportPlan { cost: total, plan })
}

/// MODI potentials: `u_i + v_j = d_ij` on every basic cell, `u_0 = 0`.
fn potentials(basic: &[Vec<bool>], cost: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = basic.len();
    let mut u = vec![f64::NAN; n];
    let mut v = vec![f64::NAN; n];
    u[0] = 0.0;
    // nodes 0..n are rows, n..2n are columns
    let mut queue = VecDeque::from([0usize]);
    while let Some(node) = queue.pop_front() {
        if node < n {
            let i = node;
            for j in 0..n {
                if basic[i][j] && v[j].is_nan() {
                    v[j] = cost[i][j] - u[i];
                    queue.push_back(n + j);
                }
            }
        } else {
            let j = node - n;
            for i in 0..n {
                if basic[i][j] && u[i].is_nan() {
                    u[i] = cost[i][j] - v[j];
                    queue.push_back(i);
                }
            }
        }
    }
    debug_assert!(u.iter().chain(&v).all(|x| !x.is_nan()), "basis is not a spanning tree");
    (u, v)
}

/// Cells on the unique basis-tree path from column node `col` to row node `row`.
fn tree_path(basic: &[Vec<bool>], col: usize, row: usize) -> Vec<(usize, usize)> {
    let n = basic.len();
    let mut parent = vec![usize::MAX; 2 * n];
    let start = n + col;
    parent[start] = start;
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        if node == row {
            break;
        }
        let neighbours: Vec<usize> = if node < n {
            (0..n).filter(|&j| basic[node][j]).map(|j| n + j).collect()
        } else {
            (0..n).filter(|&i| basic[i][node - n]).collect()
        };
        for next in neighbours {
            if parent[next] == usize::MAX {
                parent[next] = node;
                queue.push_back(next);
            }
        }
    }
    let mut cells = Vec::new();
    let mut node = row;
    while node != start {
        let prev = parent[node];
        let cell = if node < n { (node, prev - n) } else { (prev, node - n) };
        cells.push(cell);
        node = prev;
    }
    cells.reverse();
    cells
}

/// Solves the Kantorovich–Rubinstein potential LP.
///
/// The potential is pinned at `φ_0 = 0` and shifted to `x_i = φ_i + d_i0 ≥ 0`;
/// the triangle inequality then makes every right-hand side nonnegative, so
/// the origin is a feasible starting vertex.
pub fn wasserstein1_dual(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
) -> Result<DualSolution, MeasureError> {
    p.same_space(q)?;
    let space = p.space();
    let n = space.len();
    let diff: Vec<f64> = p.mass().iter().zip(q.mass()).map(|(a, b)| a - b).collect();
    if n == 1 || diff.iter().all(|&x| x == 0.0) {
        // every potential is optimal; report the constant one
        return Ok(DualSolution { value: 0.0, potential: vec![0.0; n] });
    }
    let d = |i: usize, j: usize| space.dist(i, j);

    // variables x_1..x_{n-1}
    let m = n - 1;
    let c: Vec<f64> = diff[1..].to_vec();
    let mut a = Vec::with_capacity(n * m);
    let mut b = Vec::with_capacity(n * m);
    for i in 1..n {
        // φ_i − φ_0 ≤ d_i0
        let mut row = vec![0.0; m];
        row[i - 1] = 1.0;
        a.push(row);
        b.push(2.0 * d(i, 0));
        for j in 1..n {
            if i == j {
                continue;
            }
            // φ_i − φ_j ≤ d_ij
            let mut row = vec![0.0; m];
            row[i - 1] = 1.0;
            row[j - 1] = -1.0;
            a.push(row);
            b.push((d(i, j) + d(i, 0) - d(j, 0)).max(0.0));
        }
    }
    let sol = lp::maximize(&c, &a, &b)?;
    let mut potential = vec![0.0; n];
    for i in 1..n {
        potential[i] = sol.x[i - 1] - d(i, 0);
    }
    let value = potential.iter().zip(&diff).map(|(f, x)| f * x).sum::<f64>();
    Ok(DualSolution { value, potential })
}
