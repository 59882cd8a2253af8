//! Dense tableau simplex for `max cᵀx  s.t.  Ax ≤ b, x ≥ 0` with `b ≥ 0`.
//!
//! The slack basis is feasible, so no phase one is needed. Pivoting follows
//! Bland's rule (lowest-index entering column, lowest-index leaving basic
//! variable among ratio ties), which rules out cycling on degenerate vertices.

use super::MeasureError;

const PIVOT_EPS: f64 = 1e-12;

#[derive(Debug)]
pub(crate) struct LpSolution {
    #[cfg_attr(not(test), allow(dead_code))]
    pub value: f64,
    pub x: Vec<f64>,
}

pub(crate) fn maximize(
    c: &[f64],
    a: &[Vec<f64>],
    b: &[f64],
) -> Result<LpSolution, MeasureError> {
    let nvars = c.len();
    let ncons = a.len();
    let width = nvars + ncons + 1;
    // rows 0..ncons are constraints, last row is the objective (reduced costs)
    let mut t = vec![vec![0.0; width]; ncons + 1];
    for (r, row) in a.iter().enumerate() {
        debug_assert!(b[r] >= 0.0, "slack basis must be feasible");
        t[r][..nvars].copy_from_slice(row);
        t[r][nvars + r] = 1.0;
        t[r][width - 1] = b[r];
    }
    for (j, &cj) in c.iter().enumerate() {
        t[ncons][j] = -cj;
    }
    let mut basis: Vec<usize> = (nvars..nvars + ncons).collect();

    let max_pivots = 50 * (nvars + ncons + 1) * (nvars + ncons + 1);
    for _ in 0..max_pivots {
        let Some(enter) = (0..width - 1).find(|&j| t[ncons][j] < -PIVOT_EPS) else {
            let mut x = vec![0.0; nvars];
            for (r, &bv) in basis.iter().enumerate() {
                if bv < nvars {
                    x[bv] = t[r][width - 1];
                }
            }
            return Ok(LpSolution { value: t[ncons][width - 1], x });
        };

        let mut leave: Option<(usize, f64)> = None;
        for r in 0..ncons {
            let coef = t[r][enter];
            if coef <= PIVOT_EPS {
                continue;
            }
            let ratio = t[r][width - 1] / coef;
            leave = match leave {
                None => Some((r, ratio)),
                Some((lr, lratio)) => {
                    if ratio < lratio - PIVOT_EPS
                        || (ratio <= lratio + PIVOT_EPS && basis[r] < basis[lr])
                    {
                        Some((r, ratio))
                    } else {
                        Some((lr, lratio))
                    }
                }
            };
        }
        // the feasible region here is always bounded; an unbounded column
        // can only come from a malformed caller
        let (pivot_row, _) = leave.expect("unbounded linear program");

        let p = t[pivot_row][enter];
        for v in t[pivot_row].iter_mut() {
            *v /= p;
        }
        let pivot = t[pivot_row].clone();
        for (r, row) in t.iter_mut().enumerate() {
            if r == pivot_row {
                continue;
            }
            let f = row[enter];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot) {
                    *v -= f * pv;
                }
            }
        }
        basis[pivot_row] = enter;
    }
    Err(MeasureError::PivotLimit(max_pivots))
}
