//! Small dense helpers: Gaussian elimination and stochastic matrix products.

/// Rank of `a` by Gaussian elimination with partial pivoting.
pub(crate) fn rank(mut a: Vec<Vec<f64>>, tol: f64) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (piv, val) = (r..rows)
            .map(|i| (i, a[i][c].abs()))
            .fold((r, -1.0), |best, x| if x.1 > best.1 { x } else { best });
        if val <= tol {
            continue;
        }
        a.swap(r, piv);
        for i in (r + 1)..rows {
            let f = a[i][c] / a[r][c];
            if f != 0.0 {
                for j in c..cols {
                    a[i][j] -= f * a[r][j];
                }
            }
        }
        r += 1;
    }
    r
}

/// Solves `a x = b` for square nonsingular `a` with partial pivoting.
pub(crate) fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap_or(c);
        a.swap(c, piv);
        b.swap(c, piv);
        for i in (c + 1)..n {
            let f = a[i][c] / a[c][c];
            if f != 0.0 {
                for j in c..n {
                    a[i][j] -= f * a[c][j];
                }
                b[i] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Row-stochastic product with every row renormalized to sum to one.
pub(crate) fn stochastic_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum::<f64>())
                .collect();
            normalize(&mut row);
            row
        })
        .collect()
}

/// Row vector times stochastic matrix, renormalized.
pub(crate) fn vec_mul(v: &[f64], m: &[Vec<f64>]) -> Vec<f64> {
    let n = v.len();
    let mut out: Vec<f64> = (0..n).map(|j| (0..n).map(|k| v[k] * m[k][j]).sum()).collect();
    normalize(&mut out);
    out
}

pub(crate) fn normalize(row: &mut [f64]) {
    for x in row.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let s: f64 = row.iter().sum();
    if s > 0.0 {
        for x in row.iter_mut() {
            *x /= s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_solve() {
        assert_eq!(rank(vec![vec![1.0, 2.0], vec![2.0, 4.0]], 1e-12), 1);
        assert_eq!(rank(vec![vec![1.0, 2.0], vec![3.0, 4.0]], 1e-12), 2);
        let x = solve(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0]);
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
    }
}
