use serde::Serialize;

use super::MixingError;

const R_MIN: f64 = 1e-3;
const R_MAX: f64 = 8.0;
const GRID: usize = 800;

/// Outcome of fitting `φ(k) ≈ K·e^{−k^r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeometricFit {
    /// Every coefficient is exactly zero (an i.i.d. source). `r` is
    /// unspecified: the bound `0 ≤ 0·e^{−k^r}` holds for every rate.
    AllZero,
    /// Least-squares parameters plus the largest signed residual
    /// `ln φ(k) − ln(K e^{−k^r})` over the positive points. A positive
    /// residual means the fitted curve undershoots φ at that lag.
    Fitted { k: f64, r: f64, max_residual: f64 },
}

/// A certified envelope: `φ(k) ≤ k·e^{−j^r}` at every lag used in the fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometricRate {
    pub k: f64,
    pub r: f64,
}

impl GeometricFit {
    /// Inflates the fitted `K` until no residual is positive.
    ///
    /// The all-zero case certifies `K = 0` with `r = +∞`.
    pub fn certified(&self) -> GeometricRate {
        match *self {
            GeometricFit::AllZero => GeometricRate { k: 0.0, r: f64::INFINITY },
            GeometricFit::Fitted { k, r, max_residual } => {
                GeometricRate { k: k * max_residual.max(0.0).exp(), r }
            }
        }
    }
}

impl GeometricRate {
    /// `r > 1`, the regime where `φ(⌈ln n⌉) ≤ K/n`.
    pub fn is_super_geometric(&self) -> bool {
        self.r > 1.0
    }
}

/// Fits `ln φ(k) = ln K − k^r` by least squares over `(ln K, r)`.
///
/// For fixed `r` the optimal intercept is `mean(ln φ + k^r)`, so the fit is a
/// one-dimensional search over `r ∈ [1e-3, 8]`: a grid scan followed by
/// golden-section refinement. Zero coefficients carry no information about
/// the rate and are skipped.
pub fn fit_geometric_rate(points: &[(usize, f64)]) -> Result<GeometricFit, MixingError> {
    if !points.is_empty() && points.iter().all(|&(_, phi)| phi == 0.0) {
        return Ok(GeometricFit::AllZero);
    }
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(k, phi)| k >= 1 && phi > 0.0 && phi.is_finite())
        .map(|&(k, phi)| (k as f64, phi.ln()))
        .collect();
    if usable.len() < 3 {
        return Err(MixingError::TooFewPoints(usable.len()));
    }

    let sse = |r: f64| -> f64 {
        let a = intercept(&usable, r);
        usable.iter().map(|&(k, y)| (y - a + k.powf(r)).powi(2)).sum()
    };

    let step = (R_MAX - R_MIN) / GRID as f64;
    let grid_r = |i: usize| R_MIN + step * i as f64;
    let best = (0..=GRID)
        .map(|i| (i, sse(grid_r(i))))
        .fold((0, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b })
        .0;
    let mut lo = grid_r(best.saturating_sub(1));
    let mut hi = grid_r((best + 1).min(GRID));

    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (sse(x1), sse(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = sse(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = sse(x2);
        }
    }
    let r = if f1 <= f2 { x1 } else { x2 };
    let a = intercept(&usable, r);
    let max_residual = usable
        .iter()
        .map(|&(k, y)| y - (a - k.powf(r)))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(GeometricFit::Fitted { k: a.exp(), r, max_residual })
}

fn intercept(pts: &[(f64, f64)], r: f64) -> f64 {
    pts.iter().map(|&(k, y)| y + k.powf(r)).sum::<f64>() / pts.len() as f64
}
