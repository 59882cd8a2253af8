use serde::{Deserialize, Serialize};

use super::MeasureError;
use crate::tolerance;

/// A finite set of labelled points with a validated distance matrix.
///
/// Zero off-diagonal distances are accepted (pseudo-metric); Lipschitz
/// constants skip such pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace", into = "RawSpace")]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<Vec<f64>>,
    diameter: f64,
}

#[derive(Serialize, Deserialize)]
struct RawSpace {
    labels: Vec<String>,
    dist: Vec<Vec<f64>>,
}

impl TryFrom<RawSpace> for FiniteMetricSpace {
    type Error = MeasureError;

    fn try_from(raw: RawSpace) -> Result<Self, Self::Error> {
        FiniteMetricSpace::new(raw.labels, raw.dist)
    }
}

impl From<FiniteMetricSpace> for RawSpace {
    fn from(space: FiniteMetricSpace) -> Self {
        RawSpace { labels: space.labels, dist: space.dist }
    }
}

impl FiniteMetricSpace {
    pub fn new(labels: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self, MeasureError> {
        let n = dist.len();
        if n == 0 {
            return Err(MeasureError::EmptySpace);
        }
        if labels.len() != n {
            return Err(MeasureError::LabelCount { labels: labels.len(), size: n });
        }
        for (row, r) in dist.iter().enumerate() {
            if r.len() != n {
                return Err(MeasureError::RaggedMatrix { row, len: r.len(), expected: n });
            }
            for (j, &value) in r.iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(MeasureError::BadDistance { i: row, j, value });
                }
            }
        }
        let scale = dist.iter().flatten().fold(1.0_f64, |m, &d| m.max(d));
        let slack = tolerance::METRIC * scale;
        for i in 0..n {
            if dist[i][i] != 0.0 {
                return Err(MeasureError::NonzeroDiagonal { i, value: dist[i][i] });
            }
            for j in (i + 1)..n {
                if (dist[i][j] - dist[j][i]).abs() > slack {
                    return Err(MeasureError::Asymmetric { i, j, a: dist[i][j], b: dist[j][i] });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if dist[i][k] > dist[i][j] + dist[j][k] + slack {
                        return Err(MeasureError::Triangle { i, j, k });
                    }
                }
            }
        }
        let diameter = dist.iter().flatten().fold(0.0_f64, |m, &d| m.max(d));
        Ok(FiniteMetricSpace { labels, dist, diameter })
    }

    /// Points on the real line with the absolute-difference metric.
    pub fn line(coords: &[f64]) -> Result<Self, MeasureError> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(MeasureError::NonFinite("line coordinate"));
        }
        let labels = coords.iter().map(|c| format!("{c}")).collect();
        let dist = coords
            .iter()
            .map(|a| coords.iter().map(|b| (a - b).abs()).collect())
            .collect();
        Self::new(labels, dist)
    }

    /// `n` points at mutual distance 1.
    pub fn discrete(n: usize) -> Result<Self, MeasureError> {
        let labels = (0..n).map(|i| format!("p{i}")).collect();
        let dist = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect();
        Self::new(labels, dist)
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.dist
    }

    /// Largest pairwise distance; zero for a single point.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Lipschitz constant of `f` on this space: the largest difference
    /// quotient over pairs at positive distance. Returns `None` when two
    /// points at distance zero carry different values.
    pub fn lipschitz_constant(&self, f: &[f64]) -> Option<f64> {
        assert_eq!(f.len(), self.len(), "function dimension mismatch");
        let mut g = 0.0_f64;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let diff = (f[i] - f[j]).abs();
                let d = self.dist[i][j];
                if d > 0.0 {
                    g = g.max(diff / d);
                } else if diff > 0.0 {
                    return None;
                }
            }
        }
        Some(g)
    }
}
