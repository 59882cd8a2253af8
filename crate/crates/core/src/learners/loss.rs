use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::LearnerError;
use crate::measure::{DiscreteDistribution, FiniteMetricSpace};

/// A nonnegative loss `ℓ(h, z)` over finite hypothesis and instance spaces,
/// with its exact Lipschitz constants and uniform bound.
///
/// JSON form: `{"h_space": {...}, "z_space": {...}, "values": [[...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLoss", into = "RawLoss")]
pub struct LossTable {
    h_space: Arc<FiniteMetricSpace>,
    z_space: Arc<FiniteMetricSpace>,
    values: Vec<Vec<f64>>,
    g_h: f64,
    g_z: f64,
    b_ell: f64,
}

#[derive(Serialize, Deserialize)]
struct RawLoss {
    h_space: FiniteMetricSpace,
    z_space: FiniteMetricSpace,
    values: Vec<Vec<f64>>,
}

impl TryFrom<RawLoss> for LossTable {
    type Error = LearnerError;

    fn try_from(raw: RawLoss) -> Result<Self, Self::Error> {
        LossTable::derive(raw.values, Arc::new(raw.h_space), Arc::new(raw.z_space))
    }
}

impl From<LossTable> for RawLoss {
    fn from(l: LossTable) -> Self {
        RawLoss {
            h_space: (*l.h_space).clone(),
            z_space: (*l.z_space).clone(),
            values: l.values,
        }
    }
}

impl LossTable {
    /// Validates `values[h][z]` and computes `G_H`, `G_Z` and `B_ℓ`.
    ///
    /// `G_H` is the largest `|ℓ(h,z) − ℓ(h',z)| / d_H(h,h')` over `z` and
    /// pairs at positive distance, `G_Z` likewise in `z`, and
    /// `B_ℓ = min |ℓ| + G_H·R_H + G_Z·R_Z`.
    pub fn derive(
        values: Vec<Vec<f64>>,
        h_space: Arc<FiniteMetricSpace>,
        z_space: Arc<FiniteMetricSpace>,
    ) -> Result<Self, LearnerError> {
        let (nh, nz) = (h_space.len(), z_space.len());
        if values.len() != nh {
            return Err(LearnerError::HDimension { rows: values.len(), points: nh });
        }
        for (h, row) in values.iter().enumerate() {
            if row.len() != nz {
                return Err(LearnerError::ZDimension { row: h, len: row.len(), points: nz });
            }
            if let Some((z, &value)) =
                row.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0)
            {
                return Err(LearnerError::NegativeLoss { h, z, value });
            }
        }

        let mut g_h = 0.0_f64;
        for z in 0..nz {
            let column: Vec<f64> = values.iter().map(|row| row[z]).collect();
            let g = h_space
                .lipschitz_constant(&column)
                .ok_or(LearnerError::ZeroDistanceConflict { space: "H" })?;
            g_h = g_h.max(g);
        }
        let mut g_z = 0.0_f64;
        for row in &values {
            let g = z_space
                .lipschitz_constant(row)
                .ok_or(LearnerError::ZeroDistanceConflict { space: "Z" })?;
            g_z = g_z.max(g);
        }

        let flat = values.iter().flatten().copied();
        let min = flat.clone().fold(f64::INFINITY, f64::min);
        let max = flat.fold(0.0, f64::max);
        let formula = min + g_h * h_space.diameter() + g_z * z_space.diameter();
        // The bound holds in exact arithmetic; a shortfall of a few ulps is
        // rounding in the quotients and is absorbed by lifting B_ℓ to max |ℓ|.
        if max > formula * (1.0 + 16.0 * f64::EPSILON) {
            return Err(LearnerError::BoundViolated { max, bound: formula });
        }
        let b_ell = formula.max(max);
        Ok(LossTable { h_space, z_space, values, g_h, g_z, b_ell })
    }

    pub fn h_space(&self) -> &Arc<FiniteMetricSpace> {
        &self.h_space
    }

    pub fn z_space(&self) -> &Arc<FiniteMetricSpace> {
        &self.z_space
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn value(&self, h: usize, z: usize) -> f64 {
        self.values[h][z]
    }

    pub fn num_hypotheses(&self) -> usize {
        self.values.len()
    }

    pub fn g_h(&self) -> f64 {
        self.g_h
    }

    pub fn g_z(&self) -> f64 {
        self.g_z
    }

    pub fn b_ell(&self) -> f64 {
        self.b_ell
    }

    /// Diameter of H.
    pub fn r_h(&self) -> f64 {
        self.h_space.diameter()
    }

    /// Diameter of Z.
    pub fn r_z(&self) -> f64 {
        self.z_space.diameter()
    }

    pub fn max_loss(&self) -> f64 {
        self.values.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// `ℓ(h, z) − ℓ(h, 0)`: losses measured from the row's first entry.
    ///
    /// Averages are formed on these offsets so that a row that does not
    /// depend on `z` yields exactly zero after centering.
    pub(crate) fn offset(&self, h: usize, z: usize) -> f64 {
        self.values[h][z] - self.values[h][0]
    }

    /// `E_{Z'∼d} [ℓ(h, Z') − ℓ(h, 0)]`.
    pub(crate) fn expected_offset(&self, h: usize, d: &DiscreteDistribution) -> f64 {
        d.mass().iter().enumerate().map(|(z, m)| m * self.offset(h, z)).sum()
    }

    /// `E_{Z'∼d} ℓ(h, Z')`.
    pub fn expected_loss(&self, h: usize, d: &DiscreteDistribution) -> f64 {
        self.values[h][0] + self.expected_offset(h, d)
    }

    /// Empirical mean `(1/n) Σ_t ℓ(h, Z_t)`.
    pub fn empirical_loss(&self, h: usize, samples: &[usize]) -> f64 {
        self.values[h][0] + self.empirical_offset(h, samples)
    }

    pub(crate) fn empirical_offset(&self, h: usize, samples: &[usize]) -> f64 {
        samples.iter().map(|&z| self.offset(h, z)).sum::<f64>() / samples.len() as f64
    }

    pub(crate) fn check_samples(&self, samples: &[usize]) -> Result<(), LearnerError> {
        let points = self.z_space.len();
        match samples.iter().find(|&&z| z >= points) {
            Some(&index) => Err(LearnerError::SampleIndex { index, points }),
            None => Ok(()),
        }
    }
}
