use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{FiniteMetricSpace, MeasureError};
use crate::tolerance;

/// A probability vector over a shared [`FiniteMetricSpace`].
///
/// Serialized as `{"labels": [...], "dist": [[...]], "mass": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub struct DiscreteDistribution {
    space: Arc<FiniteMetricSpace>,
    mass: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawDistribution {
    #[serde(flatten)]
    space: FiniteMetricSpace,
    mass: Vec<f64>,
}

impl TryFrom<RawDistribution> for DiscreteDistribution {
    type Error = MeasureError;

    fn try_from(raw: RawDistribution) -> Result<Self, Self::Error> {
        DiscreteDistribution::new(Arc::new(raw.space), raw.mass)
    }
}

impl From<DiscreteDistribution> for RawDistribution {
    fn from(d: DiscreteDistribution) -> Self {
        RawDistribution { space: (*d.space).clone(), mass: d.mass }
    }
}

impl DiscreteDistribution {
    /// Validates that `mass` is a probability vector on `space`.
    pub fn new(space: Arc<FiniteMetricSpace>, mass: Vec<f64>) -> Result<Self, MeasureError> {
        if mass.len() != space.len() {
            return Err(MeasureError::Dimension { expected: space.len(), got: mass.len() });
        }
        if let Some((index, &value)) =
            mass.iter().enumerate().find(|(_, m)| !m.is_finite() || **m < 0.0)
        {
            return Err(MeasureError::NegativeMass { index, value });
        }
        let sum: f64 = mass.iter().sum();
        if (sum - 1.0).abs() > tolerance::SUM {
            return Err(MeasureError::NotNormalized { sum });
        }
        Ok(DiscreteDistribution { space, mass })
    }

    /// Normalizes nonnegative weights. Fails if all weights vanish.
    pub fn from_weights(
        space: Arc<FiniteMetricSpace>,
        weights: Vec<f64>,
    ) -> Result<Self, MeasureError> {
        if weights.len() != space.len() {
            return Err(MeasureError::Dimension { expected: space.len(), got: weights.len() });
        }
        if let Some((index, &value)) =
            weights.iter().enumerate().find(|(_, m)| !m.is_finite() || **m < 0.0)
        {
            return Err(MeasureError::NegativeMass { index, value });
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(MeasureError::NotNormalized { sum: total });
        }
        let mass = weights.into_iter().map(|w| w / total).collect();
        Self::new(space, mass)
    }

    pub fn uniform(space: Arc<FiniteMetricSpace>) -> Self {
        let n = space.len();
        DiscreteDistribution { mass: vec![1.0 / n as f64; n], space }
    }

    pub fn point_mass(space: Arc<FiniteMetricSpace>, index: usize) -> Self {
        assert!(index < space.len(), "point index {index} out of range");
        let mut mass = vec![0.0; space.len()];
        mass[index] = 1.0;
        DiscreteDistribution { space, mass }
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn has_full_support(&self) -> bool {
        self.mass.iter().all(|&m| m > 0.0)
    }

    /// `⟨P, f⟩`, the expectation of `f` under this distribution.
    pub fn expect(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.mass.len(), "function dimension mismatch");
        self.mass.iter().zip(f).map(|(m, v)| m * v).sum()
    }

    /// Errors unless `other` lives on the same space (pointer or value equality).
    pub fn same_space(&self, other: &DiscreteDistribution) -> Result<(), MeasureError> {
        if self.len() != other.len() {
            return Err(MeasureError::Dimension { expected: self.len(), got: other.len() });
        }
        if Arc::ptr_eq(&self.space, &other.space) || self.space == other.space {
            Ok(())
        } else {
            Err(MeasureError::SpaceMismatch)
        }
    }
}
