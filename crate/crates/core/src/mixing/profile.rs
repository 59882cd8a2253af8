use std::io::Write;

use serde::Serialize;

use super::{fit_geometric_rate, GeometricFit, MarkovChain, MixingError};
use crate::fmt_f64;

/// φ(k) and β(k) for `k = 1..=kmax`, with an optional geometric-rate fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingProfile {
    pub phi: Vec<f64>,
    pub beta: Vec<f64>,
    /// Truncation horizon of the β supremum over time.
    pub horizon: usize,
    /// `None` when fewer than three coefficients are positive.
    pub geometric_fit: Option<GeometricFit>,
}

impl MixingProfile {
    pub fn compute(chain: &MarkovChain, kmax: usize, horizon: usize) -> Result<Self, MixingError> {
        if kmax == 0 {
            return Err(MixingError::ZeroLag);
        }
        let phi = (1..=kmax).map(|k| chain.phi_coefficient(k)).collect::<Result<Vec<_>, _>>()?;
        let beta = (1..=kmax)
            .map(|k| chain.beta_coefficient(k, horizon))
            .collect::<Result<Vec<_>, _>>()?;
        let pts: Vec<(usize, f64)> = phi.iter().enumerate().map(|(i, &p)| (i + 1, p)).collect();
        let geometric_fit = match fit_geometric_rate(&pts) {
            Ok(fit) => Some(fit),
            Err(MixingError::TooFewPoints(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(MixingProfile { phi, beta, horizon, geometric_fit })
    }

    pub fn kmax(&self) -> usize {
        self.phi.len()
    }

    /// Writes `k,phi,beta` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["k", "phi", "beta"])?;
        for (i, (p, b)) in self.phi.iter().zip(&self.beta).enumerate() {
            w.write_record([(i + 1).to_string(), fmt_f64(*p), fmt_f64(*b)])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::measure::FiniteMetricSpace;

    #[test]
    fn profile_is_monotone_and_bounded() {
        let s = Arc::new(FiniteMetricSpace::discrete(2).unwrap());
        let c = MarkovChain::two_state(s, 0.3, 0.1, vec![1.0, 0.0]).unwrap();
        let p = MixingProfile::compute(&c, 20, 40).unwrap();
        for k in 0..20 {
            assert!((0.0..=2.0).contains(&p.phi[k]) && (0.0..=2.0).contains(&p.beta[k]));
            assert!(p.beta[k] <= p.phi[k] + 1e-12);
            if k > 0 {
                assert!(p.phi[k] <= p.phi[k - 1] && p.beta[k] <= p.beta[k - 1]);
            }
        }
        assert!(matches!(p.geometric_fit, Some(GeometricFit::Fitted { .. })));

        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,phi,beta\n1,"));
        assert_eq!(text.lines().count(), 21);
    }
}
