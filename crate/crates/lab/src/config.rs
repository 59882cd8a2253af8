//! Experiment configuration: JSON parsing and whole-config validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use otb_core::learners::LossTable;
use otb_core::measure::{DiscreteDistribution, FiniteMetricSpace};
use otb_core::mixing::MarkovChain;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::LabError;

/// Default largest lag for mixing profiles.
pub const DEFAULT_KMAX: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EtaRule {
    /// `η = 1/√n`.
    Auto,
    #[serde(untagged)]
    Fixed(f64),
}

impl EtaRule {
    pub fn eta(&self, n: usize) -> f64 {
        match *self {
            EtaRule::Auto => 1.0 / (n as f64).sqrt(),
            EtaRule::Fixed(eta) => eta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauRule {
    /// `max(1, ⌈ln n⌉ − 1)`.
    #[serde(rename = "paper-log")]
    LogN,
    Explicit(usize),
}

impl TauRule {
    pub fn tau(&self, n: usize) -> usize {
        match *self {
            TauRule::LogN => otb_core::bounds::log_tau(n),
            TauRule::Explicit(k) => k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerSpec {
    Erm,
    Gibbs { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KappaMode {
    /// `Σκ = n·η·G_H·R_H²`.
    #[default]
    Theoretical,
    /// `Σκ` from the trace's measured `W(P_t, P_{t+1})`.
    Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorSpec {
    Uniform,
    #[serde(untagged)]
    Mass { mass: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    labels: Vec<String>,
    dist: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    transition: Vec<Vec<f64>>,
    initial: Vec<f64>,
    space: RawSpace,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoss {
    h_space: RawSpace,
    z_space: RawSpace,
    values: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    chain: RawChain,
    loss: RawLoss,
    prior: PriorSpec,
    eta: EtaRule,
    n: Vec<usize>,
    delta: f64,
    tau: TauRule,
    learner: LearnerSpec,
    replications: usize,
    seed: u64,
    #[serde(default)]
    output: Option<PathBuf>,
    #[serde(default)]
    kmax: Option<usize>,
    #[serde(default)]
    beta_horizon: Option<usize>,
    #[serde(default)]
    kappa_mode: KappaMode,
}

/// A fully validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub chain: MarkovChain,
    pub loss: LossTable,
    pub prior: DiscreteDistribution,
    pub eta: EtaRule,
    pub ns: Vec<usize>,
    pub delta: f64,
    pub tau: TauRule,
    pub learner: LearnerSpec,
    pub replications: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub kmax: usize,
    /// `None` means `n + τ_max` of each sweep point.
    pub beta_horizon: Option<usize>,
    pub kappa_mode: KappaMode,
    /// SHA-256 of the config file bytes, hex encoded.
    pub hash: String,
}

/// Every problem found in a config, one message each.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationErrors(pub Vec<String>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {e}")?;
        }
        Ok(())
    }
}

/// Reads and validates a config file.
pub fn validate_config(path: &Path) -> Result<ExperimentConfig, LabError> {
    let bytes = std::fs::read(path).map_err(|source| LabError::Io { path: path.to_path_buf(), source })?;
    parse_config(&bytes).map_err(LabError::Validation)
}

/// Validates config bytes, collecting all errors before giving up.
pub fn parse_config(bytes: &[u8]) -> Result<ExperimentConfig, ValidationErrors> {
    let raw: RawConfig = serde_json::from_slice(bytes)
        .map_err(|e| ValidationErrors(vec![format!("malformed config JSON: {e}")]))?;
    let mut errors = Vec::new();

    let space = |raw: RawSpace, what: &str, errors: &mut Vec<String>| {
        FiniteMetricSpace::new(raw.labels, raw.dist)
            .map(Arc::new)
            .map_err(|e| errors.push(format!("{what}: {e}")))
            .ok()
    };

    let z_chain = space(raw.chain.space, "chain.space", &mut errors);
    let chain = z_chain.and_then(|z| {
        let initial = DiscreteDistribution::new(z, raw.chain.initial)
            .map_err(|e| errors.push(format!("chain.initial: {e}")))
            .ok()?;
        MarkovChain::new(raw.chain.transition, initial)
            .map_err(|e| errors.push(format!("chain.transition: {e}")))
            .ok()
    });

    let h = space(raw.loss.h_space, "loss.h_space", &mut errors);
    let z = space(raw.loss.z_space, "loss.z_space", &mut errors);
    let loss = match (h, z) {
        (Some(h), Some(z)) => LossTable::derive(raw.loss.values, h, z)
            .map_err(|e| errors.push(format!("loss.values: {e}")))
            .ok(),
        _ => None,
    };
    if let (Some(c), Some(l)) = (&chain, &loss) {
        if c.space().as_ref() != l.z_space().as_ref() {
            errors.push(format!(
                "loss.z_space ({} points) does not match chain.space ({} points)",
                l.z_space().len(),
                c.space().len()
            ));
        }
    }

    let prior = loss.as_ref().and_then(|l| match &raw.prior {
        PriorSpec::Uniform => Some(DiscreteDistribution::uniform(l.h_space().clone())),
        PriorSpec::Mass { mass } => DiscreteDistribution::new(l.h_space().clone(), mass.clone())
            .map_err(|e| errors.push(format!("prior: {e} (H has {} points)", l.h_space().len())))
            .ok(),
    });

    if raw.n.is_empty() {
        errors.push("n: the sweep must contain at least one value".into());
    }
    for &n in raw.n.iter().filter(|&&n| n < 2) {
        errors.push(format!("n: every sweep value must be at least 2, got {n}"));
    }
    if !(raw.delta > 0.0 && raw.delta < 1.0) {
        errors.push(format!("delta must lie in (0, 1), got {}", raw.delta));
    }
    if let EtaRule::Fixed(eta) = raw.eta {
        if !eta.is_finite() || eta < 0.0 {
            errors.push(format!("eta must be \"auto\" or a finite nonnegative number, got {eta}"));
        }
    }
    if let TauRule::Explicit(k) = raw.tau {
        if k == 0 {
            errors.push("tau.explicit must be at least 1".into());
        }
        if let Some(&n) = raw.n.iter().filter(|&&n| n < k).min() {
            errors.push(format!("tau.explicit = {k} exceeds the sweep value n = {n}"));
        }
    }
    if let LearnerSpec::Gibbs { gamma } = raw.learner {
        if !gamma.is_finite() || gamma < 0.0 {
            errors.push(format!("learner.gibbs.gamma must be finite and nonnegative, got {gamma}"));
        }
    }
    if raw.replications == 0 {
        errors.push("replications must be at least 1".into());
    }
    let kmax = raw.kmax.unwrap_or(DEFAULT_KMAX);
    if kmax == 0 {
        errors.push("kmax must be at least 1".into());
    }
    if raw.beta_horizon == Some(0) {
        errors.push("beta_horizon must be at least 1".into());
    }

    if !errors.is_empty() {
        return Err(ValidationErrors(errors));
    }
    let (chain, loss, prior) = (chain.unwrap(), loss.unwrap(), prior.unwrap());
    Ok(ExperimentConfig {
        name: raw.name,
        chain,
        loss,
        prior,
        eta: raw.eta,
        ns: raw.n,
        delta: raw.delta,
        tau: raw.tau,
        learner: raw.learner,
        replications: raw.replications,
        seed: raw.seed,
        output: raw.output,
        kmax,
        beta_horizon: raw.beta_horizon,
        kappa_mode: raw.kappa_mode,
        hash: hex(&Sha256::digest(bytes)),
    })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
