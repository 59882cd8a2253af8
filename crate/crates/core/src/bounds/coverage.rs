use rayon::prelude::*;
use serde::Serialize;

use super::Bound;

/// Bounds and empirical quantities for one replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub seed: u64,
    pub n: usize,
    pub tau: usize,
    pub empirical_gen: f64,
    pub regret_observed: f64,
    /// The expected-error bound with the observed regret plugged in for
    /// `E[regret]`; the proper check uses the mean over replications.
    pub thm41: Bound,
    pub thm42: Bound,
    /// `None` when the source is not certified with `r > 1`.
    pub thm54: Option<Bound>,
    pub cor56: Option<Bound>,
}

impl BoundReport {
    pub fn holds_thm42(&self) -> bool {
        self.empirical_gen <= self.thm42.total
    }

    pub fn holds_thm54(&self) -> Option<bool> {
        self.thm54.as_ref().map(|b| self.empirical_gen <= b.total)
    }

    pub fn holds_cor56(&self) -> Option<bool> {
        self.cor56.as_ref().map(|b| self.empirical_gen <= b.total)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coverage {
    pub fraction_thm42: f64,
    /// Over the replications where the EWA bound applies.
    pub fraction_thm54: Option<f64>,
    /// In seed order.
    pub reports: Vec<BoundReport>,
}

/// Runs `run_fn` for seeds `seed0, seed0 + 1, …` (possibly in parallel) and
/// aggregates in seed order, so the result does not depend on scheduling.
///
/// # Panics
/// If `replications` is zero.
pub fn coverage<F, E>(replications: usize, seed0: u64, run_fn: F) -> Result<Coverage, E>
where
    F: Fn(u64) -> Result<BoundReport, E> + Sync,
    E: Send,
{
    assert!(replications >= 1, "coverage needs at least one replication");
    let reports = (0..replications as u64)
        .into_par_iter()
        .map(|i| run_fn(seed0.wrapping_add(i)))
        .collect::<Result<Vec<_>, E>>()?;
    let r = reports.len() as f64;
    let fraction_thm42 = reports.iter().filter(|rep| rep.holds_thm42()).count() as f64 / r;
    let applicable: Vec<bool> = reports.iter().filter_map(BoundReport::holds_thm54).collect();
    let fraction_thm54 = (!applicable.is_empty())
        .then(|| applicable.iter().filter(|&&h| h).count() as f64 / applicable.len() as f64);
    Ok(Coverage { fraction_thm42, fraction_thm54, reports })
}
