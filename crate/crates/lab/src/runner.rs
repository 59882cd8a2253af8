//! Runs a validated experiment: games, bounds, invariant checks, artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use otb_core::bounds::{
    bound_ewa, bound_etaind, bound_expected, bound_highprob, coverage, log_tau, Bound,
    BoundParams, BoundReport,
};
use otb_core::fmt_f64;
use otb_core::game::{
    ewa_regret_check, generalization_error, genbar_decomposition_check, regret, run_game,
    taushift_check,
};
use otb_core::learners::{erm_posterior, gibbs_posterior, EwaState, OfflinePosterior};
use otb_core::measure::{
    check_pinsker, check_w1_tv, kl_divergence, wasserstein1_dual, DiscreteDistribution,
};
use otb_core::mixing::{GeometricRate, MixingProfile, PRNG_NAME};
use otb_core::tolerance;
use serde::Serialize;

use crate::config::{ExperimentConfig, KappaMode, LearnerSpec};
use crate::LabError;

pub const THM41_TERMS: [&str; 4] = ["regret", "stability", "instance", "mixing"];
pub const THM42_TERMS: [&str; 5] = ["regret", "stability", "instance", "martingale", "mixing"];
pub const EWA_TERMS: [&str; 6] = ["kl", "learning_rate", "shift", "instance", "martingale", "mixing"];

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub replications: Option<usize>,
    pub seed: Option<u64>,
}

/// A failed always-true check, with the seed that reproduces it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub n: usize,
    pub seed: u64,
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
}

/// Per-n aggregate written to `coverage.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRow {
    pub n: usize,
    pub tau: usize,
    pub eta: f64,
    pub replications: usize,
    pub seed_first: u64,
    pub seed_last: u64,
    pub mean_gen: f64,
    pub se_gen: f64,
    pub mean_regret: f64,
    pub se_regret: f64,
    pub coverage_thm42: f64,
    pub coverage_thm54: Option<f64>,
    pub coverage_cor56: Option<f64>,
    pub bound_thm41: f64,
    pub thm41_holds: bool,
    pub beta_tau1: f64,
    pub phi_tau1: f64,
    pub log_clamped: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub coverage: Vec<CoverageRow>,
    pub violations: Vec<Violation>,
}

/// Everything computed for one replication beyond the bound report.
#[derive(Debug, Clone)]
struct RepExtra {
    eta: f64,
    kl: f64,
    kappa_sum: f64,
    kappa_max: f64,
    eta_opt: f64,
    checks: Vec<(&'static str, bool)>,
    violations: Vec<Violation>,
}

/// Mixing quantities shared by every replication.
struct MixingSetup {
    profile: MixingProfile,
    rate: Option<GeometricRate>,
    horizon: usize,
}

fn mixing_setup(cfg: &ExperimentConfig) -> Result<MixingSetup, LabError> {
    let horizon = cfg.ns.iter().map(|&n| beta_horizon(cfg, n)).max().unwrap_or(1);
    let profile = MixingProfile::compute(&cfg.chain, cfg.kmax, horizon)?;
    let rate = profile.geometric_fit.map(|f| f.certified());
    Ok(MixingSetup { profile, rate, horizon })
}

/// The mixing profile for `otb-lab mixing`.
pub fn mixing_profile(cfg: &ExperimentConfig, kmax: usize) -> Result<MixingProfile, LabError> {
    let setup = mixing_setup(cfg)?;
    Ok(MixingProfile::compute(&cfg.chain, kmax, setup.horizon)?)
}

/// Lags checked by the deterministic diagnostics: `{1, ⌈ln n⌉ − 1, configured τ}`.
fn tau_set(cfg: &ExperimentConfig, n: usize) -> Vec<usize> {
    let mut set = vec![1, log_tau(n), cfg.tau.tau(n)];
    set.retain(|&t| t >= 1 && t <= n);
    set.sort_unstable();
    set.dedup();
    set
}

/// `β` horizon of one sweep point: configured, or `n + τ_max`.
fn beta_horizon(cfg: &ExperimentConfig, n: usize) -> usize {
    cfg.beta_horizon.unwrap_or(n + tau_set(cfg, n).last().copied().unwrap_or(1))
}

/// Mixing coefficients at lag `τ + 1` for one sweep point.
#[derive(Debug, Clone, Copy)]
struct Cell {
    n: usize,
    tau: usize,
    eta: f64,
    beta_tau1: f64,
    phi_tau1: f64,
}

fn cell(cfg: &ExperimentConfig, n: usize) -> Result<Cell, LabError> {
    let tau = cfg.tau.tau(n);
    Ok(Cell {
        n,
        tau,
        eta: cfg.eta.eta(n),
        beta_tau1: cfg.chain.beta_coefficient(tau + 1, beta_horizon(cfg, n))?,
        phi_tau1: cfg.chain.phi_coefficient(tau + 1)?,
    })
}

fn comparator(cfg: &ExperimentConfig, samples: &[usize]) -> Result<OfflinePosterior, LabError> {
    Ok(match cfg.learner {
        LearnerSpec::Erm => erm_posterior(&cfg.loss, samples)?,
        LearnerSpec::Gibbs { gamma } => gibbs_posterior(&cfg.loss, samples, &cfg.prior, gamma)?,
    })
}

/// Whether the EWA bounds apply at `n`: the certified rate exceeds 1 and the
/// lag `τ + 1` lies inside the certified range.
fn ewa_applicable(rate: Option<GeometricRate>, n: usize, kmax: usize) -> Option<GeometricRate> {
    rate.filter(|r| r.is_super_geometric() && log_tau(n) < kmax && n > 1)
}

fn run_replication(
    cfg: &ExperimentConfig,
    mix: &MixingSetup,
    cell: Cell,
    seed: u64,
) -> Result<(BoundReport, RepExtra), LabError> {
    let loss = &cfg.loss;
    let d = cfg.chain.stationary_distribution();
    let Cell { n, tau, eta, .. } = cell;
    let taus = tau_set(cfg, n);
    let tau_max = *taus.last().expect("tau set is never empty");

    let learner = EwaState::new(cfg.prior.clone(), eta)?;
    let mut trace = run_game(&cfg.chain, loss, &learner, n, tau_max, seed)?;
    trace.config_hash = Some(cfg.hash.clone());
    let cmp = comparator(cfg, trace.training_samples())?;

    let reg = regret(&trace, &cmp)?;
    let gen = generalization_error(&cmp, &trace, loss, d)?;
    let kl = kl_divergence(&cmp.distribution, &cfg.prior)?;

    let mut checks: Vec<(&'static str, bool, f64, f64)> = Vec::new();
    let kappa_max = trace.max_kappa();
    checks.push(("stability", kappa_max <= trace.kappa_bound + tolerance::INEQUALITY, kappa_max, trace.kappa_bound));
    let rc = ewa_regret_check(&trace, &cmp, &cfg.prior, eta)?;
    checks.push(("ewa_regret", rc.holds, rc.lhs, rc.rhs));
    for &t in &taus {
        let ts = taushift_check(&trace, &cmp, loss, t)?;
        checks.push(("taushift", ts.holds, ts.lhs, ts.rhs));
        let gb = genbar_decomposition_check(&trace, &cmp, loss, d, t)?;
        checks.push(("genbar", gb.holds, gb.lhs, gb.rhs));
    }
    let max_round = trace.round_costs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    checks.push(("round_cost", max_round <= 2.0 * loss.b_ell(), max_round, 2.0 * loss.b_ell()));
    spot_checks(&trace.p_seq[0], &trace.p_seq[n], &mut checks)?;
    spot_checks(&cmp.distribution, &trace.p_seq[0], &mut checks)?;

    let kappa_sum = match cfg.kappa_mode {
        KappaMode::Theoretical => n as f64 * trace.kappa_bound,
        KappaMode::Measured => trace.kappa_sum(),
    };
    let (k_const, r_rate) = match ewa_applicable(mix.rate, n, cfg.kmax) {
        Some(r) => (r.k, r.r),
        None => (0.0, 0.0),
    };
    let params = BoundParams {
        n,
        tau,
        delta: cfg.delta,
        eta,
        g_h: loss.g_h(),
        g_z: loss.g_z(),
        r_h: loss.r_h(),
        r_z: loss.r_z(),
        b_ell: loss.b_ell(),
        kappa_sum,
        beta_tau1: cell.beta_tau1,
        phi_tau1: cell.phi_tau1,
        kl_comparator: kl,
        k_const,
        r_rate,
    };
    let applicable = ewa_applicable(mix.rate, n, cfg.kmax).is_some();
    let report = BoundReport {
        seed,
        n,
        tau,
        empirical_gen: gen,
        regret_observed: reg,
        thm41: bound_expected(&params, reg)?,
        thm42: bound_highprob(&params, reg)?,
        thm54: if applicable && eta > 0.0 { Some(bound_ewa(&params)?) } else { None },
        cor56: if applicable { Some(bound_etaind(&params)?) } else { None },
    };

    let violations = checks
        .iter()
        .filter(|c| !c.1)
        .map(|c| Violation { n, seed, check: c.0.to_string(), lhs: c.2, rhs: c.3 })
        .collect();
    let extra = RepExtra {
        eta,
        eta_opt: eta_opt(&params),
        kl,
        kappa_sum,
        kappa_max,
        checks: checks.iter().map(|c| (c.0, c.1)).collect(),
        violations,
    };
    Ok((report, extra))
}

/// The data-dependent rate minimizing the `kl + learning_rate` terms of the
/// EWA bound. Reported only; never fed back to the learner.
fn eta_opt(p: &BoundParams) -> f64 {
    let n = p.n as f64;
    let gr = p.g_h * p.r_h;
    let curvature = n * (p.b_ell * p.b_ell + 4.0 * gr * gr * n.ln());
    if curvature > 0.0 {
        (2.0 * p.kl_comparator / curvature).sqrt()
    } else {
        f64::INFINITY
    }
}

/// Pinsker, `W ≤ diam·TV` and primal/dual agreement on one pair.
fn spot_checks(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    checks: &mut Vec<(&'static str, bool, f64, f64)>,
) -> Result<(), LabError> {
    let pin = check_pinsker(p, q)?;
    checks.push(("pinsker", pin.holds, pin.tv, pin.bound));
    let wt = check_w1_tv(p, q)?;
    checks.push(("w1_tv", wt.holds, wt.w1, wt.bound));
    let dual = wasserstein1_dual(p, q)?.value;
    let gap = (wt.w1 - dual).abs();
    checks.push(("w1_duality", gap <= tolerance::LP, gap, tolerance::LP));
    Ok(())
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let r = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / r;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

fn fraction(flags: impl Iterator<Item = Option<bool>>) -> Option<f64> {
    let v: Vec<bool> = flags.flatten().collect();
    (!v.is_empty()).then(|| v.iter().filter(|&&b| b).count() as f64 / v.len() as f64)
}

/// Runs the sweep, writes `summary.csv`, `coverage.csv`, `mixing.csv` and
/// `manifest.json` to `opts.out_dir`, and returns the aggregates.
///
/// Invariant violations do not abort the run; they are collected, written
/// to the manifest and returned.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome, LabError> {
    let replications = opts.replications.unwrap_or(cfg.replications);
    if replications == 0 {
        return Err(LabError::Validation(crate::config::ValidationErrors(vec![
            "replications must be at least 1".into(),
        ])));
    }
    let seed0 = opts.seed.unwrap_or(cfg.seed);
    let mix = mixing_setup(cfg)?;

    let mut summary_rows: Vec<(BoundReport, RepExtra)> = Vec::new();
    let mut cov_rows = Vec::new();
    let mut violations = Vec::new();

    for &n in &cfg.ns {
        let cell = cell(cfg, n)?;
        let extras: Mutex<BTreeMap<u64, RepExtra>> = Mutex::new(BTreeMap::new());
        let cov = coverage(replications, seed0, |seed| {
            let (report, extra) = run_replication(cfg, &mix, cell, seed)?;
            extras.lock().unwrap().insert(seed, extra);
            Ok::<_, LabError>(report)
        })?;
        let extras = extras.into_inner().unwrap();
        violations.extend(extras.values().flat_map(|e| e.violations.iter().cloned()));

        let gens: Vec<f64> = cov.reports.iter().map(|r| r.empirical_gen).collect();
        let regs: Vec<f64> = cov.reports.iter().map(|r| r.regret_observed).collect();
        let (mean_gen, se_gen) = mean_se(&gens);
        let (mean_regret, se_regret) = mean_se(&regs);

        // expected-error bound at the mean regret and mean Σκ
        let kappa_mean =
            extras.values().map(|e| e.kappa_sum).sum::<f64>() / extras.len() as f64;
        let params = BoundParams {
            n,
            tau: cell.tau,
            delta: cfg.delta,
            eta: cell.eta,
            g_h: cfg.loss.g_h(),
            g_z: cfg.loss.g_z(),
            r_h: cfg.loss.r_h(),
            r_z: cfg.loss.r_z(),
            b_ell: cfg.loss.b_ell(),
            kappa_sum: kappa_mean,
            beta_tau1: cell.beta_tau1,
            phi_tau1: cell.phi_tau1,
            kl_comparator: 0.0,
            k_const: 0.0,
            r_rate: 0.0,
        };
        let thm41 = bound_expected(&params, mean_regret)?;
        cov_rows.push(CoverageRow {
            n,
            tau: cell.tau,
            eta: cell.eta,
            replications,
            seed_first: seed0,
            seed_last: seed0.wrapping_add(replications as u64 - 1),
            mean_gen,
            se_gen,
            mean_regret,
            se_regret,
            coverage_thm42: cov.fraction_thm42,
            coverage_thm54: cov.fraction_thm54,
            coverage_cor56: fraction(cov.reports.iter().map(BoundReport::holds_cor56)),
            bound_thm41: thm41.total,
            thm41_holds: mean_gen <= thm41.total + 2.0 * se_gen,
            beta_tau1: params.beta_tau1,
            phi_tau1: params.phi_tau1,
            log_clamped: cov.reports.iter().any(|r| r.thm42.log_clamped),
        });
        summary_rows.extend(cov.reports.into_iter().map(|r| {
            let e = extras[&r.seed].clone();
            (r, e)
        }));
    }

    fs::create_dir_all(&opts.out_dir).map_err(|source| LabError::Io { path: opts.out_dir.clone(), source })?;
    write_file(&opts.out_dir.join("summary.csv"), |w| write_summary(w, &summary_rows, seed0))?;
    write_file(&opts.out_dir.join("coverage.csv"), |w| write_coverage(w, &cov_rows))?;
    write_file(&opts.out_dir.join("mixing.csv"), |w| {
        mix.profile.write_csv(w).map_err(csv_to_io)
    })?;
    let manifest = manifest(cfg, &mix, replications, seed0, &violations);
    write_file(&opts.out_dir.join("manifest.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest)?;
        w.write_all(b"\n")
    })?;

    Ok(RunOutcome { out_dir: opts.out_dir.clone(), coverage: cov_rows, violations })
}

fn csv_to_io(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut std::io::BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<(), LabError> {
    let io = |source| LabError::Io { path: path.to_path_buf(), source };
    let mut w = std::io::BufWriter::new(fs::File::create(path).map_err(io)?);
    body(&mut w).map_err(io)?;
    w.flush().map_err(io)
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn flag(b: bool) -> String {
    b.to_string()
}

fn bound_cells(b: Option<&Bound>, names: &[&str], out: &mut Vec<String>) {
    for name in names {
        out.push(opt(b.and_then(|b| b.term(name))));
    }
    out.push(opt(b.map(|b| b.total)));
}

fn summary_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "n", "replication", "seed", "tau", "eta", "eta_opt", "gen", "regret", "regret_over_n",
        "kl_comparator", "kappa_sum", "kappa_max",
    ]
    .map(String::from)
    .to_vec();
    for (prefix, names) in [
        ("thm41", &THM41_TERMS[..]),
        ("thm42", &THM42_TERMS[..]),
        ("thm54", &EWA_TERMS[..]),
        ("cor56", &EWA_TERMS[..]),
    ] {
        h.extend(names.iter().map(|t| format!("{prefix}_{t}")));
        h.push(format!("{prefix}_total"));
    }
    h.extend(
        [
            "thm42_log_clamped", "thm42_holds", "thm54_holds", "cor56_holds", "stability_ok",
            "ewa_regret_ok", "taushift_ok", "genbar_ok", "round_cost_ok", "spot_checks_ok",
        ]
        .map(String::from),
    );
    h
}

fn write_summary<W: Write>(w: W, rows: &[(BoundReport, RepExtra)], seed0: u64) -> std::io::Result<()> {
    let mut csv = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    csv.write_record(summary_header()).map_err(csv_to_io)?;
    for (r, e) in rows {
        let all = |names: &[&str]| e.checks.iter().filter(|c| names.contains(&c.0)).all(|c| c.1);
        let mut rec = vec![
            r.n.to_string(),
            r.seed.wrapping_sub(seed0).to_string(),
            r.seed.to_string(),
            r.tau.to_string(),
            fmt_f64(e.eta),
            fmt_f64(e.eta_opt),
            fmt_f64(r.empirical_gen),
            fmt_f64(r.regret_observed),
            fmt_f64(r.regret_observed / r.n as f64),
            fmt_f64(e.kl),
            fmt_f64(e.kappa_sum),
            fmt_f64(e.kappa_max),
        ];
        bound_cells(Some(&r.thm41), &THM41_TERMS, &mut rec);
        bound_cells(Some(&r.thm42), &THM42_TERMS, &mut rec);
        bound_cells(r.thm54.as_ref(), &EWA_TERMS, &mut rec);
        bound_cells(r.cor56.as_ref(), &EWA_TERMS, &mut rec);
        rec.push(flag(r.thm42.log_clamped));
        rec.push(flag(r.holds_thm42()));
        rec.push(r.holds_thm54().map(flag).unwrap_or_default());
        rec.push(r.holds_cor56().map(flag).unwrap_or_default());
        rec.push(flag(all(&["stability"])));
        rec.push(flag(all(&["ewa_regret"])));
        rec.push(flag(all(&["taushift"])));
        rec.push(flag(all(&["genbar"])));
        rec.push(flag(all(&["round_cost"])));
        rec.push(flag(all(&["pinsker", "w1_tv", "w1_duality"])));
        csv.write_record(rec).map_err(csv_to_io)?;
    }
    csv.flush()
}

fn write_coverage<W: Write>(w: W, rows: &[CoverageRow]) -> std::io::Result<()> {
    let mut csv = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    csv.write_record([
        "n", "tau", "eta", "replications", "seed_first", "seed_last", "mean_gen", "se_gen",
        "mean_regret", "se_regret", "coverage_thm42", "coverage_thm54", "coverage_cor56",
        "bound_thm41", "thm41_holds", "beta_tau1", "phi_tau1", "log_clamped",
    ])
    .map_err(csv_to_io)?;
    for r in rows {
        csv.write_record([
            r.n.to_string(),
            r.tau.to_string(),
            fmt_f64(r.eta),
            r.replications.to_string(),
            r.seed_first.to_string(),
            r.seed_last.to_string(),
            fmt_f64(r.mean_gen),
            fmt_f64(r.se_gen),
            fmt_f64(r.mean_regret),
            fmt_f64(r.se_regret),
            fmt_f64(r.coverage_thm42),
            opt(r.coverage_thm54),
            opt(r.coverage_cor56),
            fmt_f64(r.bound_thm41),
            flag(r.thm41_holds),
            fmt_f64(r.beta_tau1),
            fmt_f64(r.phi_tau1),
            flag(r.log_clamped),
        ])
        .map_err(csv_to_io)?;
    }
    csv.flush()
}

#[derive(Serialize)]
struct Manifest<'a> {
    name: &'a str,
    config_hash: &'a str,
    seed0: u64,
    replications: usize,
    n: &'a [usize],
    /// `[n, first seed, last seed]` per sweep point.
    seeds: Vec<[u64; 3]>,
    prng: &'static str,
    versions: BTreeMap<&'static str, &'static str>,
    eta_rule: String,
    tau_rule: String,
    kappa_mode: String,
    delta: f64,
    kmax: usize,
    beta_horizon: usize,
    geometric_fit: Option<otb_core::mixing::GeometricFit>,
    certified_rate: Option<GeometricRate>,
    certified_lags: String,
    ewa_bounds_applicable: bool,
    invariant_violations: &'a [Violation],
    timestamp_unix: u64,
}

fn manifest<'a>(
    cfg: &'a ExperimentConfig,
    mix: &MixingSetup,
    replications: usize,
    seed0: u64,
    violations: &'a [Violation],
) -> Manifest<'a> {
    let last = seed0.wrapping_add(replications as u64 - 1);
    Manifest {
        name: &cfg.name,
        config_hash: &cfg.hash,
        seed0,
        replications,
        n: &cfg.ns,
        seeds: cfg.ns.iter().map(|&n| [n as u64, seed0, last]).collect(),
        prng: PRNG_NAME,
        versions: BTreeMap::from([
            ("otb-core", otb_core::VERSION),
            ("otb-lab", env!("CARGO_PKG_VERSION")),
        ]),
        eta_rule: format!("{:?}", cfg.eta),
        tau_rule: format!("{:?}", cfg.tau),
        kappa_mode: format!("{:?}", cfg.kappa_mode),
        delta: cfg.delta,
        kmax: cfg.kmax,
        beta_horizon: mix.horizon,
        geometric_fit: mix.profile.geometric_fit,
        certified_rate: mix.rate,
        certified_lags: format!("1..={}", cfg.kmax),
        ewa_bounds_applicable: mix.rate.is_some_and(|r| r.is_super_geometric()),
        invariant_violations: violations,
        timestamp_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    }
}
