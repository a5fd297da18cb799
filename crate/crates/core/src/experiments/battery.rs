//! The acceptance battery: twelve criteria, each a group of comparison
//! reports with a runtime budget.

use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use super::arith::{
    avoidance_experiment, delta_prime_experiment, fair_coin_prime_experiment, fair_coin_quasiprime_experiment,
    nonprime_subsequence_experiment, power_of_two_primes, quasiprime_experiment, sn_prime_experiment, sn_prime_sweep,
    AvoidanceConfig, QuasiprimeRange,
};
use super::limits::{
    char_func_suite, clt_experiment, delta_chi_square_experiment, delta_llt_experiment, delta_moments_experiment,
    divisibility_suite, exact_law_experiment, fair_coin_llt_suite, llt_suite, poisson_identity_experiment,
    theta_bound_scan,
};
use super::paths::{
    amplitude_count_experiment, amplitude_transfer_experiment, eigen_asymptotic_experiment,
    eigen_closed_form_experiment, eigen_monotonicity_experiment, gap_experiment, gap_probability_scaling,
    lil_experiment, ou_spectrum_experiment, PathScan, SpectrumConfig, EIGEN_GRID, MONOTONE_GRID,
};
use super::report::{canonical_batch, ComparisonReport, Verdict};
use crate::calibration::{frozen, DIVISIBILITY_MODULI, HEADROOM, QUASIPRIME_ZETAS};
use crate::error::Result;
use crate::model::{exact_law, ModelSpec};
use crate::params;
use crate::primes::{sieve, PrimeSet, PrimeTable};
use crate::stochastic::Monitoring;

/// Master seed and worker count shared by every criterion.
#[derive(Clone, Copy, Debug)]
pub struct BatteryConfig {
    pub seed: u64,
    pub workers: usize,
}

/// Result of one acceptance criterion.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    /// All checks passed and the runtime stayed within budget.
    pub passed: bool,
    pub checks_passed: bool,
    pub elapsed_ms: u64,
    pub budget_ms: u64,
    pub summary: String,
    pub reports: Vec<ComparisonReport>,
}

impl Outcome {
    /// `[PASS] 3 llt-rate: ... (12.3 s / 60 s)`
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {}: {} ({:.1} s / {} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.summary,
            self.elapsed_ms as f64 / 1000.0,
            self.budget_ms / 1000
        )
    }
}

fn outcome(id: u8, name: &'static str, budget_s: u64, start: Instant, reports: Vec<ComparisonReport>, summary: String) -> Outcome {
    let elapsed_ms = start.elapsed().as_millis() as u64;
    let checks_passed = reports.iter().all(ComparisonReport::passed);
    let budget_ms = budget_s * 1000;
    Outcome {
        id,
        name,
        passed: checks_passed && elapsed_ms <= budget_ms,
        checks_passed,
        elapsed_ms,
        budget_ms,
        summary,
        reports,
    }
}

fn failures(reports: &[ComparisonReport]) -> String {
    let bad: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| format!("{} {} (est {:.6e}, pred {:.6e})", r.experiment, serde_json::to_string(&r.params).unwrap_or_default(), r.estimate, r.predicted))
        .collect();
    if bad.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", bad.join(", "))
    }
}

pub fn exact_law_sanity(_cfg: &BatteryConfig) -> Result<Outcome> {
    let start = Instant::now();
    let law = exact_law(&ModelSpec::fair_coin(), 2)?.probabilities();
    let two = ComparisonReport::exact(
        "exact-law-fair-coin-2",
        params! {"n" => 2},
        law.get(1).copied().unwrap_or(f64::NAN),
        0.5,
        "law of B_2 equals (1/4, 1/2, 1/4) exactly",
        law == [0.25, 0.5, 0.25],
    );
    let mut reports = vec![two];
    for n in [100, 1000, 2000] {
        reports.push(exact_law_experiment(&ModelSpec::cramer(), n)?);
    }
    let worst = reports[1..]
        .iter()
        .map(|r| r.details["variance_error"].as_f64().unwrap_or(f64::NAN) / r.details["B_n"].as_f64().unwrap_or(1.0))
        .fold(0.0, f64::max);
    let summary = format!("fair coin n=2 exact; max relative variance error {worst:.2e}{}", failures(&reports));
    Ok(outcome(1, "exact-law", 1, start, reports, summary))
}

pub fn char_func_bounds(_cfg: &BatteryConfig) -> Result<Outcome> {
    let start = Instant::now();
    let reports = char_func_suite(&ModelSpec::cramer(), 1000, 200, 0.005)?;
    let summary = format!(
        "modulus ratio max {:.6}, phase ratio max {:.4}{}",
        reports[0].estimate,
        reports[1].estimate,
        failures(&reports)
    );
    Ok(outcome(2, "charfunc-bounds", 5, start, reports, summary))
}

pub fn llt_rate(_cfg: &BatteryConfig) -> Result<Outcome> {
    let start = Instant::now();
    let k = frozen().llt.value;
    let reports = llt_suite(&ModelSpec::cramer(), &[500, 1000, 2000, 4000], 1.0, Some(k))?;
    let vals: Vec<String> = reports.iter().map(|r| format!("{:.4}", r.estimate)).collect();
    let summary = format!("K = {k:.4}; scaled E(n) at 500..4000 = [{}]{}", vals.join(", "), failures(&reports));
    Ok(outcome(3, "llt-rate", 60, start, reports, summary))
}

pub fn delta_law_suite(cfg: &BatteryConfig) -> Result<Outcome> {
    let start = Instant::now();
    let mut reports = Vec::new();
    for k in [1, 5, 20, 60] {
        reports.push(delta_moments_experiment(k)?);
    }
    reports.push(delta_chi_square_experiment(10, 1_000_000, cfg.seed, cfg.workers)?);
    let bound = HEADROOM * frozen().delta_llt.value;
    for k in [50, 200] {
        reports.push(delta_llt_experiment(k, bound)?);
    }
    let summary = format!(
        "chi-square p = {:.4}; k sup error at k=50,200 = {:.4}, {:.4} (bound {bound:.4}){}",
        reports[4].estimate,
        reports[5].estimate,
        reports[6].estimate,
        failures(&reports)
    );
    Ok(outcome(4, "delta-law", 30, start, reports, summary))
}

pub fn divisibility(_cfg: &BatteryConfig) -> Result<Outcome> {
    let start = Instant::now();
    let mut reports = vec![poisson_identity_experiment(3, 100, 1e-12)?, poisson_identity_experiment(17, 1000, 1e-12)?];
    let bound = HEADROOM * frozen().fair_divisibility.value;
    reports.push(divisibility_suite(&ModelSpec::fair_coin(), &[100, 1000, 10_000], &DIVISIBILITY_MODULI, bound)?);
    reports.push(theta_bound_scan(&[100, 1000, 10_000], 3.0)?);
    let summary = format!(
        "Poisson differences {:.1e}, {:.1e}; fair-coin scaled error max {:.3e} (bound {bound:.3e}); theta bound ratio max {:.4} (K = 3){}",
        reports[0].details["difference"].as_f64().unwrap_or(f64::NAN),
        reports[1].details["difference"].as_f64().unwrap_or(f64::NAN),
        reports[2].estimate,
        reports[3].estimate,
        failures(&reports)
    );
    Ok(outcome(5, "divisibility", 120, start, reports, summary))
}

pub fn sturm_liouville_suite(_cfg: &BatteryConfig) -> Result<Outcome> {
    let start = Instant::now();
    let reports = vec![
        eigen_closed_form_experiment(EIGEN_GRID)?,
        eigen_asymptotic_experiment(0.05, EIGEN_GRID, 0.01)?,
        eigen_monotonicity_experiment(MONOTONE_GRID.0, MONOTONE_GRID.1, MONOTONE_GRID.2, EIGEN_GRID)?,
    ];
    let summary = format!(
        "lambda(1) = {:.10}, psi deviation {:.1e}; lambda(0.05) ratio {:.5}; min drop {:.3e}{}",
        reports[0].estimate,
        reports[0].details["eigenfunction_deviation"].as_f64().unwrap_or(f64::NAN),
        reports[1].estimate,
        reports[2].estimate,
        failures(&reports)
    );
    Ok(outcome(6, "sturm-liouville", 30, start, reports, summary))
}

pub fn ou_spectrum(cfg: &BatteryConfig) -> Result<Outcome> {
    let start = Instant::now();
    let r = ou_spectrum_experiment(&SpectrumConfig::default(), cfg.seed, cfg.workers)?;
    let ratios: Vec<String> = r.details["rows"]
        .as_array()
        .map(|rows| {
            rows.iter()
                .map(|row| format!("z={}: {:.4}", row["z"], row["ratio_to_half_lambda"].as_f64().unwrap_or(f64::NAN)))
                .collect()
        })
        .unwrap_or_default();
    let summary = format!(
        "convention {}; slope / (lambda/2): {}",
        r.details["convention"].as_str().unwrap_or("?"),
        ratios.join(", ")
    );
    let reports = vec![r];
    let summary = summary + &failures(&reports);
    Ok(outcome(7, "ou-spectrum", 300, start, reports, summary))
}

fn table(limit: u64) -> Result<PrimeTable> {
    sieve(limit)
}

pub fn sn_prime(cfg: &BatteryConfig) -> Result<Outcome> {
    let start = Instant::now();
    let t = table(10_000)?;
    let k = HEADROOM * frozen().sn_prime.value;
    let mut reports = sn_prime_experiment(3000, 1.0, k, 100_000, cfg.seed, cfg.workers, &t)?;
    let grid: Vec<u64> = (1..=10).map(|i| 500 * i).collect();
    reports.push(sn_prime_sweep(&grid, 0.24, 0.8, &t)?);
    let summary = format!(
        "n=3000 scaled |exact - analytic| {:.3e} (bound {k:.3e}); MC {:.5} vs exact {:.5}; density fraction {:.2}{}",
        reports[0].details["scaled_difference"].as_f64().unwrap_or(f64::NAN),
        reports[1].estimate,
        reports[1].predicted,
        reports[2].estimate,
        failures(&reports)
    );
    Ok(outcome(8, "sn-prime", 180, start, reports, summary))
}

pub fn quasiprime(cfg: &BatteryConfig) -> Result<Outcome> {
    let start = Instant::now();
    let t = table(100_000)?;
    let mut reports = vec![quasiprime_experiment(100_000, 10.0, QuasiprimeRange::default(), 10_000, cfg.seed, cfg.workers, &t)?];
    let c0 = HEADROOM * frozen().fair_quasiprime.value;
    for z in QUASIPRIME_ZETAS {
        reports.extend(fair_coin_quasiprime_experiment(100_000, z, c0, 10_000, cfg.seed, cfg.workers, &t)?);
    }
    let summary = format!(
        "S'_n 10-quasiprime frequency / (e^-gamma / ln 10) = {:.4}; fair-coin scaled gaps {} (bound {c0:.4}){}",
        reports[0].estimate / reports[0].predicted,
        reports
            .iter()
            .filter(|r| r.experiment == "fair-coin-quasiprime")
            .map(|r| format!("{:.4}", r.details["scaled_difference"].as_f64().unwrap_or(f64::NAN)))
            .collect::<Vec<_>>()
            .join(", "),
        failures(&reports)
    );
    Ok(outcome(9, "quasiprime", 180, start, reports, summary))
}

pub fn avoidance(cfg: &BatteryConfig) -> Result<Outcome> {
    let start = Instant::now();
    let t = table(100_000)?;
    let all = PrimeSet::all(&t);
    let mut reports = Vec::new();
    for k in [20, 50] {
        reports.push(delta_prime_experiment(k, &all, "all primes", 1_000_000, cfg.seed, cfg.workers)?);
    }
    let sparse = power_of_two_primes(&t, t.limit())?;
    let acfg = AvoidanceConfig::cubes(20, HEADROOM * frozen().avoidance.value);
    reports.push(avoidance_experiment(&acfg, &sparse, "next prime >= 2^j")?);
    reports.push(avoidance_experiment(&acfg, &all, "all primes")?);
    let summary = format!(
        "MC vs exact at k=20: {:.5}/{:.5}, k=50: {:.5}/{:.5}; sparse set max k^beta P = {:.4} (K {:.4}) {:?}; all primes {:?}{}",
        reports[0].estimate,
        reports[0].predicted,
        reports[1].estimate,
        reports[1].predicted,
        reports[2].estimate,
        acfg.k_bound,
        reports[2].verdict,
        reports[3].verdict,
        failures(&reports)
    );
    let mut o = outcome(10, "avoidance", 120, start, reports, summary);
    // the sparse set must satisfy the hypothesis for the decay check to count
    if o.reports[2].verdict != Verdict::Pass {
        o.checks_passed = false;
        o.passed = false;
    }
    Ok(o)
}

pub fn gaps(cfg: &BatteryConfig) -> Result<Outcome> {
    let start = Instant::now();
    let g = frozen().gap_scaling.value;
    let mut reports = vec![gap_probability_scaling(1.0, &[1_000, 10_000, 100_000, 1_000_000], g / HEADROOM, g * HEADROOM)?];
    reports.extend(gap_experiment(&PathScan::default(), 0.5, cfg.seed, cfg.workers)?);
    let summary = format!(
        "m P(E_m) in [{:.4}, {:.4}]; median max gap ratio {:.4} (all jumps: {:.4}); median count rate ratio {:.4}{}",
        reports[0].details["min"].as_f64().unwrap_or(f64::NAN),
        reports[0].estimate,
        reports[1].estimate,
        reports[1].details["median_full"].as_f64().unwrap_or(f64::NAN),
        reports[2].estimate,
        failures(&reports)
    );
    Ok(outcome(11, "gaps", 300, start, reports, summary))
}

/// Every experiment at reduced size.
pub fn smoke_reports(seed: u64, workers: usize) -> Result<Vec<ComparisonReport>> {
    let cramer = ModelSpec::cramer();
    let fair = ModelSpec::fair_coin();
    let t = table(100_000)?;
    let c = frozen();
    let mut out = vec![exact_law_experiment(&cramer, 200)?];
    out.extend(char_func_suite(&cramer, 200, 20, 0.005)?);
    out.extend(llt_suite(&cramer, &[300, 600], 1.0, None)?);
    out.extend(fair_coin_llt_suite(&[100, 1000], HEADROOM * c.fair_llt.value));
    out.push(clt_experiment(&cramer, 1000, 0.02)?);
    out.push(divisibility_suite(&fair, &[100, 1000], &DIVISIBILITY_MODULI, HEADROOM * c.fair_divisibility.value)?);
    out.push(divisibility_suite(&cramer, &[100, 1000], &DIVISIBILITY_MODULI, HEADROOM * c.cramer_divisibility.value)?);
    out.push(poisson_identity_experiment(3, 100, 1e-12)?);
    out.push(theta_bound_scan(&[100, 1000], 3.0)?);
    out.push(delta_moments_experiment(5)?);
    out.push(delta_chi_square_experiment(10, 20_000, seed, workers)?);
    out.push(delta_llt_experiment(50, HEADROOM * c.delta_llt.value)?);
    out.push(eigen_closed_form_experiment(2001)?);
    out.push(eigen_asymptotic_experiment(0.5, 2001, 0.5)?);
    out.push(eigen_monotonicity_experiment(0.5, 2.0, 4, 2001)?);
    let spec_cfg = SpectrumConfig {
        z_grid: vec![1.0, 2.0],
        times: vec![1.0, 2.0],
        dt: 0.05,
        particles: 2000,
        monitoring: Monitoring::BridgeCorrected,
        tol: 0.5,
    };
    out.push(ou_spectrum_experiment(&spec_cfg, seed, workers)?);
    out.extend(sn_prime_experiment(1000, 1.0, HEADROOM * c.sn_prime.value, 2000, seed, workers, &t)?);
    out.push(sn_prime_sweep(&[500, 1000], 0.24, 0.8, &t)?);
    out.push(quasiprime_experiment(10_000, 5.0, QuasiprimeRange::default(), 500, seed, workers, &t)?);
    out.extend(fair_coin_quasiprime_experiment(10_000, 5.0, HEADROOM * c.fair_quasiprime.value, 500, seed, workers, &t)?);
    out.extend(nonprime_subsequence_experiment(&[512, 10_000], 5.0, 500, seed, workers, &t)?);
    out.push(fair_coin_prime_experiment(10_000, HEADROOM * c.fair_prime.value, 500, seed, workers, &t)?);
    let all = PrimeSet::all(&t);
    out.push(delta_prime_experiment(20, &all, "all primes", 5000, seed, workers)?);
    let sparse = power_of_two_primes(&t, t.limit())?;
    out.push(avoidance_experiment(&AvoidanceConfig::cubes(8, HEADROOM * c.avoidance.value), &sparse, "next prime >= 2^j")?);
    out.push(gap_probability_scaling(1.0, &[1000, 10_000], c.gap_scaling.value / HEADROOM, c.gap_scaling.value * HEADROOM)?);
    let scan = PathScan { horizon: 100_000, seeds: 3 };
    out.extend(gap_experiment(&scan, 0.5, seed, workers)?);
    out.push(lil_experiment(&scan, seed, workers)?);
    out.push(amplitude_transfer_experiment(4, 1.0, 1.0, 100, 1000, 0.05, seed, workers)?);
    out.push(amplitude_count_experiment(1.0, 1.0, &[5, 10], 100, 0.05, seed, workers)?);
    Ok(out)
}

pub fn determinism(cfg: &BatteryConfig) -> Result<Outcome> {
    let start = Instant::now();
    let a = smoke_reports(cfg.seed, 1)?;
    let other = if cfg.workers > 1 { cfg.workers } else { 3 };
    let b = smoke_reports(cfg.seed, other)?;
    let (ca, cb) = (canonical_batch(&a), canonical_batch(&b));
    let differing: Vec<&str> = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| x.canonical_json() != y.canonical_json())
        .map(|(x, _)| x.experiment.as_str())
        .collect();
    let same = ca == cb;
    let report = ComparisonReport::exact(
        "determinism",
        params! {"workers" => [1, other], "experiments" => a.len()},
        differing.len() as f64,
        0.0,
        "canonical reports identical across worker counts",
        same,
    )
    .with_seed(cfg.seed, 0)
    .with_details(json!({"differing": differing, "bytes": ca.len()}));
    let summary = format!("{} reports compared at 1 and {other} workers, {} differ", a.len(), differing.len());
    Ok(outcome(12, "determinism", 60, start, vec![report], summary))
}

pub type CriterionFn = fn(&BatteryConfig) -> Result<Outcome>;

/// `(id, name, function)` for all twelve criteria.
pub const CRITERIA: [(u8, &str, CriterionFn); 12] = [
    (1, "exact-law", exact_law_sanity),
    (2, "charfunc-bounds", char_func_bounds),
    (3, "llt-rate", llt_rate),
    (4, "delta-law", delta_law_suite),
    (5, "divisibility", divisibility),
    (6, "sturm-liouville", sturm_liouville_suite),
    (7, "ou-spectrum", ou_spectrum),
    (8, "sn-prime", sn_prime),
    (9, "quasiprime", quasiprime),
    (10, "avoidance", avoidance),
    (11, "gaps", gaps),
    (12, "determinism", determinism),
];

/// Runs the selected criteria (all when `only` is empty), in order.
pub fn run_battery(cfg: &BatteryConfig, only: &[u8]) -> Vec<(u8, &'static str, Result<Outcome>)> {
    CRITERIA
        .iter()
        .filter(|(id, _, _)| only.is_empty() || only.contains(id))
        .map(|&(id, name, f)| (id, name, f(cfg)))
        .collect()
}
