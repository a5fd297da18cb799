//! Arithmetic experiments: primality and quasi-primality of the walk, and
//! prime avoidance by the jump instants of the fair-coin walk.

use std::time::Instant;

use rand::RngCore;
use serde_json::json;

use super::limits::sample_delta;
use super::mc::mc_estimate;
use super::report::{ComparisonReport, Verdict};
use crate::analytic::{
    delta_prime_hit_prob, exact_prime_prob, fair_coin_quasiprime_prob, quasiprime_asymptotic, sn_prime_estimate,
    zeta,
};
use crate::error::{domain, Result};
use crate::model::{moments, ModelSpec};
use crate::params;
use crate::primes::{is_quasiprime, PrimeSet, PrimeTable};
use crate::rng::Rng64;
use crate::stats::binomial_sigma;

fn ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

fn need_table(table: &PrimeTable, upto: u64) -> Result<()> {
    if table.limit() < upto {
        return Err(domain(format!("prime table reaches {}, need {upto}", table.limit())));
    }
    Ok(())
}

/// `B_n ~ Bin(n, 1/2)` from `n` random bits.
pub fn sample_fair_coin_sum(n: u64, r: &mut Rng64) -> u64 {
    let mut s = 0u64;
    for _ in 0..n / 64 {
        s += r.next_u64().count_ones() as u64;
    }
    let rest = n % 64;
    if rest > 0 {
        s += (r.next_u64() & ((1u64 << rest) - 1)).count_ones() as u64;
    }
    s
}

/// Exact `P{S_n prime}` against the Gaussian main term, and a Monte Carlo
/// frequency against the exact value.
///
/// The first rule is `|exact - analytic| <= k (ln n)^{3/2} / sqrt n`; the
/// second `|MC - exact| <= 4 sigma`.
pub fn sn_prime_experiment(
    n: u64,
    b: f64,
    k: f64,
    replicas: u64,
    seed: u64,
    workers: usize,
    table: &PrimeTable,
) -> Result<Vec<ComparisonReport>> {
    let spec = ModelSpec::cramer();
    let start = Instant::now();
    let exact = exact_prime_prob(&spec, n, table)?;
    let est = sn_prime_estimate(&spec, n, b, table)?;
    let tol = k * est.error_scale;
    let analytic = ComparisonReport::exact(
        "sn-prime-analytic",
        params! {"n" => n, "b" => b, "K" => k},
        exact,
        est.value,
        "|exact - analytic| <= K (ln n)^{3/2} / sqrt n",
        (exact - est.value).abs() <= tol,
    )
    .with_details(json!({
        "difference": exact - est.value, "tolerance": tol,
        "scaled_difference": (exact - est.value).abs() / est.error_scale,
        "half_width": est.half_width,
    }))
    .with_elapsed(ms(start));

    let table_w = spec.weight_table(n)?;
    need_table(table, n)?;
    let mc = mc_estimate("sn-prime-mc", params! {"n" => n}, replicas, seed, workers, |r, _| {
        table.is_prime(table_w.sample_sum(r))
    })?;
    let sigma = binomial_sigma(exact, replicas);
    let mc_report = ComparisonReport::from_mc(
        &mc,
        exact,
        "|MC - exact| <= 4 sigma",
        (mc.estimate - exact).abs() <= 4.0 * sigma,
    )
    .with_details(json!({ "sigma": sigma }));
    Ok(vec![analytic, mc_report])
}

/// Fraction of `n` in the grid with `(ln n) P{S_n prime} >= threshold`.
pub fn sn_prime_sweep(n_grid: &[u64], threshold: f64, target: f64, table: &PrimeTable) -> Result<ComparisonReport> {
    let start = Instant::now();
    let spec = ModelSpec::cramer();
    let mut rows = Vec::new();
    let mut hits = 0usize;
    for &n in n_grid {
        let v = exact_prime_prob(&spec, n, table)? * (n as f64).ln();
        hits += (v >= threshold) as usize;
        rows.push(json!({"n": n, "log_n_times_prob": v}));
    }
    let frac = hits as f64 / n_grid.len().max(1) as f64;
    Ok(ComparisonReport::exact(
        "sn-prime-density",
        params! {"n_grid" => n_grid, "threshold" => threshold},
        frac,
        target,
        "fraction of n with (ln n) P{S_n prime} >= threshold is >= target",
        frac >= target,
    )
    .with_details(json!({ "rows": rows }))
    .with_elapsed(ms(start)))
}

/// Admissible range `zeta_0 <= zeta <= exp(c ln n / ln ln n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuasiprimeRange {
    pub zeta0: f64,
    pub c: f64,
}

impl Default for QuasiprimeRange {
    fn default() -> Self {
        QuasiprimeRange { zeta0: 3.0, c: 0.5 }
    }
}

impl QuasiprimeRange {
    pub fn upper(&self, n: u64) -> f64 {
        let l = (n as f64).ln();
        (self.c * l / l.ln()).exp()
    }

    pub fn check(&self, n: u64, zeta: f64) -> Result<()> {
        if n < 16 || !(zeta >= self.zeta0) || zeta > self.upper(n) {
            return Err(domain(format!(
                "zeta = {zeta} outside [{}, {:.4}] at n = {n}",
                self.zeta0,
                self.upper(n)
            )));
        }
        Ok(())
    }
}

/// Monte Carlo `P{S'_n is zeta-quasiprime}`, `S'_n = xi_8 + ... + xi_n`,
/// against the bracket `[0.8, 1.5] e^{-gamma} / ln zeta`.
pub fn quasiprime_experiment(
    n: u64,
    zeta_v: f64,
    range: QuasiprimeRange,
    replicas: u64,
    seed: u64,
    workers: usize,
    table: &PrimeTable,
) -> Result<ComparisonReport> {
    range.check(n, zeta_v)?;
    need_table(table, n)?;
    let spec = ModelSpec::cramer_from(8)?;
    let w = spec.weight_table(n)?;
    let target = quasiprime_asymptotic(zeta_v)?;
    let p = params! {"n" => n, "zeta" => zeta_v, "zeta0" => range.zeta0, "c" => range.c};
    let mc = mc_estimate("quasiprime", p, replicas, seed, workers, |r, _| {
        is_quasiprime(w.sample_sum(r), zeta_v, table).expect("table covers the support")
    })?;
    let ok = mc.estimate >= 0.8 * target && mc.estimate <= 1.5 * target;
    Ok(ComparisonReport::from_mc(&mc, target, "0.8 e^{-gamma}/ln zeta <= estimate <= 1.5 e^{-gamma}/ln zeta", ok)
        .with_details(json!({"ratio": mc.estimate / target})))
}

/// Fair-coin quasi-primality: exact `P{P^-(B_n) > zeta}` within
/// `bound / ln^2 zeta` of `e^{-gamma}/ln zeta`, plus a Monte Carlo
/// frequency within 4 sigma of the exact value.
pub fn fair_coin_quasiprime_experiment(
    n: u64,
    zeta_v: f64,
    bound: f64,
    replicas: u64,
    seed: u64,
    workers: usize,
    table: &PrimeTable,
) -> Result<Vec<ComparisonReport>> {
    let start = Instant::now();
    need_table(table, n)?;
    let exact = fair_coin_quasiprime_prob(n, zeta_v, table)?;
    let target = quasiprime_asymptotic(zeta_v)?;
    let l2 = zeta_v.ln().powi(2);
    let exact_report = ComparisonReport::exact(
        "fair-coin-quasiprime",
        params! {"n" => n, "zeta" => zeta_v, "C0" => bound},
        exact,
        target,
        "|P{P^-(B_n) > zeta} - e^{-gamma}/ln zeta| <= C0 / ln^2 zeta",
        (exact - target).abs() <= bound / l2,
    )
    .with_details(json!({"scaled_difference": (exact - target).abs() * l2}))
    .with_elapsed(ms(start));
    let mc = mc_estimate("fair-coin-quasiprime-mc", params! {"n" => n, "zeta" => zeta_v}, replicas, seed, workers, |r, _| {
        is_quasiprime(sample_fair_coin_sum(n, r), zeta_v, table).expect("table covers the support")
    })?;
    let sigma = binomial_sigma(exact, replicas);
    let mc_report =
        ComparisonReport::from_mc(&mc, exact, "|MC - exact| <= 4 sigma", (mc.estimate - exact).abs() <= 4.0 * sigma);
    Ok(vec![exact_report, mc_report])
}

/// `k ln ln x / ln x`.
fn loglog_bound(k: f64, x: f64) -> f64 {
    k * x.ln().ln() / x.ln()
}

/// Monte Carlo `P{S'_{n_k} prime}` along a schedule against
/// `k ln ln mu / ln mu`, `mu` the mean of `S'_{n_k}`, with the partial
/// sums of the bounds.
pub fn nonprime_subsequence_experiment(
    schedule: &[u64],
    k: f64,
    replicas: u64,
    seed: u64,
    workers: usize,
    table: &PrimeTable,
) -> Result<Vec<ComparisonReport>> {
    let spec = ModelSpec::cramer_from(8)?;
    let mut out = Vec::new();
    let mut partial = 0.0;
    for &n in schedule {
        need_table(table, n)?;
        let mu = moments(&spec, n)?.mean;
        if mu <= std::f64::consts::E {
            return Err(domain(format!("schedule point n = {n} has mean {mu:.3} <= e")));
        }
        let w = spec.weight_table(n)?;
        let mc = mc_estimate("nonprime-subsequence", params! {"n" => n}, replicas, seed, workers, |r, _| {
            table.is_prime(w.sample_sum(r))
        })?;
        let bound = loglog_bound(k, mu);
        partial += bound;
        out.push(
            ComparisonReport::from_mc(&mc, bound, "P{S'_n prime} <= K ln ln mu / ln mu", mc.estimate <= bound)
                .with_details(json!({"mu": mu, "partial_bound_sum": partial})),
        );
    }
    Ok(out)
}

/// Exact `P{B_n prime}` for the fair coin.
pub fn fair_coin_prime_prob(n: u64, table: &PrimeTable) -> Result<f64> {
    need_table(table, n)?;
    Ok(table.primes_upto(n).map(|p| crate::analytic::binomial_half_pmf(n, p)).sum())
}

/// Monte Carlo `P{B_n prime}` against `k ln ln n / ln n`.
pub fn fair_coin_prime_experiment(
    n: u64,
    k: f64,
    replicas: u64,
    seed: u64,
    workers: usize,
    table: &PrimeTable,
) -> Result<ComparisonReport> {
    need_table(table, n)?;
    let mc = mc_estimate("fair-coin-prime", params! {"n" => n}, replicas, seed, workers, |r, _| {
        table.is_prime(sample_fair_coin_sum(n, r))
    })?;
    let bound = loglog_bound(k, n as f64);
    Ok(ComparisonReport::from_mc(&mc, bound, "P{B_n prime} <= K ln ln n / ln n", mc.estimate <= bound))
}

/// Exact `P{Delta_k in P}` against the Monte Carlo frequency.
pub fn delta_prime_experiment(
    k: u64,
    set: &PrimeSet,
    set_name: &str,
    replicas: u64,
    seed: u64,
    workers: usize,
) -> Result<ComparisonReport> {
    let start = Instant::now();
    let exact = delta_prime_hit_prob(k, set, 1e-15)?;
    let exact_ms = ms(start);
    let cover = set.coverage();
    let mc = mc_estimate("delta-prime-hit", params! {"k" => k, "set" => set_name}, replicas, seed, workers, |r, _| {
        let m = sample_delta(k, r);
        // beyond the coverage the series was already cut at mass < 1e-15
        m <= cover && set.contains(m)
    })?;
    let sigma = binomial_sigma(exact, replicas);
    Ok(ComparisonReport::from_mc(&mc, exact, "|MC - exact| <= 4 sigma", (mc.estimate - exact).abs() <= 4.0 * sigma)
        .with_details(json!({"sigma": sigma, "exact_ms": exact_ms})))
}

/// `{next prime >= 2^j : 1 <= j, 2^j <= upto}`, known up to `upto`.
pub fn power_of_two_primes(table: &PrimeTable, upto: u64) -> Result<PrimeSet> {
    need_table(table, upto)?;
    let mut keep = Vec::new();
    let mut j = 1u32;
    while j < 63 && (1u64 << j) <= upto {
        let lo = 1u64 << j;
        match table.primes_in(lo, upto).next() {
            Some(p) => keep.push(p),
            None => break,
        }
        j += 1;
    }
    Ok(PrimeSet::filtered(table, upto, |p| keep.binary_search(&p).is_ok()))
}

/// Schedule, exponent and interval ratio of the avoidance statement.
#[derive(Clone, Debug, PartialEq)]
pub struct AvoidanceConfig {
    /// The increasing sequence `K`.
    pub schedule: Vec<u64>,
    pub beta: f64,
    pub b: f64,
    /// Bound constant `K` in `P{Delta_k in P} <= K k^{-beta}`.
    pub k_bound: f64,
}

impl AvoidanceConfig {
    /// `K = {ceil(j^3) : 1 <= j <= j_max}` with `beta = 0.4`, `b = 4`.
    pub fn cubes(j_max: u64, k_bound: f64) -> Self {
        AvoidanceConfig { schedule: (1..=j_max).map(|j| j * j * j).collect(), beta: 0.4, b: 4.0, k_bound }
    }
}

/// `#(P cap [k, b k]) / k^{1/2 - beta}` along the schedule.
pub fn avoidance_hypothesis_ratios(cfg: &AvoidanceConfig, set: &PrimeSet) -> Vec<f64> {
    cfg.schedule
        .iter()
        .map(|&k| {
            let hi = (cfg.b * k as f64).floor() as u64;
            set.range(k, hi).len() as f64 / (k as f64).powf(0.5 - cfg.beta)
        })
        .collect()
}

/// Exact hit probabilities `P{Delta_k in P}` along the schedule against
/// `K k^{-beta}`, with the partial sums compared to `K zeta(3 beta)` when
/// the schedule is the cubes.
///
/// The interval-count hypothesis is checked on the schedule: the ratio
/// must not grow past twice its maximum over the first half. Otherwise the
/// verdict is `HypothesisViolated`.
pub fn avoidance_experiment(cfg: &AvoidanceConfig, set: &PrimeSet, set_name: &str) -> Result<ComparisonReport> {
    if !(cfg.beta > 0.0 && cfg.beta < 0.5) || !(cfg.b > 1.0) || cfg.schedule.is_empty() {
        return Err(domain("avoidance needs 0 < beta < 1/2, b > 1 and a nonempty schedule"));
    }
    if cfg.schedule.windows(2).any(|w| w[1] <= w[0]) || cfg.schedule[0] == 0 {
        return Err(domain("schedule must be positive and increasing"));
    }
    let start = Instant::now();
    let ratios = avoidance_hypothesis_ratios(cfg, set);
    let half = ratios.len().div_ceil(2);
    let early = ratios[..half].iter().copied().fold(0.0, f64::max);
    let late = ratios[half..].iter().copied().fold(0.0, f64::max);
    let hypothesis = late <= 2.0 * early.max(1.0 / (cfg.schedule[0] as f64).powf(0.5 - cfg.beta));

    let mut rows = Vec::new();
    let (mut worst, mut partial) = (0.0f64, 0.0);
    for (&k, &h) in cfg.schedule.iter().zip(&ratios) {
        let p = delta_prime_hit_prob(k, set, 1e-15)?;
        let scaled = p * (k as f64).powf(cfg.beta);
        worst = worst.max(scaled);
        partial += p;
        rows.push(json!({"k": k, "hit_prob": p, "scaled": scaled, "partial_sum": partial, "interval_ratio": h}));
    }
    let cubes = cfg.schedule.iter().enumerate().all(|(j, &k)| k == ((j + 1) as u64).pow(3));
    let series_bound = if cubes && 3.0 * cfg.beta > 1.0 { Some(cfg.k_bound * zeta(3.0 * cfg.beta)?) } else { None };
    let ok = worst <= cfg.k_bound && series_bound.map_or(true, |s| partial <= s);
    let verdict = if hypothesis { Verdict::from_bool(ok) } else { Verdict::HypothesisViolated };
    Ok(ComparisonReport::exact(
        "avoidance",
        params! {"set" => set_name, "beta" => cfg.beta, "b" => cfg.b, "K" => cfg.k_bound, "schedule" => cfg.schedule},
        worst,
        cfg.k_bound,
        "max_k P{Delta_k in P} k^beta <= K and partial sum <= K zeta(3 beta)",
        ok,
    )
    .with_verdict(verdict)
    .with_details(json!({
        "rows": rows, "hypothesis_holds": hypothesis, "early_ratio_max": early, "late_ratio_max": late,
        "series_bound": series_bound,
    }))
    .with_elapsed(ms(start)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::sieve;
    use crate::rng;

    #[test]
    fn range_guard() {
        let r = QuasiprimeRange::default();
        assert!(r.check(100_000, 10.0).is_ok());
        assert!(r.check(100_000, 1.9).is_err());
        assert!(r.check(100_000, 50.0).is_err());
    }

    #[test]
    fn fair_coin_sum_mean() {
        let mut r = rng::stream(3, &[]);
        let s: u64 = (0..2000).map(|_| sample_fair_coin_sum(100, &mut r)).sum();
        assert!((s as f64 / 2000.0 - 50.0).abs() < 0.5);
        assert_eq!(sample_fair_coin_sum(0, &mut r), 0);
    }

    #[test]
    fn empty_set_never_hit() {
        let cfg = AvoidanceConfig::cubes(5, 1.0);
        let r = avoidance_experiment(&cfg, &PrimeSet::empty(), "empty").unwrap();
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn all_primes_violate_hypothesis() {
        let t = sieve(200_000).unwrap();
        let cfg = AvoidanceConfig::cubes(12, 1.0);
        let r = avoidance_experiment(&cfg, &PrimeSet::all(&t), "all").unwrap();
        assert_eq!(r.verdict, Verdict::HypothesisViolated);
    }

    #[test]
    fn sparse_set_members() {
        let t = sieve(1000).unwrap();
        let s = power_of_two_primes(&t, 1000).unwrap();
        assert_eq!(s.members(), &[2, 5, 11, 17, 37, 67, 131, 257, 521]);
    }
}
