//! Exact-oracle comparisons for the limit theorems of the walk and of the
//! jump-instant law.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use serde_json::json;

use super::mc::mc_collect;
use super::report::{ComparisonReport, Verdict};
use crate::analytic::{
    binomial_half_pmf, char_func_exact, delta_law, delta_llt, divisibility_estimate, fair_coin_theta, llt_sup_error,
    poisson_gaussian_sum,
};
use crate::error::{domain, Result};
use crate::model::{exact_law, exact_law_mod, moments, ModelSpec};
use crate::numeric::{golden_sequence, Neumaier};
use crate::params;
use crate::primes::isqrt;
use crate::rng::Rng64;
use crate::stats::{chi_square, normal_cdf};

fn ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

/// Mean and variance of the exact law against the closed-form moments.
pub fn exact_law_experiment(spec: &ModelSpec, n: u64) -> Result<ComparisonReport> {
    let start = Instant::now();
    let law = exact_law(spec, n)?;
    let mom = moments(spec, n)?;
    let dm = (law.mean() - mom.mean).abs();
    let dv = (law.variance() - mom.variance).abs();
    let ok = dm <= 1e-9 && dv <= 1e-6 * mom.variance;
    Ok(ComparisonReport::exact(
        "exact-law-moments",
        params! {"model" => spec.kind().name(), "n" => n},
        law.mean(),
        mom.mean,
        "|mean - m_n| <= 1e-9 and |var - B_n| <= 1e-6 B_n",
        ok,
    )
    .with_details(json!({
        "variance": law.variance(), "B_n": mom.variance, "mean_error": dm, "variance_error": dv,
        "total_mass": law.total(), "truncated_mass": law.truncated_mass(),
    }))
    .with_elapsed(ms(start)))
}

/// The modulus bound `|Phi_n(t)| <= exp(-2 B_n sin^2 pi t)` at `points`
/// quasi-random frequencies in `(-1/2, 1/2)`, and the phase bound
/// `|log Phi_n(t) - (2 pi i t m_n - 2 B_n (pi t)^2)| <= 12 m_n (pi |t|)^3`
/// at `points` frequencies with `|t| <= small_t`.
pub fn char_func_suite(spec: &ModelSpec, n: u64, points: usize, small_t: f64) -> Result<Vec<ComparisonReport>> {
    if points == 0 || !(small_t > 0.0 && small_t <= 0.5) {
        return Err(domain("char_func_suite needs points >= 1 and 0 < small_t <= 1/2"));
    }
    let start = Instant::now();
    let mom = moments(spec, n)?;
    let mut worst_mod = (0.0f64, 0.0f64);
    for u in golden_sequence(points) {
        let t = u - 0.5;
        let v = char_func_exact(spec, n, t)?;
        let r = v.value.norm() / v.modulus_bound;
        if r > worst_mod.0 {
            worst_mod = (r, t);
        }
    }
    let modulus = ComparisonReport::exact(
        "charfunc-modulus",
        params! {"model" => spec.kind().name(), "n" => n, "points" => points},
        worst_mod.0,
        1.0,
        "max_t |Phi_n(t)| / exp(-2 B_n sin^2 pi t) <= 1 + 1e-12",
        worst_mod.0 <= 1.0 + 1e-12,
    )
    .with_details(json!({"worst_t": worst_mod.1}))
    .with_elapsed(ms(start));

    let start = Instant::now();
    let mut worst_phase = (0.0f64, 0.0f64);
    for u in golden_sequence(points) {
        let t = (2.0 * u - 1.0) * small_t;
        if t == 0.0 {
            continue;
        }
        let v = char_func_exact(spec, n, t)?;
        let gauss = Complex64::new(-2.0 * mom.variance * (PI * t).powi(2), 2.0 * PI * t * mom.mean);
        let r = (v.log_value - gauss).norm() / v.phase_error_bound;
        if r > worst_phase.0 {
            worst_phase = (r, t);
        }
    }
    let phase = ComparisonReport::exact(
        "charfunc-phase",
        params! {"model" => spec.kind().name(), "n" => n, "points" => points, "small_t" => small_t},
        worst_phase.0,
        1.0,
        "max_{|t| <= small_t} |log Phi_n(t) - (2 pi i t m_n - 2 B_n (pi t)^2)| / (12 m_n (pi |t|)^3) <= 1",
        worst_phase.0 <= 1.0,
    )
    .with_details(json!({"worst_t": worst_phase.1}))
    .with_elapsed(ms(start));
    Ok(vec![modulus, phase])
}

/// Scaled LLT error `E(n) n / (ln n)^{3/2}` at each `n`, judged against
/// `[k/2, 2k]`. Without a reference constant the value at the first grid
/// point is used.
pub fn llt_suite(spec: &ModelSpec, n_grid: &[u64], c_win: f64, k_ref: Option<f64>) -> Result<Vec<ComparisonReport>> {
    let mut out = Vec::with_capacity(n_grid.len());
    let mut k = k_ref;
    for &n in n_grid {
        let start = Instant::now();
        let e = llt_sup_error(spec, n, c_win)?;
        let kk = *k.get_or_insert(e.scaled);
        out.push(
            ComparisonReport::exact(
                "llt-rate",
                params! {"model" => spec.kind().name(), "n" => n, "c_win" => c_win},
                e.scaled,
                kk,
                "K/2 <= E(n) n / (ln n)^{3/2} <= 2K",
                e.scaled >= kk / 2.0 && e.scaled <= 2.0 * kk,
            )
            .with_details(json!({"sup_error": e.sup_error, "argmax": e.argmax, "window_points": e.window_points}))
            .with_elapsed(ms(start)),
        );
    }
    Ok(out)
}

/// `sup_z |P{B_n = z} - sqrt(2/(pi n)) e^{-(2z-n)^2/(2n)}| n^{3/2}`.
pub fn fair_coin_llt_scaled(n: u64) -> f64 {
    let nf = n as f64;
    let c = (2.0 / (PI * nf)).sqrt();
    let sup = (0..=n)
        .map(|z| (binomial_half_pmf(n, z) - c * (-(2.0 * z as f64 - nf).powi(2) / (2.0 * nf)).exp()).abs())
        .fold(0.0, f64::max);
    sup * nf.powf(1.5)
}

/// The fair-coin local limit theorem at rate `n^{-3/2}`, each grid point
/// judged against `bound`.
pub fn fair_coin_llt_suite(n_grid: &[u64], bound: f64) -> Vec<ComparisonReport> {
    n_grid
        .iter()
        .map(|&n| {
            let start = Instant::now();
            let s = fair_coin_llt_scaled(n);
            ComparisonReport::exact(
                "fair-coin-llt",
                params! {"n" => n},
                s,
                bound,
                "sup_z |P{B_n = z} - gaussian| n^{3/2} <= bound",
                s <= bound,
            )
            .with_elapsed(ms(start))
        })
        .collect()
}

/// Kolmogorov distance between the law of `(S_n - m_n)/sqrt(B_n)` and the
/// standard normal.
pub fn clt_experiment(spec: &ModelSpec, n: u64, max_distance: f64) -> Result<ComparisonReport> {
    let start = Instant::now();
    let law = exact_law(spec, n)?;
    let mom = moments(spec, n)?;
    let sd = mom.variance.sqrt();
    let mut below = Neumaier::default();
    let mut d = 0.0f64;
    for (k, p) in law.iter() {
        let f = normal_cdf((k as f64 - mom.mean) / sd);
        d = d.max((below.sum() - f).abs());
        below.add(p);
        d = d.max((below.sum() - f).abs());
    }
    Ok(ComparisonReport::exact(
        "clt-kolmogorov",
        params! {"model" => spec.kind().name(), "n" => n},
        d,
        max_distance,
        "sup_x |P{(S_n - m_n)/sqrt(B_n) <= x} - Phi(x)| <= bound",
        d <= max_distance,
    )
    .with_elapsed(ms(start)))
}

/// Scaled divisibility error against the residue oracle.
///
/// The fair coin is compared with `Theta(d, n)/d` at scale
/// `n^{3/2}/(ln n)^{5/2}`, other models with `Theta(d; m_n, B_n)/d` at
/// scale `n/(ln n)^3`.
pub fn divisibility_scaled(spec: &ModelSpec, d: u64, n: u64) -> Result<(f64, f64)> {
    let exact = exact_law_mod(spec, n, d)?[0];
    let nf = n as f64;
    let (est, scale) = if spec.kind() == crate::model::ModelKind::FairCoin {
        (fair_coin_theta(d, n)?.value / d as f64, nf.powf(1.5) / nf.ln().powf(2.5))
    } else {
        (divisibility_estimate(spec, d, n)?, nf / nf.ln().powi(3))
    };
    Ok(((exact - est).abs() * scale, exact))
}

/// Rate stability of the divisibility estimate: every scaled error on the
/// `(n, d)` grid (pairs with `d > n` skipped) must stay below `bound`.
pub fn divisibility_suite(spec: &ModelSpec, n_grid: &[u64], d_grid: &[u64], bound: f64) -> Result<ComparisonReport> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut cells = Vec::new();
    for &n in n_grid {
        for &d in d_grid.iter().filter(|&&d| d >= 2 && d <= n) {
            let (s, exact) = divisibility_scaled(spec, d, n)?;
            worst = worst.max(s);
            cells.push(json!({"n": n, "d": d, "exact": exact, "scaled_error": s}));
        }
    }
    Ok(ComparisonReport::exact(
        "divisibility-rate",
        params! {"model" => spec.kind().name(), "n_grid" => n_grid, "d_grid" => d_grid},
        worst,
        bound,
        "max over grid of scaled |P{d | S_n} - Theta/d| <= bound",
        worst <= bound,
    )
    .with_details(json!({ "cells": cells }))
    .with_elapsed(ms(start)))
}

/// `Theta(d, n)/d` against the lattice Gaussian sum it equals by Poisson
/// summation.
pub fn poisson_identity_experiment(d: u64, n: u64, tol: f64) -> Result<ComparisonReport> {
    let start = Instant::now();
    let th = fair_coin_theta(d, n)?.value / d as f64;
    let direct = poisson_gaussian_sum(d, n);
    Ok(ComparisonReport::exact(
        "poisson-identity",
        params! {"d" => d, "n" => n},
        th,
        direct,
        "|Theta(d, n)/d - sqrt(2/(pi n)) sum_{d | z} e^{-(2z-n)^2/(2n)}| <= tol",
        (th - direct).abs() <= tol,
    )
    .with_details(json!({"difference": th - direct, "tol": tol}))
    .with_elapsed(ms(start)))
}

/// `|Theta(d, n)/d - 1/d| <= (k/d) e^{-n pi^2/(2 d^2)}` for every
/// `2 <= d <= sqrt n` and each `n` of the grid.
pub fn theta_bound_scan(n_grid: &[u64], k: f64) -> Result<ComparisonReport> {
    let start = Instant::now();
    let mut worst = (0.0f64, 0u64, 0u64);
    let mut checked = 0u64;
    for &n in n_grid {
        for d in 2..=isqrt(n) {
            let th = fair_coin_theta(d, n)?.value;
            let df = d as f64;
            let bound = (-(n as f64) * PI * PI / (2.0 * df * df)).exp() / df;
            let r = (th / df - 1.0 / df).abs() / bound;
            checked += 1;
            if r > worst.0 {
                worst = (r, n, d);
            }
        }
    }
    Ok(ComparisonReport::exact(
        "theta-bound",
        params! {"n_grid" => n_grid, "K" => k},
        worst.0,
        k,
        "max over d <= sqrt n of |Theta/d - 1/d| / (e^{-n pi^2/(2 d^2)}/d) <= K",
        worst.0 <= k,
    )
    .with_details(json!({"worst_n": worst.1, "worst_d": worst.2, "pairs": checked}))
    .with_elapsed(ms(start)))
}

/// Total mass, mean and variance of the jump-instant law `Delta_k`
/// against `1`, `2k` and `2k`.
pub fn delta_moments_experiment(k: u64) -> Result<ComparisonReport> {
    if k == 0 {
        return Err(domain("k must be >= 1"));
    }
    let start = Instant::now();
    let kf = k as f64;
    let m_max = (2.0 * kf + 60.0 * (2.0 * kf).sqrt() + 200.0) as u64;
    let (mut s0, mut s1, mut s2) = (Neumaier::default(), Neumaier::default(), Neumaier::default());
    for m in k..=m_max {
        let p = delta_law(k, m);
        let x = m as f64 - 2.0 * kf;
        s0.add(p);
        s1.add(p * x);
        s2.add(p * x * x);
    }
    let total = s0.sum();
    let mean = 2.0 * kf + s1.sum() / total;
    let var = s2.sum() / total - (s1.sum() / total).powi(2);
    let ok = (total - 1.0).abs() <= 1e-12 && (mean - 2.0 * kf).abs() <= 1e-9 * 2.0 * kf && (var - 2.0 * kf).abs() <= 1e-8 * 2.0 * kf;
    Ok(ComparisonReport::exact(
        "delta-moments",
        params! {"k" => k},
        mean,
        2.0 * kf,
        "|mass - 1| <= 1e-12, |mean - 2k| <= 1e-9 * 2k, |var - 2k| <= 1e-8 * 2k",
        ok,
    )
    .with_details(json!({"mass": total, "variance": var, "m_max": m_max}))
    .with_elapsed(ms(start)))
}

/// Position of the `k`-th success in a stream of fair coin flips.
pub fn sample_delta(k: u64, r: &mut Rng64) -> u64 {
    use rand::RngCore;
    let mut seen = 0u64;
    let mut pos = 0u64;
    loop {
        let mut w = r.next_u64();
        let c = w.count_ones() as u64;
        if seen + c < k {
            seen += c;
            pos += 64;
            continue;
        }
        loop {
            let tz = w.trailing_zeros() as u64;
            seen += 1;
            if seen == k {
                return pos + tz + 1;
            }
            w &= w - 1;
        }
    }
}

/// Pearson test of simulated `Delta_k` against its exact law.
pub fn delta_chi_square_experiment(k: u64, replicas: u64, seed: u64, workers: usize) -> Result<ComparisonReport> {
    let start = Instant::now();
    let samples = mc_collect("delta-chi-square", replicas, seed, workers, |r, _| sample_delta(k, r))?;
    let hi = samples.iter().copied().max().unwrap_or(k).max(2 * k + 1);
    let mut observed = vec![0u64; (hi - k + 1) as usize];
    for &m in &samples {
        observed[(m - k) as usize] += 1;
    }
    let mut expected: Vec<f64> = (k..=hi).map(|m| delta_law(k, m)).collect();
    // the last cell carries the whole upper tail
    let head: f64 = expected[..expected.len() - 1].iter().sum();
    *expected.last_mut().unwrap() = 1.0 - head;
    let test = chi_square(&observed, &expected, 5.0);
    Ok(ComparisonReport::exact(
        "delta-chi-square",
        params! {"k" => k},
        test.p_value,
        0.001,
        "chi-square p-value > 0.001",
        test.p_value > 0.001,
    )
    .with_seed(seed, replicas)
    .with_details(json!({"statistic": test.statistic, "df": test.df}))
    .with_elapsed(ms(start)))
}

/// `sup_n |P{Delta_k = n} - gaussian| k`.
pub fn delta_llt_scaled(k: u64) -> Result<f64> {
    let kf = k as f64;
    let m_max = (2.0 * kf + 60.0 * (2.0 * kf).sqrt() + 200.0) as u64;
    let mut sup = 0.0f64;
    for n in 1..=m_max {
        sup = sup.max((delta_law(k, n) - delta_llt(k, n)?.density).abs());
    }
    Ok(sup * kf)
}

pub fn delta_llt_experiment(k: u64, bound: f64) -> Result<ComparisonReport> {
    let start = Instant::now();
    let s = delta_llt_scaled(k)?;
    Ok(ComparisonReport::exact(
        "delta-llt",
        params! {"k" => k},
        s,
        bound,
        "k sup_n |P{Delta_k = n} - e^{-(n-2k)^2/(4k)}/(2 sqrt(pi k))| <= bound",
        s <= bound,
    )
    .with_elapsed(ms(start)))
}

/// `Verdict` of a batch: fail if any member fails.
pub fn batch_verdict(reports: &[ComparisonReport]) -> Verdict {
    if reports.iter().any(|r| r.verdict.is_fail()) {
        Verdict::Fail
    } else {
        Verdict::Pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn delta_sampler_small_cases() {
        let mut r = rng::stream(1, &[1]);
        let mut first = [0u64; 8];
        for _ in 0..80_000 {
            let m = sample_delta(1, &mut r);
            if m < 8 {
                first[m as usize] += 1;
            }
        }
        // P{Delta_1 = 1} = 1/2, P{Delta_1 = 2} = 1/4
        assert!((first[1] as f64 / 80_000.0 - 0.5).abs() < 0.01);
        assert!((first[2] as f64 / 80_000.0 - 0.25).abs() < 0.01);
        assert!(sample_delta(70, &mut r) >= 70);
    }

    #[test]
    fn fair_coin_llt_is_small() {
        assert!(fair_coin_llt_scaled(100) < 1.0);
    }

    #[test]
    fn exact_moments_match() {
        assert!(exact_law_experiment(&ModelSpec::cramer(), 300).unwrap().passed());
        assert!(delta_moments_experiment(5).unwrap().passed());
    }
}
