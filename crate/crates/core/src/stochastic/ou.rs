use std::time::Instant;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::experiments::{mc_estimate, with_workers, McReport};
use crate::params;
use crate::rng::{self, Rng64};

/// Largest step and horizon accepted by the simulators.
pub const DT_MAX: f64 = 0.1;
pub const T_MAX: f64 = 1e4;

/// Grid samples of the stationary process `U(t) = W(e^t) e^{-t/2}`.
#[derive(Clone, Debug, Serialize)]
pub struct OUPath {
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    /// `U(0), U(dt), ...`
    pub samples: Vec<f64>,
}

/// Exact one-step transition coefficients `(e^{-dt/2}, sqrt(1 - e^{-dt}))`.
#[inline]
fn transition(dt: f64) -> (f64, f64) {
    ((-dt / 2.0).exp(), (-(-dt).exp_m1()).sqrt())
}

fn check_dt_t(dt: f64, t: f64) -> Result<usize> {
    if !(dt > 0.0 && dt <= DT_MAX) {
        return Err(domain(format!("dt = {dt} outside (0, {DT_MAX}]")));
    }
    if !(t >= 0.0 && t <= T_MAX) {
        return Err(domain(format!("horizon T = {t} outside [0, {T_MAX}]")));
    }
    Ok((t / dt).round() as usize)
}

/// Simulates `U` on the grid `0, dt, ..., T` from a standard normal start.
pub fn simulate_ou(dt: f64, horizon: f64, seed: u64) -> Result<OUPath> {
    let steps = check_dt_t(dt, horizon)?;
    let mut r = rng::stream(seed, &[rng::tag("ou-path")]);
    let (a, s) = transition(dt);
    let mut u: f64 = r.sample(StandardNormal);
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(u);
    for _ in 0..steps {
        let g: f64 = r.sample(StandardNormal);
        u = a * u + s * g;
        samples.push(u);
    }
    Ok(OUPath { dt, horizon, seed, samples })
}

/// How the supremum of `|U|` between grid points is accounted for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Monitoring {
    /// Only the grid values are compared with the barrier.
    GridOnly,
    /// A path that stays inside on the grid is also killed with the
    /// Brownian-bridge probability of crossing a barrier between nodes,
    /// `exp(-2 (z - x0)(z - x1) / dt)` for each side.
    BridgeCorrected,
}

/// One step of a particle confined to `[-z, z]`; `false` means it died.
/// `two_over_dt` is `2 / dt`.
#[inline]
fn step_alive(x: &mut f64, a: f64, s: f64, z: f64, two_over_dt: f64, mon: Monitoring, r: &mut Rng64) -> bool {
    let x0 = *x;
    let g: f64 = r.sample(StandardNormal);
    let x1 = a * x0 + s * g;
    *x = x1;
    if x1.abs() > z {
        return false;
    }
    if mon == Monitoring::BridgeCorrected {
        let up = two_over_dt * (z - x0) * (z - x1);
        let down = two_over_dt * (z + x0) * (z + x1);
        // e^{-40} is far below the resolution of any estimate here
        let mut p = 0.0;
        if up < 40.0 {
            p += (-up).exp();
        }
        if down < 40.0 {
            p += (-down).exp();
        }
        if p > 0.0 && (r.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0) < p {
            return false;
        }
    }
    true
}

/// Plain Monte Carlo estimate of `P{sup_{0 <= s <= T} |U(s)| <= z}`.
pub fn ou_survival_prob(
    z: f64,
    horizon: f64,
    dt: f64,
    replicas: u64,
    seed: u64,
    monitoring: Monitoring,
    workers: usize,
) -> Result<McReport> {
    if !(z > 0.0) {
        return Err(domain(format!("z must be positive, got {z}")));
    }
    let steps = check_dt_t(dt, horizon)?;
    let (a, s) = transition(dt);
    let p = params! {
        "z" => z, "T" => horizon, "dt" => dt, "monitoring" => monitoring,
    };
    mc_estimate("ou-survival", p, replicas, seed, workers, |r, _| {
        let mut x: f64 = r.sample(StandardNormal);
        if x.abs() > z {
            return false;
        }
        (0..steps).all(|_| step_alive(&mut x, a, s, z, 2.0 / dt, monitoring, r))
    })
}

/// [`ou_survival_prob`] with grid-only monitoring, halving `dt` until the
/// estimate moves by less than one confidence-interval width (at most
/// `max_halvings` times). Returns every stage.
pub fn ou_survival_refined(
    z: f64,
    horizon: f64,
    dt: f64,
    replicas: u64,
    seed: u64,
    max_halvings: u32,
    workers: usize,
) -> Result<Vec<McReport>> {
    let mut out = vec![ou_survival_prob(z, horizon, dt, replicas, seed, Monitoring::GridOnly, workers)?];
    let mut h = dt;
    for _ in 0..max_halvings {
        h /= 2.0;
        let next = ou_survival_prob(z, horizon, h, replicas, seed, Monitoring::GridOnly, workers)?;
        let prev = out.last().unwrap();
        let width = prev.ci_high - prev.ci_low;
        let moved = (next.estimate - prev.estimate).abs();
        out.push(next);
        if moved < width {
            break;
        }
    }
    Ok(out)
}

/// Survival probability at one checkpoint of a [`SurvivalCurve`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SurvivalPoint {
    pub t: f64,
    pub survival: f64,
    pub log_survival: f64,
    /// 95% interval from the delta-method variance of the log estimate.
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurvivalCurve {
    pub z: f64,
    pub dt: f64,
    pub particles: u64,
    pub seed: u64,
    pub monitoring: Monitoring,
    pub stage_length: f64,
    pub points: Vec<SurvivalPoint>,
    pub elapsed_ms: u64,
}

/// Survival probabilities `P{sup_{0<=s<=t} |U(s)| <= z}` at each checkpoint
/// in `times`, by population resampling.
///
/// A population of `particles` copies is advanced in stages of
/// `stage_length`; after each stage the surviving fraction is recorded and
/// the population is refilled by drawing parents uniformly among the
/// survivors. The survival probability is the product of stage fractions,
/// which reaches probabilities far below `1 / particles`. Particle `i` of
/// stage `k` picks its parent and its noise from streams keyed by
/// `(seed, k, i)`, so the result does not depend on thread count.
pub fn ou_survival_curve(
    z: f64,
    times: &[f64],
    dt: f64,
    particles: u64,
    seed: u64,
    monitoring: Monitoring,
    stage_length: f64,
    workers: usize,
) -> Result<SurvivalCurve> {
    if !(z > 0.0) {
        return Err(domain(format!("z must be positive, got {z}")));
    }
    if particles < 100 {
        return Err(domain("need at least 100 particles"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(domain("checkpoint times must be nonnegative and increasing"));
    }
    let t_end = times.last().copied().unwrap_or(0.0);
    check_dt_t(dt, t_end)?;
    let steps_per_stage = ((stage_length / dt).round() as usize).max(1);
    let stage_length = steps_per_stage as f64 * dt;
    let checkpoints: Vec<usize> = times.iter().map(|&t| (t / stage_length).round() as usize).collect();
    let stages = checkpoints.last().copied().unwrap_or(0);
    let (a, s) = transition(dt);
    let two_over_dt = 2.0 / dt;
    let tag = rng::tag("ou-survival-curve");
    let n = particles as usize;
    let start = Instant::now();

    let (fractions, variances) = with_workers(workers, || {
        // stage 0: stationary start
        let init: Vec<f64> = (0..particles)
            .into_par_iter()
            .map(|i| rng::stream(seed, &[tag, 0, i]).sample(StandardNormal))
            .collect();
        let mut alive: Vec<f64> = init.into_iter().filter(|x: &f64| x.abs() <= z).collect();
        let mut fractions = vec![alive.len() as f64 / particles as f64];
        for stage in 1..=stages as u64 {
            if alive.is_empty() {
                fractions.push(0.0);
                continue;
            }
            let parents = &alive;
            let next: Vec<Option<f64>> = (0..particles)
                .into_par_iter()
                .map(|i| {
                    let mut r = rng::stream(seed, &[tag, stage, i]);
                    let parent = (r.next_u64() % parents.len() as u64) as usize;
                    let mut x = parents[parent];
                    for _ in 0..steps_per_stage {
                        if !step_alive(&mut x, a, s, z, two_over_dt, monitoring, &mut r) {
                            return None;
                        }
                    }
                    Some(x)
                })
                .collect();
            alive = next.into_iter().flatten().collect();
            fractions.push(alive.len() as f64 / particles as f64);
        }
        let variances: Vec<f64> =
            fractions.iter().map(|&f| if f > 0.0 { (1.0 - f) / (f * n as f64) } else { f64::INFINITY }).collect();
        (fractions, variances)
    })?;

    let mut points = Vec::with_capacity(times.len());
    for (&t, &k) in times.iter().zip(&checkpoints) {
        let log_s: f64 = fractions[..=k].iter().map(|f| f.ln()).sum();
        let var: f64 = variances[..=k].iter().sum();
        let half = crate::stats::Z95 * var.sqrt();
        points.push(SurvivalPoint {
            t,
            survival: log_s.exp(),
            log_survival: log_s,
            ci_low: (log_s - half).exp(),
            ci_high: (log_s + half).exp(),
        });
    }
    Ok(SurvivalCurve {
        z,
        dt,
        particles,
        seed,
        monitoring,
        stage_length,
        points,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_path() {
        let a = simulate_ou(0.01, 2.0, 5).unwrap();
        let b = simulate_ou(0.01, 2.0, 5).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.samples.len(), 201);
        assert!(simulate_ou(0.2, 1.0, 1).is_err());
    }

    #[test]
    fn wide_barrier_survives() {
        let r = ou_survival_prob(20.0, 5.0, 0.01, 1000, 1, Monitoring::GridOnly, 1).unwrap();
        assert!(r.estimate >= 0.999);
    }

    #[test]
    fn curve_at_zero_is_normal_mass() {
        let c = ou_survival_curve(1.0, &[0.0], 0.01, 100_000, 3, Monitoring::GridOnly, 0.1, 1).unwrap();
        let p = c.points[0].survival;
        assert!((p - 0.682_689_492_137).abs() < 4.0 * (0.68 * 0.32 / 1e5f64).sqrt());
    }
}
