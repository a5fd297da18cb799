use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::analytic::zeta_partial_sum;
use crate::error::{domain, Result};
use crate::experiments::mc_collect;
use crate::model::{MomentSweep, Trajectory};

/// Block `k` of the small-amplitude events for `f_c(t) = (ln t)^c` and
/// threshold `z`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AmplitudeWindow {
    pub c: f64,
    pub z: f64,
    pub k: u64,
}

impl AmplitudeWindow {
    pub fn new(c: f64, z: f64, k: u64) -> Result<Self> {
        if !(c > 0.0) || !(z >= 0.0) || k < 1 {
            return Err(domain(format!("amplitude window needs c > 0, z >= 0, k >= 1 (got {c}, {z}, {k})")));
        }
        Ok(AmplitudeWindow { c, z, k })
    }

    /// `[e^k, e^k f_c(e^k))`, the variance range of the walk event.
    pub fn variance_range(&self) -> (f64, f64) {
        let lo = (self.k as f64).exp();
        (lo, lo * (self.k as f64).powf(self.c))
    }

    /// `ln f_c(e^k) = c ln k`, the duration of the OU event.
    pub fn ou_duration(&self) -> f64 {
        self.c * (self.k as f64).ln()
    }
}

/// `sup_{j in J} |S_j - m_j| / sqrt(B_j) <= z` with
/// `J = {j : e^k <= B_j < e^k f_c(e^k)}`.
pub fn walk_amplitude_event(traj: &Trajectory, sweep: &MomentSweep, window: &AmplitudeWindow) -> Result<bool> {
    let (lo, hi) = window.variance_range();
    let j_lo = sweep.first_index_with_variance(lo);
    let j_hi = sweep.first_index_with_variance(hi);
    let (j_lo, j_hi) = match (j_lo, j_hi) {
        (Some(a), Some(b)) if b <= traj.n_max() + 1 && b <= sweep.n_max() => (a, b),
        _ => {
            return Err(domain(format!(
                "horizon too short: need B_j >= {hi:.3e} within the trajectory (n_max = {})",
                traj.n_max()
            )))
        }
    };
    if sweep.start() != traj.start() {
        return Err(domain("moment sweep and trajectory belong to different models"));
    }
    for j in j_lo..j_hi {
        let dev = (traj.partial_sum(j) as f64 - sweep.mean(j)).abs();
        if dev > window.z * sweep.variance(j).sqrt() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Counts of the OU events `A_k = {sup_{k <= s <= k + c ln k} |U(s)| <= z}`,
/// `k_min <= k <= k_max`, along one path per replica.
#[derive(Clone, Debug, Serialize)]
pub struct AmplitudeCounts {
    pub c: f64,
    pub z: f64,
    pub k_min: u64,
    pub k_max: u64,
    pub lambda: f64,
    pub counts: Vec<u64>,
    /// Mean count over replicas.
    pub mean: f64,
    /// `sum_k k^{-c lambda}`
    pub series_full: f64,
    /// `sum_k k^{-c lambda / 2}`
    pub series_half: f64,
}

fn power_series(k_min: u64, k_max: u64, s: f64) -> Result<f64> {
    let upper = zeta_partial_sum(k_max, s)?.sum;
    let lower = if k_min > 1 { zeta_partial_sum(k_min - 1, s)?.sum } else { 0.0 };
    Ok(upper - lower)
}

#[allow(clippy::too_many_arguments)]
pub fn amplitude_counting(
    c: f64,
    z: f64,
    k_min: u64,
    k_max: u64,
    lambda: f64,
    dt: f64,
    replicas: u64,
    seed: u64,
    workers: usize,
) -> Result<AmplitudeCounts> {
    if !(c > 0.0) || !(z > 0.0) || k_min < 1 || k_max < k_min {
        return Err(domain("amplitude counting needs c > 0, z > 0 and 1 <= k_min <= k_max"));
    }
    if !(dt > 0.0 && dt <= 0.1) || !(lambda > 0.0) {
        return Err(domain("amplitude counting needs 0 < dt <= 0.1 and lambda > 0"));
    }
    let t_end = k_max as f64 + c * (k_max as f64).ln();
    let steps = (t_end / dt).ceil() as usize;
    let (a, s) = ((-dt / 2.0).exp(), (-(-dt).exp_m1()).sqrt());
    let counts = mc_collect("amplitude-counting", replicas, seed, workers, |r, _| {
        let mut u: f64 = r.sample(StandardNormal);
        let mut path = Vec::with_capacity(steps + 1);
        path.push(u.abs());
        for _ in 0..steps {
            let g: f64 = r.sample(StandardNormal);
            u = a * u + s * g;
            path.push(u.abs());
        }
        (k_min..=k_max)
            .filter(|&k| {
                let i0 = (k as f64 / dt).round() as usize;
                let i1 = ((k as f64 + c * (k as f64).ln()) / dt).round() as usize;
                path[i0..=i1.min(steps)].iter().all(|&x| x <= z)
            })
            .count() as u64
    })?;
    let mean = counts.iter().sum::<u64>() as f64 / replicas as f64;
    Ok(AmplitudeCounts {
        c,
        z,
        k_min,
        k_max,
        lambda,
        mean,
        counts,
        series_full: power_series(k_min, k_max, c * lambda)?,
        series_half: power_series(k_min, k_max, c * lambda / 2.0)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_trajectory, ModelSpec};

    #[test]
    fn huge_threshold_counts_everything() {
        let r = amplitude_counting(1.0, 1e6, 1, 20, 2.0, 0.05, 100, 1, 1).unwrap();
        assert!(r.counts.iter().all(|&n| n == 20));
    }

    #[test]
    fn counts_monotone_in_z() {
        let a = amplitude_counting(1.0, 1.0, 1, 20, 2.0, 0.05, 100, 7, 1).unwrap();
        let b = amplitude_counting(1.0, 1.5, 1, 20, 2.0, 0.05, 100, 7, 1).unwrap();
        assert!(a.counts.iter().zip(&b.counts).all(|(x, y)| x <= y));
    }

    #[test]
    fn walk_event_extremes() {
        let spec = ModelSpec::cramer();
        let sweep = MomentSweep::new(&spec, 20_000).unwrap();
        let t = sample_trajectory(&spec, 20_000, 3).unwrap();
        let w = AmplitudeWindow::new(1.0, 1e6, 3).unwrap();
        assert!(walk_amplitude_event(&t, &sweep, &w).unwrap());
        let w0 = AmplitudeWindow::new(1.0, 0.0, 3).unwrap();
        assert!(!walk_amplitude_event(&t, &sweep, &w0).unwrap());
        let far = AmplitudeWindow::new(1.0, 1.0, 12).unwrap();
        assert!(walk_amplitude_event(&t, &sweep, &far).is_err());
    }
}
