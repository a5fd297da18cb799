use serde::Serialize;

use crate::error::{domain, Result};
use crate::model::{jump_instants, Trajectory};

fn window_len(m: u64, c: f64) -> u64 {
    (c * (m as f64).ln().powi(2)).floor() as u64
}

/// `P(E_m) = prod_{1 <= j <= c ln^2 m} (1 - 1/ln(m + j))` in the Cramér model.
pub fn gap_event_prob(m: u64, c: f64) -> Result<f64> {
    if m < 2 || !(c > 0.0) {
        return Err(domain(format!("gap event needs m >= 2 and c > 0 (got {m}, {c})")));
    }
    let len = window_len(m, c);
    let log: f64 = (1..=len).map(|j| (-1.0 / ((m + j) as f64).ln()).ln_1p()).sum();
    Ok(log.exp())
}

/// `m_1 = 2`, `m_{r+1} = m_r + floor(c ln^2 m_r) + 1`, keeping the `m_r`
/// whose window `m_r + 1 ..= m_r + floor(c ln^2 m_r)` ends by `horizon`.
pub fn m_sequence(c: f64, horizon: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut m = 2u64;
    while m + window_len(m, c) <= horizon {
        out.push(m);
        m += window_len(m, c) + 1;
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct GapStatistics {
    /// `max (P_{nu+1} - P_nu) / (ln P_nu)^2` over jumps `P_nu >= burn_in`.
    pub max_ratio: f64,
    /// The jump instant `P_nu` at which the maximum is attained.
    pub argmax: u64,
    pub burn_in: u64,
    /// The same maximum over every jump, small instants included.
    pub full_max_ratio: f64,
    pub jumps: u64,
    pub c: f64,
    /// Number `J` of grid points `m_r` inside the trajectory.
    pub grid_len: u64,
    /// `N_J`, the number of gap events `E_{m_r}` that occurred.
    pub events: u64,
    /// `sum_r P(E_{m_r})`
    pub expected: f64,
    /// `sum_r P(E_{m_r}) (1 - P(E_{m_r}))`
    pub variance: f64,
    /// `(N_J - expected) / sqrt(variance)`
    pub normalized: f64,
    /// `J^{1-c} (ln J)^{-2c}`
    pub rate: f64,
    /// `N_J / rate`
    pub rate_ratio: f64,
}

/// Gap functionals of one trajectory. The maximal gap ratio is taken over
/// jump instants `P_nu >= burn_in` as a finite-horizon proxy for the
/// limsup; `full_max_ratio` ignores the burn-in.
pub fn gap_statistics(traj: &Trajectory, c: f64, burn_in: u64) -> Result<GapStatistics> {
    if !(c > 0.0) {
        return Err(domain("c must be positive"));
    }
    let js = jump_instants(traj);
    if js.instants.len() < 2 {
        return Err(domain("gap statistics need at least two jumps"));
    }
    let (mut max_ratio, mut argmax, mut full_max_ratio) = (0.0f64, 0u64, 0.0f64);
    for w in js.instants.windows(2) {
        let r = (w[1] - w[0]) as f64 / (w[0] as f64).ln().powi(2);
        full_max_ratio = full_max_ratio.max(r);
        if w[0] >= burn_in && r > max_ratio {
            max_ratio = r;
            argmax = w[0];
        }
    }
    let grid = m_sequence(c, traj.n_max());
    let (mut events, mut expected, mut variance) = (0u64, 0.0, 0.0);
    for &m in &grid {
        let end = m + window_len(m, c);
        if traj.partial_sum(end) == traj.partial_sum(m) {
            events += 1;
        }
        let p = gap_event_prob(m, c)?;
        expected += p;
        variance += p * (1.0 - p);
    }
    let j = grid.len() as f64;
    let rate = j.powf(1.0 - c) * j.ln().powf(-2.0 * c);
    Ok(GapStatistics {
        max_ratio,
        argmax,
        burn_in,
        full_max_ratio,
        jumps: js.instants.len() as u64,
        c,
        grid_len: grid.len() as u64,
        events,
        expected,
        variance,
        normalized: (events as f64 - expected) / variance.sqrt(),
        rate,
        rate_ratio: events as f64 / rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;

    #[test]
    fn gap_probability_examples() {
        let p = gap_event_prob(3, 1.0).unwrap();
        assert!((p - (1.0 - 1.0 / 4f64.ln())).abs() < 1e-15);
        assert!((p - 0.27865).abs() < 1e-5);
        assert_eq!(gap_event_prob(3, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn single_gap() {
        let t = Trajectory::from_bits(&ModelSpec::cramer(), &[false, false, true, false, true]).unwrap();
        let g = gap_statistics(&t, 1.0, 0).unwrap();
        assert!((g.max_ratio - 2.0 / 5f64.ln().powi(2)).abs() < 1e-15);
        assert_eq!(gap_statistics(&t, 1.0, 6).unwrap().max_ratio, 0.0);
        let one = Trajectory::from_bits(&ModelSpec::cramer(), &[false, true]).unwrap();
        assert!(gap_statistics(&one, 1.0, 0).is_err());
    }

    #[test]
    fn grid_recursion() {
        let g = m_sequence(1.0, 100);
        assert_eq!(&g[..3], &[2, 3, 5]);
        assert!(g.windows(2).all(|w| w[1] == w[0] + window_len(w[0], 1.0) + 1));
    }
}
