//! Replica-parallel Monte Carlo with deterministic reductions.
//!
//! Replica `i` of an experiment draws from its own generator seeded by
//! `(master_seed, tag(experiment), i)`. Per-replica results are either
//! integer counts (summed) or collected in replica order, so estimates do
//! not depend on the number of worker threads.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::error::{domain, Error, Result};
use crate::rng::{self, Rng64};
use crate::stats::{wilson, Z95};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "CRAMER_WORKERS";
/// Smallest replica count accepted by [`mc_estimate`].
pub const MIN_REPLICAS: u64 = 100;
const CHUNK: u64 = 256;

/// Worker count from `CRAMER_WORKERS`, else the number of logical CPUs.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `f` inside a thread pool of `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Resource(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// `f(i)` for `i in 0..n`, in index order, spread over `workers` threads.
pub fn par_map<T: Send>(n: u64, workers: usize, f: impl Fn(u64) -> T + Sync + Send) -> Result<Vec<T>> {
    with_workers(workers, || (0..n).into_par_iter().map(&f).collect())
}

/// Number of `i in 0..n` with `f(i)`, spread over `workers` threads.
pub fn par_count(n: u64, workers: usize, f: impl Fn(u64) -> bool + Sync + Send) -> Result<u64> {
    with_workers(workers, || {
        (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(n)).filter(|&i| f(i)).count() as u64)
            .sum()
    })
}

/// Key-value parameter record echoed into reports.
pub type Params = BTreeMap<String, Value>;

/// Builds a [`Params`] map from `key => value` pairs.
#[macro_export]
macro_rules! params {
    ($($k:expr => $v:expr),* $(,)?) => {{
        #[allow(unused_mut)]
        let mut m = $crate::experiments::Params::new();
        $( m.insert($k.to_string(), $crate::__serde_json::json!($v)); )*
        m
    }};
}

/// Frequency estimate with a 95% Wilson interval.
#[derive(Clone, Debug, Serialize)]
pub struct McReport {
    pub experiment: String,
    pub params: Params,
    pub master_seed: u64,
    pub replicas: u64,
    pub successes: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub elapsed_ms: u64,
}

impl McReport {
    pub fn from_counts(experiment: &str, params: Params, master_seed: u64, successes: u64, replicas: u64, elapsed_ms: u64) -> Self {
        let estimate = successes as f64 / replicas as f64;
        let (ci_low, ci_high) = wilson(successes, replicas, Z95);
        McReport {
            experiment: experiment.to_string(),
            params,
            master_seed,
            replicas,
            successes,
            estimate,
            ci_low,
            ci_high,
            elapsed_ms,
        }
    }

    /// Standard error of the estimate.
    pub fn sigma(&self) -> f64 {
        (self.estimate * (1.0 - self.estimate) / self.replicas as f64).sqrt()
    }
}

/// Estimates `P{event}`; replica `i` receives its own generator and index.
pub fn mc_estimate<F>(
    experiment: &str,
    params: Params,
    replicas: u64,
    master_seed: u64,
    workers: usize,
    event: F,
) -> Result<McReport>
where
    F: Fn(&mut Rng64, u64) -> bool + Sync + Send,
{
    if replicas < MIN_REPLICAS {
        return Err(domain(format!("need at least {MIN_REPLICAS} replicas, got {replicas}")));
    }
    let start = Instant::now();
    let tag = rng::tag(experiment);
    let hits = par_count(replicas, workers, |i| {
        let mut r = rng::replica(master_seed, tag, i);
        event(&mut r, i)
    })?;
    Ok(McReport::from_counts(experiment, params, master_seed, hits, replicas, start.elapsed().as_millis() as u64))
}

/// Per-replica values `f(rng_i, i)` in replica order.
pub fn mc_collect<T, F>(experiment: &str, replicas: u64, master_seed: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut Rng64, u64) -> T + Sync + Send,
{
    let tag = rng::tag(experiment);
    par_map(replicas, workers, |i| {
        let mut r = rng::replica(master_seed, tag, i);
        f(&mut r, i)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn constant_event() {
        let r = mc_estimate("always", params! {}, 1000, 1, 2, |_, _| true).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.ci_high, 1.0);
        assert!(mc_estimate("few", params! {}, 10, 1, 1, |_, _| true).is_err());
    }

    #[test]
    fn worker_count_does_not_matter() {
        let f = |r: &mut Rng64, _| r.next_u64() % 3 == 0;
        let a = mc_estimate("w", params! {"x" => 1}, 5000, 9, 1, f).unwrap();
        let b = mc_estimate("w", params! {"x" => 1}, 5000, 9, 3, f).unwrap();
        assert_eq!(a.successes, b.successes);
        let va = mc_collect("v", 300, 4, 1, |r, _| r.next_u64()).unwrap();
        let vb = mc_collect("v", 300, 4, 4, |r, _| r.next_u64()).unwrap();
        assert_eq!(va, vb);
    }
}
