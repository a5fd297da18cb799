use serde::Serialize;

use crate::error::{domain, Result};
use crate::model::{exact_law, moments, ModelSpec};
use crate::numeric::Neumaier;
use crate::primes::{gaussian_prime_sum, PrimeTable};

/// Gaussian main term for `P{S_n prime}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SnPrimeEstimate {
    pub n: u64,
    pub b: f64,
    pub value: f64,
    /// `sqrt(2 b B_n ln n)`
    pub half_width: f64,
    /// `(ln n)^{3/2} / sqrt n`
    pub error_scale: f64,
}

/// Sums the Gaussian density at primes within `sqrt(2 b B_n ln n)` of `m_n`.
pub fn sn_prime_estimate(spec: &ModelSpec, n: u64, b: f64, table: &PrimeTable) -> Result<SnPrimeEstimate> {
    if !(b > 0.5) {
        return Err(domain(format!("b must exceed 1/2, got {b}")));
    }
    let mom = moments(spec, n)?;
    let nf = n as f64;
    let half_width = (2.0 * b * mom.variance * nf.ln()).sqrt();
    let value = gaussian_prime_sum(mom.mean, mom.variance, half_width, table)?;
    Ok(SnPrimeEstimate { n, b, value, half_width, error_scale: nf.ln().powf(1.5) / nf.sqrt() })
}

/// `sum_{p prime} P{S_n = p}` from the exact law.
pub fn exact_prime_prob(spec: &ModelSpec, n: u64, table: &PrimeTable) -> Result<f64> {
    let law = exact_law(spec, n)?;
    let (_, hi) = law.window();
    if hi > table.limit() {
        return Err(domain(format!("sieve limit {} below support bound {hi}", table.limit())));
    }
    let mut s = Neumaier::default();
    for (k, p) in law.iter() {
        if table.is_prime(k) {
            s.add(p);
        }
    }
    Ok(s.sum())
}
