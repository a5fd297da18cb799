use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, numeric, Result};
use crate::model::{moments, ModelSpec};
use crate::numeric::Neumaier;

/// Series terms below this magnitude end the summation.
pub const THETA_CUTOFF: f64 = 1e-18;
const THETA_MAX_TERMS: u64 = 50_000_000;

/// A value of the periodized Gaussian
/// `Theta(d; mean, var) = sum_{l in Z} cos(2 pi l mean / d) exp(-2 pi^2 var l^2 / d^2)`,
/// for which `Theta / d` approximates `P{d | S}` when `S` has the given
/// mean and variance.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ThetaValue {
    pub d: u64,
    pub location: f64,
    pub scale: f64,
    pub value: f64,
    /// Bound on the discarded tail.
    pub truncation_bound: f64,
    /// Number of `+-l` pairs summed.
    pub terms: u64,
}

/// `cos(2 pi x l / d)` with the phase reduced modulo one period first.
fn phase_cos(location: f64, l: u64, d: u64) -> f64 {
    let r = location.rem_euclid(d as f64);
    let turns = (r * l as f64).rem_euclid(d as f64) / d as f64;
    (2.0 * PI * turns).cos()
}

/// Sums the `l` and `-l` terms together (they are complex conjugates), so
/// the result is real by construction.
pub fn theta(d: u64, location: f64, scale: f64) -> Result<ThetaValue> {
    if d == 0 {
        return Err(domain("modulus must be >= 1"));
    }
    if !(scale > 0.0) || !location.is_finite() {
        return Err(domain(format!("theta needs scale > 0 and finite location, got ({location}, {scale})")));
    }
    let a = 2.0 * PI * PI * scale / (d as f64 * d as f64);
    let mut s = Neumaier::default();
    s.add(1.0);
    let mut l = 1u64;
    loop {
        let g = 2.0 * (-a * (l * l) as f64).exp();
        if g < THETA_CUTOFF {
            // geometric tail bound: ratios of successive terms only shrink
            let ratio = (-a * (2 * l + 1) as f64).exp();
            return Ok(ThetaValue {
                d,
                location,
                scale,
                value: s.sum(),
                truncation_bound: g / (1.0 - ratio).max(f64::MIN_POSITIVE),
                terms: l - 1,
            });
        }
        s.add(g * phase_cos(location, l, d));
        l += 1;
        if l > THETA_MAX_TERMS {
            return Err(numeric(format!("theta series did not reach cutoff (d = {d}, scale = {scale})")));
        }
    }
}

/// The fair-coin theta `Theta(d, n) = theta(d, n/2, n/4)`.
pub fn fair_coin_theta(d: u64, n: u64) -> Result<ThetaValue> {
    theta(d, n as f64 / 2.0, n as f64 / 4.0)
}

/// The one-sided series `sum_{l >= 0} cos(2 m pi l / d) exp(-B pi^2 l^2 / (2 d^2))`.
///
/// Kept for comparison only: it is not the periodization of a Gaussian
/// with variance `B` and does not approximate `d P{d | S_n}`.
pub fn theta_one_sided(d: u64, m: f64, b: f64) -> Result<f64> {
    if d == 0 || !(b > 0.0) {
        return Err(domain("theta_one_sided needs d >= 1 and B > 0"));
    }
    let a = PI * PI * b / (2.0 * d as f64 * d as f64);
    let mut s = Neumaier::default();
    for l in 0..THETA_MAX_TERMS {
        let g = (-a * (l * l) as f64).exp();
        if g < THETA_CUTOFF {
            return Ok(s.sum());
        }
        s.add(g * phase_cos(m, l, d));
    }
    Err(numeric("one-sided theta series did not converge"))
}

/// `Theta(d; m_n, B_n) / d`, the Gaussian estimate of `P{d | S_n}`.
pub fn divisibility_estimate(spec: &ModelSpec, d: u64, n: u64) -> Result<f64> {
    if d < 2 || d > n {
        return Err(domain(format!("divisibility estimate needs 2 <= d <= n, got d = {d}, n = {n}")));
    }
    let mom = moments(spec, n)?;
    Ok(theta(d, mom.mean, mom.variance)?.value / d as f64)
}

/// `sqrt(2/(pi n)) sum_{z = 0 mod d} exp(-(2z - n)^2 / (2n))`, summed over
/// all integers `z` until terms drop below the theta cutoff.
pub fn poisson_gaussian_sum(d: u64, n: u64) -> f64 {
    let nf = n as f64;
    let c = (2.0 / (PI * nf)).sqrt();
    let term = |z: i64| c * (-(2.0 * z as f64 - nf).powi(2) / (2.0 * nf)).exp();
    let centre = (nf / 2.0 / d as f64).round() as i64;
    let mut s = Neumaier::default();
    s.add(term(centre * d as i64));
    for dir in [-1i64, 1] {
        let mut q = centre + dir;
        loop {
            let z = q * d as i64;
            let t = term(z);
            s.add(t);
            if t < THETA_CUTOFF * 1e-6 && (2 * z - n as i64).abs() as f64 > nf.sqrt() {
                break;
            }
            q += dir;
        }
    }
    s.sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::exact_law_mod;

    #[test]
    fn modulus_one_is_one() {
        let v = theta(1, 12.3, 1e4).unwrap();
        assert!((v.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_term_truncation() {
        let d = 7;
        let b = 45.0 * d as f64 * d as f64 / (PI * PI) / 2.0 + 1.0;
        let m = 3.3;
        let v = theta(d, m, b).unwrap();
        let two = 1.0 + 2.0 * (2.0 * PI * m / d as f64).cos() * (-2.0 * PI * PI * b / 49.0).exp();
        assert!((v.value - two).abs() < 1e-15);
    }

    #[test]
    fn poisson_identity() {
        for (d, n) in [(3u64, 100u64), (17, 1000), (5, 37)] {
            let lhs = fair_coin_theta(d, n).unwrap().value / d as f64;
            assert!((lhs - poisson_gaussian_sum(d, n)).abs() < 1e-12, "d={d} n={n}");
        }
    }

    #[test]
    fn fair_coin_parity() {
        let exact = exact_law_mod(&ModelSpec::fair_coin(), 1000, 2).unwrap()[0];
        let est = divisibility_estimate(&ModelSpec::fair_coin(), 2, 1000).unwrap();
        assert!((exact - est).abs() <= 1e-4);
    }

    #[test]
    fn one_sided_series_is_off() {
        let spec = ModelSpec::cramer();
        let n = 2000;
        let mom = moments(&spec, n).unwrap();
        let d = 97;
        let exact = exact_law_mod(&spec, n, d).unwrap()[0];
        let two_sided = divisibility_estimate(&spec, d, n).unwrap();
        let one_sided = theta_one_sided(d, mom.mean, mom.variance).unwrap() / d as f64;
        assert!((two_sided - exact).abs() < 0.02 * exact);
        assert!((one_sided - exact).abs() > 0.2 * exact);
    }
}
