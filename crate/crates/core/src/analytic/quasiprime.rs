use crate::error::{domain, Result};
use crate::numeric::{Neumaier, EULER_GAMMA};
use crate::primes::{is_quasiprime, PrimeTable};

use super::delta::binomial_half_pmf;

/// `e^{-gamma} / ln zeta`.
pub fn quasiprime_asymptotic(zeta: f64) -> Result<f64> {
    if !(zeta > 1.0) {
        return Err(domain(format!("quasiprime asymptotic needs zeta > 1, got {zeta}")));
    }
    Ok((-EULER_GAMMA).exp() / zeta.ln())
}

/// `prod_{p <= zeta} (1 - 1/p)`, the density of `zeta`-quasiprimes.
pub fn mertens_product(zeta: f64, table: &PrimeTable) -> Result<f64> {
    let z = zeta.max(0.0).floor() as u64;
    if z > table.limit() {
        return Err(domain(format!("mertens product needs primes up to {z}")));
    }
    Ok(table.primes_upto(z).map(|p| 1.0 - 1.0 / p as f64).product())
}

/// Exact `P{P^-(B_n) > zeta}` for `B_n ~ Bin(n, 1/2)`, summed over the
/// binomial masses within 40 standard deviations of `n/2`.
pub fn fair_coin_quasiprime_prob(n: u64, zeta: f64, table: &PrimeTable) -> Result<f64> {
    if n == 0 {
        return Err(domain("n must be >= 1"));
    }
    let half = n as f64 / 2.0;
    let w = 40.0 * (n as f64).sqrt() / 2.0;
    let lo = (half - w).floor().max(0.0) as u64;
    let hi = ((half + w).ceil() as u64).min(n);
    let mut s = Neumaier::default();
    for m in lo..=hi {
        if is_quasiprime(m, zeta, table)? {
            s.add(binomial_half_pmf(n, m));
        }
    }
    Ok(s.sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::sieve;

    #[test]
    fn asymptotic_values() {
        let e = std::f64::consts::E;
        assert!((quasiprime_asymptotic(e).unwrap() - 0.561_459_483_6).abs() < 1e-10);
        assert!((quasiprime_asymptotic(e * e).unwrap() - 0.561_459_483_6 / 2.0).abs() < 1e-10);
        assert!(quasiprime_asymptotic(1.0).is_err());
    }

    #[test]
    fn small_n_by_enumeration() {
        let t = sieve(100).unwrap();
        // Bin(4, 1/2): 0,1 quasiprime; 2,4 even; 3 > 2
        let p = fair_coin_quasiprime_prob(4, 2.0, &t).unwrap();
        assert!((p - (1.0 + 4.0 + 4.0) / 16.0).abs() < 1e-15);
        assert!((mertens_product(10.0, &t).unwrap() - 0.5 * 2.0 / 3.0 * 0.8 * 6.0 / 7.0).abs() < 1e-15);
    }
}
