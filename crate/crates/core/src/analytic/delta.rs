use std::f64::consts::{LN_2, PI};

use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::error::{domain, Result};
use crate::numeric::Neumaier;
use crate::primes::PrimeSet;

/// `P{Delta_k = m} = C(m-1, k-1) / 2^m`, the law of the `k`-th jump
/// instant of the fair-coin walk; zero for `m < k`.
pub fn delta_law(k: u64, m: u64) -> f64 {
    if k == 0 || m < k {
        return 0.0;
    }
    (ln_binomial(m - 1, k - 1) - m as f64 * LN_2).exp()
}

/// `P{Bin(n, 1/2) = k}`.
pub fn binomial_half_pmf(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    (ln_binomial(n, k) - n as f64 * LN_2).exp()
}

/// Gaussian approximation of `P{Delta_k = n}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DeltaLlt {
    pub k: u64,
    pub n: u64,
    /// `exp(-(n - 2k)^2 / (4k)) / (2 sqrt(pi k))`
    pub density: f64,
    /// `1 / k`
    pub error_scale: f64,
}

pub fn delta_llt(k: u64, n: u64) -> Result<DeltaLlt> {
    if k == 0 {
        return Err(domain("delta_llt needs k >= 1"));
    }
    let kf = k as f64;
    let x = n as f64 - 2.0 * kf;
    Ok(DeltaLlt {
        k,
        n,
        density: (-x * x / (4.0 * kf)).exp() / (2.0 * (PI * kf).sqrt()),
        error_scale: 1.0 / kf,
    })
}

/// Chernoff bound on `P{Delta_k > nu} = P{Bin(nu, 1/2) <= k - 1}`.
pub fn delta_tail_bound(k: u64, nu: u64) -> f64 {
    let a = (k as f64 - 1.0) / nu as f64;
    if a >= 0.5 {
        return 1.0;
    }
    if a <= 0.0 {
        return (-(nu as f64) * LN_2).exp();
    }
    let kl = a * (2.0 * a).ln() + (1.0 - a) * (2.0 * (1.0 - a)).ln();
    (-(nu as f64) * kl).exp()
}

/// `P{Delta_k in P} = sum_{nu in P, nu >= k} C(nu - 1, k - 1) / 2^nu`.
///
/// The series stops at the first `nu` with `P{Delta_k > nu} < tail_eps`;
/// the prime set must be known up to that point.
pub fn delta_prime_hit_prob(k: u64, set: &PrimeSet, tail_eps: f64) -> Result<f64> {
    if k == 0 {
        return Err(domain("delta_prime_hit_prob needs k >= 1"));
    }
    if !(tail_eps > 0.0 && tail_eps < 1.0) {
        return Err(domain("tail_eps must lie in (0, 1)"));
    }
    let mut nu_max = 2 * k;
    while delta_tail_bound(k, nu_max) >= tail_eps {
        nu_max += (nu_max / 8).max(1);
    }
    if set.coverage() < nu_max {
        return Err(domain(format!(
            "prime set known up to {} but the series needs {nu_max}",
            set.coverage()
        )));
    }
    let mut s = Neumaier::default();
    for &nu in set.range(k, nu_max) {
        s.add(delta_law(k, nu));
    }
    Ok(s.sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::sieve;

    #[test]
    fn first_jump_is_geometric() {
        for m in 1..60 {
            assert!((delta_law(1, m) - 0.5f64.powi(m as i32)).abs() < 1e-13 * 0.5f64.powi(m as i32));
        }
        assert!((delta_law(2, 2) - 0.25).abs() < 1e-15);
        assert_eq!(delta_law(3, 2), 0.0);
    }

    #[test]
    fn peak_of_llt() {
        let v = delta_llt(50, 100).unwrap();
        assert!((v.density - 1.0 / (2.0 * (50.0 * PI).sqrt())).abs() < 1e-16);
    }

    #[test]
    fn hit_probability_examples() {
        let t = sieve(10_000).unwrap();
        let two = PrimeSet::explicit(vec![2], &t).unwrap();
        assert!((delta_prime_hit_prob(1, &two, 1e-15).unwrap() - 0.25).abs() < 1e-16);
        assert_eq!(delta_prime_hit_prob(5, &PrimeSet::empty(), 1e-15).unwrap(), 0.0);
        let small = PrimeSet::filtered(&t, 50, |_| true);
        assert!(delta_prime_hit_prob(100, &small, 1e-15).is_err());
    }

    #[test]
    fn tail_bound_dominates_exact_tail() {
        let k = 20;
        for nu in [45u64, 60, 80] {
            let exact: f64 = (nu + 1..nu + 2000).map(|m| delta_law(k, m)).sum();
            assert!(exact <= delta_tail_bound(k, nu));
        }
    }
}
