use serde::Serialize;

use crate::error::{domain, Result};
use crate::numeric::{Neumaier, EULER_GAMMA};

/// `sum_{k<=n} k^{-s}` next to its closed asymptotic form.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ZetaPartialSum {
    pub n: u64,
    pub s: f64,
    pub sum: f64,
    /// `n^{1-s}/(1-s) + zeta(s)`, or `ln n + gamma` at `s = 1`.
    pub asymptotic: f64,
    /// `sum - asymptotic`
    pub residual: f64,
}

fn power_sum(n: u64, s: f64) -> f64 {
    let mut acc = Neumaier::default();
    // smallest terms first
    for k in (1..=n).rev() {
        acc.add((k as f64).powf(-s));
    }
    acc.sum()
}

pub fn zeta_partial_sum(n: u64, s: f64) -> Result<ZetaPartialSum> {
    if n == 0 {
        return Err(domain("n must be >= 1"));
    }
    if !(s > 0.0) {
        return Err(domain(format!("s must be positive, got {s}")));
    }
    let sum = power_sum(n, s);
    let nf = n as f64;
    let asymptotic = if s == 1.0 {
        nf.ln() + EULER_GAMMA
    } else {
        nf.powf(1.0 - s) / (1.0 - s) + zeta(s)?
    };
    Ok(ZetaPartialSum { n, s, sum, asymptotic, residual: sum - asymptotic })
}

const ZETA_BASE: u64 = 4096;

/// `zeta(s) = lim_{x -> inf} (sum_{k<=x} k^{-s} - x^{1-s}/(1-s))` for
/// `s > 0`, `s != 1`.
///
/// The bracket behaves like `zeta(s) + a x^{-s} + b x^{-s-1} + c x^{-s-3} + ...`;
/// evaluating it at `x = N, 2N, 4N, 8N` and solving for the constant
/// removes the first three correction terms.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 0.0) || s == 1.0 {
        return Err(domain(format!("zeta needs s > 0, s != 1, got {s}")));
    }
    let xs: Vec<u64> = (0..4).map(|i| ZETA_BASE << i).collect();
    let mut acc = Neumaier::default();
    let mut rows = Vec::with_capacity(4);
    let mut k = 1u64;
    for &x in &xs {
        while k <= x {
            acc.add((k as f64).powf(-s));
            k += 1;
        }
        let xf = x as f64;
        let f = acc.sum() - xf.powf(1.0 - s) / (1.0 - s);
        rows.push([1.0, xf.powf(-s), xf.powf(-s - 1.0), xf.powf(-s - 3.0), f]);
    }
    Ok(solve4(rows)[0])
}

/// Gaussian elimination with partial pivoting on an augmented 4x5 system.
fn solve4(mut a: Vec<[f64; 5]>) -> [f64; 4] {
    // scale columns to comparable magnitude
    let mut colscale = [1.0; 4];
    for (c, sc) in colscale.iter_mut().enumerate() {
        *sc = a.iter().map(|r| r[c].abs()).fold(0.0, f64::max);
        for r in a.iter_mut() {
            r[c] /= *sc;
        }
    }
    for c in 0..4 {
        let piv = (c..4).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        for r in c + 1..4 {
            let f = a[r][c] / a[c][c];
            for cc in c..5 {
                a[r][cc] -= f * a[c][cc];
            }
        }
    }
    let mut x = [0.0; 4];
    for c in (0..4).rev() {
        let mut v = a[c][4];
        for cc in c + 1..4 {
            v -= a[c][cc] * x[cc];
        }
        x[c] = v / a[c][c];
    }
    for c in 0..4 {
        x[c] /= colscale[c];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_half() {
        assert!((zeta(0.5).unwrap() - -1.460_354_508_809_586_8).abs() < 1e-10);
        assert!((zeta(2.0).unwrap() - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-10);
        assert!(zeta(1.0).is_err());
    }

    #[test]
    fn four_terms() {
        let z = zeta_partial_sum(4, 0.5).unwrap();
        let direct = 1.0 + 2f64.sqrt().recip() + 3f64.sqrt().recip() + 0.5;
        assert!((z.sum - direct).abs() < 1e-15);
    }

    #[test]
    fn harmonic_asymptotic() {
        let z = zeta_partial_sum(1_000_000, 1.0).unwrap();
        assert!(z.residual.abs() < 1e-5);
    }

    #[test]
    fn residual_shrinks() {
        let r: Vec<f64> = [1_000u64, 10_000, 100_000]
            .iter()
            .map(|&n| zeta_partial_sum(n, 0.5).unwrap().residual.abs())
            .collect();
        assert!(r[0] > r[1] && r[1] > r[2]);
    }
}
