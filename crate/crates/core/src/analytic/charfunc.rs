use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::model::{moments, ModelSpec};

/// `Phi_n(t) = E exp(2 pi i t S_n)` with the modulus and phase bounds that
/// accompany it.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CharFuncValue {
    pub t: f64,
    pub value: Complex64,
    /// Sum of the principal logarithms of the factors.
    pub log_value: Complex64,
    /// `exp(-2 B_n sin^2(pi t))`
    pub modulus_bound: f64,
    /// `12 m_n (pi |t|)^3`
    pub phase_error_bound: f64,
}

fn check_t(t: f64) -> Result<()> {
    if !(t.abs() <= 0.5) {
        return Err(domain(format!("frequency t = {t} outside [-1/2, 1/2]")));
    }
    Ok(())
}

/// `prod_{j=start}^{n} (1 - p_j + p_j e^{2 pi i t})`.
pub fn char_func_exact(spec: &ModelSpec, n: u64, t: f64) -> Result<CharFuncValue> {
    check_t(t)?;
    let mom = moments(spec, n)?;
    let e = Complex64::from_polar(1.0, 2.0 * PI * t);
    let mut value = Complex64::new(1.0, 0.0);
    let mut log_value = Complex64::new(0.0, 0.0);
    for j in spec.start_index()..=n {
        let p = spec.weight_unchecked(j);
        let f = Complex64::new(1.0 - p, 0.0) + e * p;
        value *= f;
        log_value += f.ln();
    }
    let s = (PI * t).sin();
    Ok(CharFuncValue {
        t,
        value,
        log_value,
        modulus_bound: (-2.0 * mom.variance * s * s).exp(),
        phase_error_bound: 12.0 * mom.mean * (PI * t.abs()).powi(3),
    })
}

/// `exp(2 pi i t m_n - 2 B_n (pi t)^2)`.
pub fn char_func_gaussian(spec: &ModelSpec, n: u64, t: f64) -> Result<CharFuncValue> {
    check_t(t)?;
    let mom = moments(spec, n)?;
    let log_value = Complex64::new(-2.0 * mom.variance * (PI * t).powi(2), 2.0 * PI * t * mom.mean);
    let s = (PI * t).sin();
    Ok(CharFuncValue {
        t,
        value: log_value.exp(),
        log_value,
        modulus_bound: (-2.0 * mom.variance * s * s).exp(),
        phase_error_bound: 12.0 * mom.mean * (PI * t.abs()).powi(3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_zero_is_one() {
        let v = char_func_exact(&ModelSpec::cramer(), 100, 0.0).unwrap();
        assert_eq!(v.value, Complex64::new(1.0, 0.0));
        let g = char_func_gaussian(&ModelSpec::cramer(), 100, 0.0).unwrap();
        assert_eq!(g.value, Complex64::new(1.0, 0.0));
        assert_eq!(g.phase_error_bound, 0.0);
    }

    #[test]
    fn single_fair_coin_vanishes_at_half() {
        let v = char_func_exact(&ModelSpec::fair_coin(), 1, 0.5).unwrap();
        assert!(v.value.norm() < 1e-15);
    }

    #[test]
    fn rejects_out_of_period() {
        assert!(char_func_exact(&ModelSpec::cramer(), 10, 0.7).is_err());
    }
}
