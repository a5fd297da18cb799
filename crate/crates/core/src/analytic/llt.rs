use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::model::{exact_law, moments, ModelSpec};

/// Gaussian local approximation of `P{S_n = kappa}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LltEstimate {
    pub kappa: i64,
    /// `(2 pi B_n)^{-1/2} exp(-(kappa - m_n)^2 / (2 B_n))`
    pub density: f64,
    /// `(ln n)^{3/2} / n`
    pub error_scale: f64,
    /// `|kappa - m_n| <= c_win n^{3/4} / ln n`
    pub in_validity_window: bool,
}

/// Half-width `c_win n^{3/4} / ln n` of the validity window.
pub fn llt_window(n: u64, c_win: f64) -> f64 {
    let nf = n as f64;
    c_win * nf.powf(0.75) / nf.ln()
}

pub fn llt_gaussian(spec: &ModelSpec, n: u64, kappa: i64, c_win: f64) -> Result<LltEstimate> {
    let mom = moments(spec, n)?;
    Ok(gaussian_at(n, mom.mean, mom.variance, kappa, c_win))
}

fn gaussian_at(n: u64, m: f64, b: f64, kappa: i64, c_win: f64) -> LltEstimate {
    let x = kappa as f64 - m;
    let nf = n as f64;
    LltEstimate {
        kappa,
        density: (-x * x / (2.0 * b)).exp() / (2.0 * PI * b).sqrt(),
        error_scale: nf.ln().powf(1.5) / nf,
        in_validity_window: x.abs() <= llt_window(n, c_win),
    }
}

/// Largest LLT error over the validity window, measured against the
/// exact law.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LltError {
    pub n: u64,
    pub sup_error: f64,
    pub argmax: i64,
    pub error_scale: f64,
    /// `sup_error / error_scale`
    pub scaled: f64,
    pub window_points: usize,
}

pub fn llt_sup_error(spec: &ModelSpec, n: u64, c_win: f64) -> Result<LltError> {
    let law = exact_law(spec, n)?;
    let mom = moments(spec, n)?;
    let w = llt_window(n, c_win);
    let lo = (mom.mean - w).ceil().max(0.0) as i64;
    let hi = (mom.mean + w).floor() as i64;
    if hi < lo {
        return Err(domain(format!("validity window empty at n = {n}")));
    }
    let mut best = (0.0f64, lo);
    for kappa in lo..=hi {
        let g = gaussian_at(n, mom.mean, mom.variance, kappa, c_win);
        let err = (law.prob(kappa) - g.density).abs();
        if err > best.0 {
            best = (err, kappa);
        }
    }
    let scale = (n as f64).ln().powf(1.5) / n as f64;
    Ok(LltError {
        n,
        sup_error: best.0,
        argmax: best.1,
        error_scale: scale,
        scaled: best.0 / scale,
        window_points: (hi - lo + 1) as usize,
    })
}

/// `sum_k min(P{X = v_k}, P{X = v_{k+1}})` for a law on a lattice, given
/// as `(point, mass)` pairs. The span is the smallest gap between listed
/// points; masses missing from the list are zero.
pub fn lattice_span_characteristic(law: &[(f64, f64)]) -> f64 {
    let mut pts: Vec<(f64, f64)> = law.iter().copied().filter(|&(_, m)| m > 0.0).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.len() < 2 {
        return 0.0;
    }
    let span = pts.windows(2).map(|w| w[1].0 - w[0].0).fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * span.max(1.0);
    pts.windows(2)
        .filter(|w| (w[1].0 - w[0].0 - span).abs() <= tol)
        .map(|w| w[0].1.min(w[1].1))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_density() {
        let spec = ModelSpec::cramer();
        let mom = moments(&spec, 1000).unwrap();
        let e = llt_gaussian(&spec, 1000, mom.mean.round() as i64, 1.0).unwrap();
        let peak = (2.0 * PI * mom.variance).sqrt().recip();
        assert!(e.density <= peak && e.density >= 0.9 * peak);
        assert!(e.in_validity_window);
        let far = llt_gaussian(&spec, 1000, (mom.mean + 200.0) as i64, 1.0).unwrap();
        assert!(!far.in_validity_window);
    }

    #[test]
    fn span_characteristic_examples() {
        assert_eq!(lattice_span_characteristic(&[(0.0, 0.5), (1.0, 0.5)]), 0.5);
        assert_eq!(lattice_span_characteristic(&[(3.0, 1.0)]), 0.0);
        for j in [8u64, 100, 10_000] {
            let p = 1.0 / (j as f64).ln();
            let v = lattice_span_characteristic(&[(0.0, 1.0 - p), (1.0, p)]);
            assert!((v - p).abs() < 1e-15);
        }
        // gaps in the support do not count as adjacent
        assert_eq!(lattice_span_characteristic(&[(0.0, 0.4), (1.0, 0.2), (3.0, 0.4)]), 0.2);
    }
}
