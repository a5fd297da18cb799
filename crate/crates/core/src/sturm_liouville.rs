//! Principal eigenvalue of `psi'' - x psi' = -lambda psi` on `[-z, z]` with
//! `psi(+-z) = 0`.
//!
//! Multiplying by `w(x) = exp(-x^2/2)` gives the self-adjoint form
//! `(w psi')' = -lambda w psi`. Central differences turn it into the
//! generalized problem `A u = lambda W u` with `A` symmetric tridiagonal
//! and `W = diag(w)`, and the similarity `W^{-1/2} A W^{-1/2}` makes it a
//! standard symmetric tridiagonal problem. Sturm-sequence bisection on it
//! brackets the smallest eigenvalue; inverse iteration on the pencil then
//! gives the eigenvector, whose Rayleigh quotient is the eigenvalue.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, numeric, Result};
use crate::experiments::CsvTable;

pub const Z_MIN: f64 = 0.01;
pub const Z_MAX: f64 = 10.0;
pub const DEFAULT_GRID_POINTS: usize = 20_001;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EigenProblem {
    /// Half-width of the interval.
    pub z: f64,
    /// Grid points on `[-z, z]`, odd so that `0` is a node.
    pub grid_points: usize,
}

impl EigenProblem {
    pub fn new(z: f64) -> Self {
        EigenProblem { z, grid_points: DEFAULT_GRID_POINTS }
    }

    pub fn with_grid(z: f64, grid_points: usize) -> Self {
        EigenProblem { z, grid_points }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.z / (self.grid_points - 1) as f64
    }

    fn validate(&self) -> Result<()> {
        if !(Z_MIN..=Z_MAX).contains(&self.z) {
            return Err(domain(format!("z = {} outside [{Z_MIN}, {Z_MAX}]", self.z)));
        }
        if self.grid_points < 3 || self.grid_points % 2 == 0 {
            return Err(domain(format!("grid_points must be odd and >= 3, got {}", self.grid_points)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenResult {
    pub z: f64,
    /// Extrapolated eigenvalue.
    pub lambda: f64,
    /// Eigenvalues of the two discretizations (`N` and `2N - 1` points).
    pub lambda_coarse: f64,
    pub lambda_fine: f64,
    /// Grid nodes `x_i` of the `N`-point grid.
    #[serde(skip)]
    pub grid: Vec<f64>,
    /// `psi(x_i)`, scaled to `psi(0) = 1`; zero at both ends.
    #[serde(skip)]
    pub eigenfunction: Vec<f64>,
    /// `max |psi'' - x psi' + lambda psi|` over interior nodes.
    pub residual: f64,
    /// `lambda 4 z^2 / pi^2`
    pub asymptotic_ratio: f64,
}

/// `pi^2 / (4 z^2)`, the small-`z` asymptotic of the principal eigenvalue.
pub fn lambda_asymptotic(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(domain(format!("z must be positive, got {z}")));
    }
    Ok(PI * PI / (4.0 * z * z))
}

/// The symmetric tridiagonal matrix `W^{-1/2} A W^{-1/2}` on interior nodes.
struct Tridiagonal {
    diag: Vec<f64>,
    /// `off[i]` couples unknowns `i` and `i + 1`.
    off: Vec<f64>,
}

fn node(z: f64, h: f64, i: usize) -> f64 {
    -z + h * i as f64
}

fn assemble(z: f64, n: usize) -> Tridiagonal {
    let h = 2.0 * z / (n - 1) as f64;
    let h2 = h * h;
    let m = n - 2;
    let mut diag = Vec::with_capacity(m);
    let mut off = Vec::with_capacity(m.saturating_sub(1));
    for i in 1..=m {
        let x = node(z, h, i);
        let xl = x - 0.5 * h;
        let xr = x + 0.5 * h;
        // w(x +- h/2) / w(x), as exponent differences
        let rl = ((x * x - xl * xl) / 2.0).exp();
        let rr = ((x * x - xr * xr) / 2.0).exp();
        diag.push((rl + rr) / h2);
        if i < m {
            let xn = x + h;
            // w(x + h/2) / sqrt(w(x) w(x + h))
            off.push(-((x * x + xn * xn) / 4.0 - xr * xr / 2.0).exp() / h2);
        }
    }
    Tridiagonal { diag, off }
}

impl Tridiagonal {
    /// Number of eigenvalues below `mu` (negative pivots of `LDL^T`).
    fn count_below(&self, mu: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.diag.len() {
            let b2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            d = self.diag[i] - mu - if i == 0 { 0.0 } else { b2 / d };
            if d == 0.0 {
                d = -f64::EPSILON * (self.diag[i].abs() + mu.abs());
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn smallest_eigenvalue(&self) -> Result<f64> {
        let mut hi = self
            .diag
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let r = self.off.get(i).map_or(0.0, |b| b.abs());
                a + l + r
            })
            .fold(0.0, f64::max);
        let mut lo = 0.0;
        if self.count_below(hi) == 0 {
            return Err(numeric("Gershgorin bound does not enclose the spectrum"));
        }
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// The pencil `A - sigma W` in the original unknowns `psi`, on interior
/// nodes. `A` is the stiffness matrix of `-(w psi')'`.
struct Pencil {
    h: f64,
    /// `w(x_i)` for all `N` nodes.
    w: Vec<f64>,
    /// `w(x_i + h/2)` for `i = 0..N-1`.
    w_half: Vec<f64>,
}

impl Pencil {
    fn new(z: f64, n: usize) -> Self {
        let h = 2.0 * z / (n - 1) as f64;
        let w = (0..n).map(|i| (-node(z, h, i).powi(2) / 2.0).exp()).collect();
        let w_half = (0..n - 1).map(|i| (-(node(z, h, i) + 0.5 * h).powi(2) / 2.0).exp()).collect();
        Pencil { h, w, w_half }
    }

    /// Solves `(A - sigma W) y = W v` on interior nodes (Thomas algorithm);
    /// `v` and the result carry zero boundary entries.
    fn solve(&self, sigma: f64, v: &[f64]) -> Vec<f64> {
        let n = self.w.len();
        let h2 = self.h * self.h;
        let m = n - 2;
        let mut c = vec![0.0; m];
        let mut y = vec![0.0; m];
        for k in 0..m {
            let i = k + 1;
            let diag = (self.w_half[i - 1] + self.w_half[i]) / h2 - sigma * self.w[i];
            let lower = -self.w_half[i - 1] / h2;
            let upper = -self.w_half[i] / h2;
            let rhs = self.w[i] * v[i];
            if k == 0 {
                c[k] = upper / diag;
                y[k] = rhs / diag;
            } else {
                let denom = diag - lower * c[k - 1];
                c[k] = upper / denom;
                y[k] = (rhs - lower * y[k - 1]) / denom;
            }
        }
        for k in (0..m.saturating_sub(1)).rev() {
            y[k] -= c[k] * y[k + 1];
        }
        let mut out = vec![0.0; n];
        out[1..n - 1].copy_from_slice(&y);
        out
    }

    /// `psi^T A psi / psi^T W psi`, with the numerator in its
    /// summed-by-parts form `sum w_{i+1/2} (psi_{i+1} - psi_i)^2 / h^2`.
    fn rayleigh(&self, psi: &[f64]) -> f64 {
        let num: f64 = self.w_half.iter().zip(psi.windows(2)).map(|(w, p)| w * (p[1] - p[0]).powi(2)).sum();
        let den: f64 = self.w.iter().zip(psi).map(|(w, p)| w * p * p).sum();
        num / (self.h * self.h * den)
    }
}

const INVERSE_ITERATION_CAP: usize = 200;

/// Smallest eigenvalue and eigenvector on an `n`-point grid.
///
/// Bisection brackets the eigenvalue; inverse iteration with a shift below
/// it yields the eigenvector, and its Rayleigh quotient is the returned
/// eigenvalue (bisection alone resolves it only to about `eps / h^2`).
fn solve_grid(z: f64, n: usize) -> Result<(f64, Vec<f64>)> {
    let t = assemble(z, n);
    let bis = t.smallest_eigenvalue()?;
    let noise = 64.0 * f64::EPSILON * t.diag.iter().fold(0.0f64, |a, &b| a.max(b));
    let sigma = if bis > 1e3 * noise { 0.9 * bis } else { 0.0 };
    let pencil = Pencil::new(z, n);
    let mut psi = vec![1.0; n];
    psi[0] = 0.0;
    psi[n - 1] = 0.0;
    let mut prev = f64::INFINITY;
    for it in 0..INVERSE_ITERATION_CAP {
        let y = pencil.solve(sigma, &psi);
        let scale = y[n / 2];
        psi = y.iter().map(|v| v / scale).collect();
        let lambda = pencil.rayleigh(&psi);
        // round-off can leave a two-cycle a few ulp wide
        if (lambda - prev).abs() <= 64.0 * f64::EPSILON * lambda && it > 0 {
            if t.count_below(lambda * (1.0 + 1e-6) + noise) != 1 {
                return Err(numeric(format!(
                    "inverse iteration converged to a non-principal eigenvalue {lambda} (bisection {bis})"
                )));
            }
            return Ok((lambda, psi));
        }
        prev = lambda;
    }
    Err(numeric(format!(
        "inverse iteration did not settle after {INVERSE_ITERATION_CAP} steps (z = {z}, N = {n}, last {prev})"
    )))
}

fn discrete_lambda(z: f64, n: usize) -> Result<f64> {
    Ok(solve_grid(z, n)?.0)
}

/// Principal eigenvalue, refined by Richardson extrapolation over grids
/// with `N` and `2N - 1` points.
pub fn principal_eigenvalue(problem: EigenProblem) -> Result<EigenResult> {
    problem.validate()?;
    let z = problem.z;
    let n = problem.grid_points;
    let (lambda_coarse, mut psi) = solve_grid(z, n)?;
    let lambda_fine = discrete_lambda(z, 2 * n - 1)?;
    let lambda = lambda_fine + (lambda_fine - lambda_coarse) / 3.0;

    let h = problem.spacing();
    let grid: Vec<f64> = (0..n).map(|i| node(z, h, i)).collect();
    let centre = psi[n / 2];
    if centre == 0.0 || !centre.is_finite() {
        return Err(numeric("eigenvector vanishes at the centre"));
    }
    psi.iter_mut().for_each(|p| *p /= centre);
    if psi[1..n - 1].iter().any(|&p| p <= 0.0) {
        return Err(numeric("principal eigenvector changes sign"));
    }

    let mut residual: f64 = 0.0;
    for i in 1..n - 1 {
        let d2 = (psi[i + 1] - 2.0 * psi[i] + psi[i - 1]) / (h * h);
        let d1 = (psi[i + 1] - psi[i - 1]) / (2.0 * h);
        residual = residual.max((d2 - grid[i] * d1 + lambda_coarse * psi[i]).abs());
    }

    Ok(EigenResult {
        z,
        lambda,
        lambda_coarse,
        lambda_fine,
        grid,
        eigenfunction: psi,
        residual,
        asymptotic_ratio: lambda * 4.0 * z * z / (PI * PI),
    })
}

/// Discrete eigenvalue on an `n`-point grid, without extrapolation.
pub fn discrete_eigenvalue(problem: EigenProblem) -> Result<f64> {
    problem.validate()?;
    discrete_lambda(problem.z, problem.grid_points)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CurvePoint {
    pub z: f64,
    pub lambda: f64,
    pub residual: f64,
    pub asymptotic_ratio: f64,
}

/// `lambda(z)` over a strictly increasing grid, solved in parallel.
pub fn lambda_curve(z_grid: &[f64], grid_points: usize) -> Result<Vec<CurvePoint>> {
    if z_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(domain("z grid must be strictly increasing"));
    }
    z_grid
        .par_iter()
        .map(|&z| {
            let r = principal_eigenvalue(EigenProblem::with_grid(z, grid_points))?;
            Ok(CurvePoint { z, lambda: r.lambda, residual: r.residual, asymptotic_ratio: r.asymptotic_ratio })
        })
        .collect()
}

/// CSV table `z,lambda,residual,asymptotic_ratio`.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut t = CsvTable::new(&["z", "lambda", "residual", "asymptotic_ratio"]);
    for p in points {
        t.push(crate::row![p.z, p.lambda, p.residual, p.asymptotic_ratio]);
    }
    t.render()
}

/// Weighted Rayleigh quotient `int w phi'^2 / int w phi^2` on `[-z, z]`
/// by the trapezoid rule.
pub fn rayleigh_quotient(z: f64, phi: impl Fn(f64) -> f64, dphi: impl Fn(f64) -> f64, nodes: usize) -> f64 {
    let h = 2.0 * z / (nodes - 1) as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..nodes {
        let x = -z + h * i as f64;
        let wt = if i == 0 || i == nodes - 1 { 0.5 } else { 1.0 } * (-x * x / 2.0).exp();
        num += wt * dphi(x).powi(2);
        den += wt * phi(x).powi(2);
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_at_one() {
        let r = principal_eigenvalue(EigenProblem::new(1.0)).unwrap();
        assert!((r.lambda - 2.0).abs() < 1e-6, "{}", r.lambda);
        let dev = r
            .grid
            .iter()
            .zip(&r.eigenfunction)
            .map(|(x, p)| (p - (1.0 - x * x)).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-5, "{dev}");
        assert!(r.residual <= 1e-4 * r.lambda);
    }

    #[test]
    fn asymptotic_values() {
        assert!((lambda_asymptotic(1.0).unwrap() - PI * PI / 4.0).abs() < 1e-15);
        assert!((lambda_asymptotic(0.5).unwrap() - PI * PI).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_problems() {
        assert!(principal_eigenvalue(EigenProblem::with_grid(1.0, 100)).is_err());
        assert!(principal_eigenvalue(EigenProblem::with_grid(20.0, 101)).is_err());
        assert!(lambda_curve(&[1.0, 1.0], 101).is_err());
    }

    #[test]
    fn symmetric_eigenfunction() {
        let r = principal_eigenvalue(EigenProblem::with_grid(1.7, 2001)).unwrap();
        let n = r.eigenfunction.len();
        for i in 0..n / 2 {
            assert!((r.eigenfunction[i] - r.eigenfunction[n - 1 - i]).abs() < 1e-10);
        }
    }
}
