//! Frozen constants for the rate checks whose absolute constants are not
//! known in closed form.
//!
//! Each constant is measured once on a fixed calibration grid by
//! [`measure`] and stored in `calibration/constants.json`. Checks assert
//! against `HEADROOM` times the frozen value, usually at grid points other
//! than the calibration point. A test re-measures every constant and
//! compares it with the file.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::analytic::{delta_prime_hit_prob, fair_coin_quasiprime_prob, quasiprime_asymptotic, sn_prime_estimate};
use crate::error::{Error, Result};
use crate::experiments::arith::{fair_coin_prime_prob, power_of_two_primes, AvoidanceConfig};
use crate::experiments::limits::{delta_llt_scaled, divisibility_scaled, fair_coin_llt_scaled};
use crate::model::{exact_law, moments, ModelSpec};
use crate::primes::{sieve, PrimeTable};
use crate::stochastic::gap_event_prob;

pub const CALIBRATION_VERSION: u32 = 1;
/// Safety factor applied to every frozen constant.
pub const HEADROOM: f64 = 2.0;

const FROZEN: &str = include_str!("../calibration/constants.json");

/// Moduli of the divisibility grid.
pub const DIVISIBILITY_MODULI: [u64; 5] = [2, 3, 5, 17, 97];
/// `zeta` values of the fair-coin quasiprime check.
pub const QUASIPRIME_ZETAS: [f64; 3] = [5.0, 10.0, 20.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub value: f64,
    /// Where it was measured.
    pub grid: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub version: u32,
    /// `E(n) n / (ln n)^{3/2}`, Cramér LLT error over the validity window.
    pub llt: Constant,
    /// Envelope of the Gaussian prime-sum error, scaled by `sqrt n / (ln n)^{3/2}`.
    pub sn_prime: Constant,
    /// `k sup_n |P{Delta_k = n} - gaussian|`.
    pub delta_llt: Constant,
    /// Fair-coin divisibility error times `n^{3/2} / (ln n)^{5/2}`.
    pub fair_divisibility: Constant,
    /// Cramér divisibility error times `n / (ln n)^3`.
    pub cramer_divisibility: Constant,
    /// Fair-coin LLT error times `n^{3/2}`.
    pub fair_llt: Constant,
    /// `C0` in `|P{P^-(B_n) > zeta} - e^{-gamma}/ln zeta| <= C0 / ln^2 zeta`.
    pub fair_quasiprime: Constant,
    /// `K` in `P{B_n prime} <= K ln ln n / ln n`.
    pub fair_prime: Constant,
    /// `m P(E_m)` at `c = 1`.
    pub gap_scaling: Constant,
    /// `max_k P{Delta_k in P} k^beta` for the power-of-two primes.
    pub avoidance: Constant,
}

impl Calibration {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration serializes") + "\n"
    }

    /// Entries as `(name, constant)` pairs.
    pub fn entries(&self) -> Vec<(&'static str, &Constant)> {
        vec![
            ("llt", &self.llt),
            ("sn_prime", &self.sn_prime),
            ("delta_llt", &self.delta_llt),
            ("fair_divisibility", &self.fair_divisibility),
            ("cramer_divisibility", &self.cramer_divisibility),
            ("fair_llt", &self.fair_llt),
            ("fair_quasiprime", &self.fair_quasiprime),
            ("fair_prime", &self.fair_prime),
            ("gap_scaling", &self.gap_scaling),
            ("avoidance", &self.avoidance),
        ]
    }
}

/// The constants shipped with this build.
pub fn frozen() -> &'static Calibration {
    static CELL: OnceLock<Calibration> = OnceLock::new();
    CELL.get_or_init(|| {
        let c: Calibration = serde_json::from_str(FROZEN).expect("calibration file parses");
        assert_eq!(c.version, CALIBRATION_VERSION, "calibration file version mismatch");
        c
    })
}

fn constant(value: f64, grid: &str) -> Constant {
    Constant { value, grid: grid.to_string() }
}

/// `(sum_{|p - m_n| <= h} |P{S_n = p} - g(p)| + P{|S_n - m_n| > h}) sqrt n / (ln n)^{3/2}`
/// with `g` the Gaussian density and `h = sqrt(2 b B_n ln n)`: a bound on
/// the prime-sum error that does not benefit from cancellation.
pub fn sn_prime_envelope(n: u64, b: f64, table: &PrimeTable) -> Result<f64> {
    let spec = ModelSpec::cramer();
    let law = exact_law(&spec, n)?;
    let mom = moments(&spec, n)?;
    let est = sn_prime_estimate(&spec, n, b, table)?;
    let h = est.half_width;
    let mut inside = 0.0;
    let mut outside = 0.0;
    for (k, p) in law.iter() {
        let x = k as f64 - mom.mean;
        if x.abs() <= h {
            if table.is_prime(k) {
                let g = (-x * x / (2.0 * mom.variance)).exp() / (2.0 * std::f64::consts::PI * mom.variance).sqrt();
                inside += (p - g).abs();
            }
        } else {
            outside += p;
        }
    }
    Ok((inside + outside + law.truncated_mass()) / est.error_scale)
}

/// Re-measures every constant on its calibration grid.
pub fn measure() -> Result<Calibration> {
    let cramer = ModelSpec::cramer();
    let fair = ModelSpec::fair_coin();
    let table = sieve(100_000)?;

    let llt = crate::analytic::llt_sup_error(&cramer, 500, 1.0)?.scaled;
    let sn_prime = sn_prime_envelope(1000, 1.0, &table)?;
    let delta_llt = delta_llt_scaled(20)?;
    let mut fair_div = 0.0f64;
    let mut cramer_div = 0.0f64;
    for d in DIVISIBILITY_MODULI {
        fair_div = fair_div.max(divisibility_scaled(&fair, d, 100)?.0);
        cramer_div = cramer_div.max(divisibility_scaled(&cramer, d, 100)?.0);
    }
    let fair_llt = fair_coin_llt_scaled(100);
    let mut c0 = 0.0f64;
    for z in QUASIPRIME_ZETAS {
        let p = fair_coin_quasiprime_prob(10_000, z, &table)?;
        c0 = c0.max((p - quasiprime_asymptotic(z)?).abs() * z.ln().powi(2));
    }
    let nf = 10_000f64;
    let fair_prime = fair_coin_prime_prob(10_000, &table)? * nf.ln() / nf.ln().ln();
    let gap_scaling = 1000.0 * gap_event_prob(1000, 1.0)?;
    let set = power_of_two_primes(&table, table.limit())?;
    let cfg = AvoidanceConfig::cubes(6, 0.0);
    let mut avoid = 0.0f64;
    for &k in &cfg.schedule {
        avoid = avoid.max(delta_prime_hit_prob(k, &set, 1e-15)? * (k as f64).powf(cfg.beta));
    }
    Ok(Calibration {
        version: CALIBRATION_VERSION,
        llt: constant(llt, "cramer n=500, c_win=1"),
        sn_prime: constant(sn_prime, "cramer n=1000, b=1, envelope"),
        delta_llt: constant(delta_llt, "k=20"),
        fair_divisibility: constant(fair_div, "fair coin n=100, d in {2,3,5,17,97}"),
        cramer_divisibility: constant(cramer_div, "cramer n=100, d in {2,3,5,17,97}"),
        fair_llt: constant(fair_llt, "fair coin n=100"),
        fair_quasiprime: constant(c0, "fair coin n=10^4, zeta in {5,10,20}"),
        fair_prime: constant(fair_prime, "fair coin n=10^4, exact"),
        gap_scaling: constant(gap_scaling, "m=1000, c=1"),
        avoidance: constant(avoid, "power-of-two primes, k=j^3, j<=6, beta=0.4"),
    })
}

/// Checks that a measurement matches the frozen file to `rel` relative
/// precision.
pub fn verify(measured: &Calibration, rel: f64) -> Result<()> {
    let frozen = frozen();
    for ((name, a), (_, b)) in measured.entries().into_iter().zip(frozen.entries()) {
        if (a.value - b.value).abs() > rel * b.value.abs() {
            return Err(Error::Numeric(format!("calibration constant {name}: measured {} vs frozen {}", a.value, b.value)));
        }
    }
    Ok(())
}
