//! Random models, exact moments, trajectories, jump instants and the exact
//! distribution oracle for the partial sums `S_n`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::RngCore;
use serde::{Serialize, Serializer};

use crate::error::{domain, resource, Error, Result};
use crate::numeric::Neumaier;
use crate::rng;

/// Largest `n - start_index` accepted by [`exact_law`].
pub const EXACT_LAW_MAX_STEPS: u64 = 20_000;
/// Largest `n * d` accepted by [`exact_law_mod`].
pub const EXACT_LAW_MOD_MAX_COST: u64 = 1_000_000_000;
/// Above this many summands the exact law drops tail mass below
/// [`EXACT_LAW_TAIL_CUTOFF`].
pub const EXACT_LAW_TRUNCATE_AFTER: u64 = 5_000;
pub const EXACT_LAW_TAIL_CUTOFF: f64 = 1e-18;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `P{xi_j = 1} = 1/log j`.
    Cramer,
    /// `P{xi_j = 1} = 2/log j`, from index 8 on.
    CramerDoubled,
    /// `P{xi_j = 1} = 1/2`, from index 1 on.
    FairCoin,
    /// Explicit weights.
    General,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Cramer => "cramer",
            ModelKind::CramerDoubled => "cramer_doubled",
            ModelKind::FairCoin => "fair_coin",
            ModelKind::General => "general",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "cramer" => Ok(ModelKind::Cramer),
            "cramer_doubled" => Ok(ModelKind::CramerDoubled),
            "fair_coin" | "bernoulli" => Ok(ModelKind::FairCoin),
            "general" => Ok(ModelKind::General),
            other => Err(domain(format!("unknown model kind `{other}`"))),
        }
    }
}

/// A sequence of independent Bernoulli summands `xi_j`, `j >= start_index`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    kind: ModelKind,
    start_index: u64,
    weights: Option<Arc<[f64]>>,
}

impl ModelSpec {
    /// The Cramér model, summands from index 3.
    pub fn cramer() -> Self {
        ModelSpec { kind: ModelKind::Cramer, start_index: 3, weights: None }
    }

    /// The Cramér weights `1/log j` summed from `start` on (`start >= 3`).
    ///
    /// `cramer_from(8)` is the truncated sum `S'_n = xi_8 + ... + xi_n`.
    pub fn cramer_from(start: u64) -> Result<Self> {
        if start < 3 {
            return Err(domain(format!("cramer weights need start_index >= 3, got {start}")));
        }
        Ok(ModelSpec { kind: ModelKind::Cramer, start_index: start, weights: None })
    }

    pub fn cramer_doubled() -> Self {
        ModelSpec { kind: ModelKind::CramerDoubled, start_index: 8, weights: None }
    }

    pub fn fair_coin() -> Self {
        ModelSpec { kind: ModelKind::FairCoin, start_index: 1, weights: None }
    }

    /// Explicit weights; `weights[i]` is `p_{start + i}`.
    pub fn general(start: u64, weights: Vec<f64>) -> Result<Self> {
        if start < 1 {
            return Err(domain("start_index must be >= 1"));
        }
        if weights.is_empty() {
            return Err(domain("general model needs at least one weight"));
        }
        if let Some((i, p)) = weights.iter().enumerate().find(|(_, &p)| !(p > 0.0 && p < 1.0)) {
            return Err(domain(format!("weight p_{} = {p} outside (0,1)", start + i as u64)));
        }
        Ok(ModelSpec { kind: ModelKind::General, start_index: start, weights: Some(weights.into()) })
    }

    /// Named model with its default start index.
    pub fn named(kind: ModelKind) -> Result<Self> {
        match kind {
            ModelKind::Cramer => Ok(Self::cramer()),
            ModelKind::CramerDoubled => Ok(Self::cramer_doubled()),
            ModelKind::FairCoin => Ok(Self::fair_coin()),
            ModelKind::General => Err(domain("general model needs explicit weights")),
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn start_index(&self) -> u64 {
        self.start_index
    }

    /// Last index with a defined weight (`u64::MAX` for the named kinds).
    pub fn last_index(&self) -> u64 {
        match &self.weights {
            Some(w) => self.start_index + w.len() as u64 - 1,
            None => u64::MAX,
        }
    }

    /// `p_j = P{xi_j = 1}`.
    pub fn weight(&self, j: u64) -> Result<f64> {
        if j < self.start_index || j > self.last_index() {
            return Err(domain(format!(
                "no summand at index {j} (defined on [{}, {}])",
                self.start_index,
                self.last_index()
            )));
        }
        Ok(self.weight_unchecked(j))
    }

    #[inline]
    pub(crate) fn weight_unchecked(&self, j: u64) -> f64 {
        match self.kind {
            ModelKind::Cramer => 1.0 / (j as f64).ln(),
            ModelKind::CramerDoubled => 2.0 / (j as f64).ln(),
            ModelKind::FairCoin => 0.5,
            ModelKind::General => {
                self.weights.as_ref().expect("general weights")[(j - self.start_index) as usize]
            }
        }
    }

    /// Checks that `n` is a valid horizon (`start <= n <= last_index`).
    pub fn check_horizon(&self, n: u64) -> Result<()> {
        if n < self.start_index {
            return Err(domain(format!("n = {n} below start_index {}", self.start_index)));
        }
        if n > self.last_index() {
            return Err(domain(format!("weights undefined beyond index {}", self.last_index())));
        }
        Ok(())
    }

    /// Number of summands in `S_n`.
    pub fn summands(&self, n: u64) -> u64 {
        (n + 1).saturating_sub(self.start_index)
    }

    /// Weight table over `[start_index, n_max]`.
    pub fn weight_table(&self, n_max: u64) -> Result<WeightTable> {
        WeightTable::new(self, n_max)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[start={}]", self.kind, self.start_index)
    }
}

impl Serialize for ModelSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ModelSpec", 2)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("start_index", &self.start_index)?;
        st.end()
    }
}

/// Exact first two moments of `S_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub n: u64,
    /// `m_n = E S_n`
    pub mean: f64,
    /// `B_n = Var S_n`
    pub variance: f64,
}

/// `m_n` and `B_n` by compensated summation.
pub fn moments(spec: &ModelSpec, n: u64) -> Result<Moments> {
    spec.check_horizon(n)?;
    let mut mean = Neumaier::default();
    let mut var = Neumaier::default();
    for j in spec.start_index..=n {
        let p = spec.weight_unchecked(j);
        mean.add(p);
        var.add(p * (1.0 - p));
    }
    Ok(Moments { n, mean: mean.sum(), variance: var.sum() })
}

/// All moments `m_j, B_j` for `start <= j <= n_max`, built in one pass.
#[derive(Clone, Debug)]
pub struct MomentSweep {
    start: u64,
    mean: Vec<f64>,
    variance: Vec<f64>,
}

impl MomentSweep {
    pub fn new(spec: &ModelSpec, n_max: u64) -> Result<Self> {
        spec.check_horizon(n_max)?;
        let len = spec.summands(n_max) as usize;
        let mut mean = Vec::with_capacity(len);
        let mut variance = Vec::with_capacity(len);
        let mut m = Neumaier::default();
        let mut b = Neumaier::default();
        for j in spec.start_index..=n_max {
            let p = spec.weight_unchecked(j);
            m.add(p);
            b.add(p * (1.0 - p));
            mean.push(m.sum());
            variance.push(b.sum());
        }
        Ok(MomentSweep { start: spec.start_index, mean, variance })
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn n_max(&self) -> u64 {
        self.start + self.mean.len() as u64 - 1
    }

    #[inline]
    pub fn mean(&self, n: u64) -> f64 {
        self.mean[(n - self.start) as usize]
    }

    #[inline]
    pub fn variance(&self, n: u64) -> f64 {
        self.variance[(n - self.start) as usize]
    }

    pub fn at(&self, n: u64) -> Result<Moments> {
        if n < self.start || n > self.n_max() {
            return Err(domain(format!("n = {n} outside sweep [{}, {}]", self.start, self.n_max())));
        }
        Ok(Moments { n, mean: self.mean(n), variance: self.variance(n) })
    }

    /// Smallest `j` with `B_j >= level`, if any.
    pub fn first_index_with_variance(&self, level: f64) -> Option<u64> {
        let i = self.variance.partition_point(|&b| b < level);
        (i < self.variance.len()).then(|| self.start + i as u64)
    }
}

/// Cached weights with integer thresholds for the sampler.
///
/// A summand is drawn as `(x >> 11) < threshold_j` for one raw 64-bit
/// output `x`, which is the comparison `u < p_j` for the 53-bit uniform
/// `u = (x >> 11) / 2^53` carried out without rounding.
#[derive(Clone, Debug)]
pub struct WeightTable {
    start: u64,
    weights: Vec<f64>,
    thresholds: Vec<u64>,
}

impl WeightTable {
    pub fn new(spec: &ModelSpec, n_max: u64) -> Result<Self> {
        spec.check_horizon(n_max)?;
        let weights: Vec<f64> = (spec.start_index..=n_max).map(|j| spec.weight_unchecked(j)).collect();
        let thresholds = weights.iter().map(|&p| threshold53(p)).collect();
        Ok(WeightTable { start: spec.start_index, weights, thresholds })
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn n_max(&self) -> u64 {
        self.start + self.weights.len() as u64 - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Draws `S_n` for `n = n_max` from `rng` (same stream consumption as
    /// [`sample_trajectory`]).
    #[inline]
    pub fn sample_sum<R: RngCore>(&self, rng: &mut R) -> u64 {
        let mut s = 0u64;
        for &t in &self.thresholds {
            s += ((rng.next_u64() >> 11) < t) as u64;
        }
        s
    }

    /// Draws `S_n` for `start <= n <= n_max` (prefix of the same stream).
    #[inline]
    pub fn sample_sum_to<R: RngCore>(&self, n: u64, rng: &mut R) -> u64 {
        let len = (n + 1 - self.start) as usize;
        let mut s = 0u64;
        for &t in &self.thresholds[..len] {
            s += ((rng.next_u64() >> 11) < t) as u64;
        }
        s
    }
}

/// Smallest integer `t` with `k < t  <=>  k < p * 2^53` for all integers `k`.
fn threshold53(p: f64) -> u64 {
    (p * 9_007_199_254_740_992.0).ceil() as u64
}

/// One sample path `xi_j`, `start <= j <= n_max`, with its partial sums.
#[derive(Clone, Debug)]
pub struct Trajectory {
    spec: ModelSpec,
    seed: u64,
    n_max: u64,
    bits: Vec<u64>,
    sums: Vec<u32>,
}

const TRAJECTORY_STREAM: u64 = rng::tag("trajectory");

/// Samples a trajectory; identical `(spec, n_max, seed)` give identical paths.
pub fn sample_trajectory(spec: &ModelSpec, n_max: u64, seed: u64) -> Result<Trajectory> {
    let table = spec.weight_table(n_max)?;
    Ok(sample_trajectory_with(spec, &table, seed))
}

/// As [`sample_trajectory`] with a prebuilt weight table (its `n_max` is used).
pub fn sample_trajectory_with(spec: &ModelSpec, table: &WeightTable, seed: u64) -> Trajectory {
    assert_eq!(table.start(), spec.start_index, "weight table belongs to another model");
    let mut rng = trajectory_rng(seed);
    let len = table.thresholds.len();
    let mut bits = vec![0u64; len.div_ceil(64)];
    let mut sums = Vec::with_capacity(len);
    let mut s = 0u32;
    for (i, &t) in table.thresholds.iter().enumerate() {
        let b = (rng.next_u64() >> 11) < t;
        if b {
            bits[i / 64] |= 1 << (i % 64);
            s += 1;
        }
        sums.push(s);
    }
    Trajectory { spec: spec.clone(), seed, n_max: table.n_max(), bits, sums }
}

/// The generator behind [`sample_trajectory`] for a given seed.
pub fn trajectory_rng(seed: u64) -> rng::Rng64 {
    rng::stream(seed, &[TRAJECTORY_STREAM])
}

impl Trajectory {
    /// Builds a trajectory from explicit bits `xi_start, xi_start+1, ...`.
    pub fn from_bits(spec: &ModelSpec, bits: &[bool]) -> Result<Self> {
        if bits.is_empty() {
            return Err(domain("empty trajectory"));
        }
        let n_max = spec.start_index + bits.len() as u64 - 1;
        spec.check_horizon(n_max)?;
        let mut packed = vec![0u64; bits.len().div_ceil(64)];
        let mut sums = Vec::with_capacity(bits.len());
        let mut s = 0u32;
        for (i, &b) in bits.iter().enumerate() {
            if b {
                packed[i / 64] |= 1 << (i % 64);
                s += 1;
            }
            sums.push(s);
        }
        Ok(Trajectory { spec: spec.clone(), seed: 0, n_max, bits: packed, sums })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn start(&self) -> u64 {
        self.spec.start_index
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// `xi_j`.
    #[inline]
    pub fn bit(&self, j: u64) -> bool {
        let i = (j - self.start()) as usize;
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    /// `S_j`; zero below the start index.
    #[inline]
    pub fn partial_sum(&self, j: u64) -> u64 {
        if j < self.start() {
            0
        } else {
            self.sums[(j - self.start()) as usize] as u64
        }
    }

    pub fn total(&self) -> u64 {
        *self.sums.last().unwrap_or(&0) as u64
    }

    /// Indices `j` with `xi_j = 1`, increasing.
    pub fn ones(&self) -> impl Iterator<Item = u64> + '_ {
        let start = self.start();
        let len = self.sums.len();
        self.bits.iter().enumerate().flat_map(move |(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + b)
            })
        })
        .take_while(move |&i| i < len)
        .map(move |i| start + i as u64)
    }
}

/// Jump instants of a trajectory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JumpSequence {
    /// `P_1 < P_2 < ...`, the indices with `xi_j = 1`.
    pub instants: Vec<u64>,
    /// Fair-coin gaps `delta_l = Delta_l - Delta_{l-1}`, `Delta_0 = 0`.
    pub gaps: Option<Vec<u64>>,
    /// Fair-coin cumulative instants `Delta_k` (equal to `instants`).
    pub cumulative: Option<Vec<u64>>,
}

pub fn jump_instants(traj: &Trajectory) -> JumpSequence {
    let instants: Vec<u64> = traj.ones().collect();
    let (gaps, cumulative) = if traj.spec().kind() == ModelKind::FairCoin {
        let mut prev = 0;
        let gaps = instants
            .iter()
            .map(|&d| {
                let g = d - prev;
                prev = d;
                g
            })
            .collect();
        (Some(gaps), Some(instants.clone()))
    } else {
        (None, None)
    };
    JumpSequence { instants, gaps, cumulative }
}

/// Exact law of `S_n`, stored on a window `[offset, offset + len)` of the
/// support `{0, ..., n - start + 1}`; entries outside are zero (or below
/// the truncation cutoff).
#[derive(Clone, Debug)]
pub struct ExactLaw {
    pub n: u64,
    offset: usize,
    probs: Vec<f64>,
    support_len: usize,
    truncated_mass: f64,
}

impl ExactLaw {
    /// `P{S_n = k}`.
    pub fn prob(&self, k: i64) -> f64 {
        if k < self.offset as i64 {
            return 0.0;
        }
        self.probs.get(k as usize - self.offset).copied().unwrap_or(0.0)
    }

    /// Full probability vector over `{0, ..., n - start + 1}`.
    pub fn probabilities(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.support_len];
        v[self.offset..self.offset + self.probs.len()].copy_from_slice(&self.probs);
        v
    }

    /// `(k, P{S_n = k})` over the stored window.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs.iter().enumerate().map(move |(i, &p)| ((self.offset + i) as u64, p))
    }

    pub fn window(&self) -> (u64, u64) {
        (self.offset as u64, (self.offset + self.probs.len() - 1) as u64)
    }

    /// Mass discarded by tail truncation.
    pub fn truncated_mass(&self) -> f64 {
        self.truncated_mass
    }

    pub fn total(&self) -> f64 {
        let mut s = Neumaier::default();
        self.probs.iter().for_each(|&p| s.add(p));
        s.sum()
    }

    pub fn mean(&self) -> f64 {
        let mut s = Neumaier::default();
        self.iter().for_each(|(k, p)| s.add(k as f64 * p));
        s.sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let mut s = Neumaier::default();
        self.iter().for_each(|(k, p)| s.add((k as f64 - m).powi(2) * p));
        s.sum()
    }

    /// The law of `S_n + xi` with `P{xi = 1} = p` (one convolution step).
    pub fn push_forward(&self, p: f64) -> ExactLaw {
        let mut probs = self.probs.clone();
        convolve_step(&mut probs, p);
        ExactLaw {
            n: self.n + 1,
            offset: self.offset,
            probs,
            support_len: self.support_len + 1,
            truncated_mass: self.truncated_mass,
        }
    }

    /// Folds the law modulo `d`.
    pub fn fold_mod(&self, d: usize) -> Vec<f64> {
        let mut r = vec![0.0; d];
        for (k, p) in self.iter() {
            r[k as usize % d] += p;
        }
        r
    }
}

#[inline]
fn convolve_step(v: &mut Vec<f64>, p: f64) {
    let q = 1.0 - p;
    v.push(0.0);
    for k in (1..v.len()).rev() {
        v[k] = v[k] * q + v[k - 1] * p;
    }
    v[0] *= q;
}

/// Exact law of `S_n` by the convolution recurrence
/// `q_j(k) = q_{j-1}(k)(1 - p_j) + q_{j-1}(k - 1) p_j`.
pub fn exact_law(spec: &ModelSpec, n: u64) -> Result<ExactLaw> {
    spec.check_horizon(n)?;
    let steps = n - spec.start_index;
    if steps > EXACT_LAW_MAX_STEPS {
        return Err(resource(format!(
            "exact law needs n - start <= {EXACT_LAW_MAX_STEPS}, got {steps}"
        )));
    }
    let truncate = spec.summands(n) > EXACT_LAW_TRUNCATE_AFTER;
    let mut probs = vec![1.0];
    let mut offset = 0usize;
    let mut dropped = 0.0;
    let (mut low_acc, mut high_acc) = (0.0, 0.0);
    for j in spec.start_index..=n {
        convolve_step(&mut probs, spec.weight_unchecked(j));
        if truncate {
            while probs.len() > 1 && low_acc + probs[0] < EXACT_LAW_TAIL_CUTOFF {
                low_acc += probs[0];
                probs.remove(0);
                offset += 1;
            }
            while probs.len() > 1 && high_acc + probs[probs.len() - 1] < EXACT_LAW_TAIL_CUTOFF {
                high_acc += probs.pop().unwrap();
            }
        }
    }
    dropped += low_acc + high_acc;
    Ok(ExactLaw { n, offset, probs, support_len: spec.summands(n) as usize + 1, truncated_mass: dropped })
}

/// `P{S_n = r (mod d)}` for `r = 0, ..., d - 1`, by a DP over residues.
pub fn exact_law_mod(spec: &ModelSpec, n: u64, d: u64) -> Result<Vec<f64>> {
    spec.check_horizon(n)?;
    if d == 0 {
        return Err(domain("modulus must be >= 1"));
    }
    if n.saturating_mul(d) > EXACT_LAW_MOD_MAX_COST {
        return Err(resource(format!("n*d = {} exceeds {EXACT_LAW_MOD_MAX_COST}", n as u128 * d as u128)));
    }
    let d = d as usize;
    let mut v = vec![0.0; d];
    v[0] = 1.0;
    if d == 1 {
        return Ok(v);
    }
    for j in spec.start_index..=n {
        let p = spec.weight_unchecked(j);
        let q = 1.0 - p;
        let last = v[d - 1];
        for r in (1..d).rev() {
            v[r] = v[r] * q + v[r - 1] * p;
        }
        v[0] = v[0] * q + last * p;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_single_term_and_fair_coin() {
        let m = moments(&ModelSpec::cramer(), 3).unwrap();
        let p = 1.0 / 3f64.ln();
        assert_eq!(m.mean, p);
        assert!((m.variance - p * (1.0 - p)).abs() < 1e-16);
        let f = moments(&ModelSpec::fair_coin(), 10).unwrap();
        assert_eq!((f.mean, f.variance), (5.0, 2.5));
        assert!(moments(&ModelSpec::cramer(), 2).is_err());
    }

    #[test]
    fn cramer_from_rejects_bad_start() {
        assert!(ModelSpec::cramer_from(2).is_err());
        assert_eq!(ModelSpec::cramer_from(8).unwrap().start_index(), 8);
        assert!(ModelSpec::general(1, vec![0.5, 1.0]).is_err());
        assert!(ModelSpec::general(1, vec![]).is_err());
    }

    #[test]
    fn doubled_weights_below_one() {
        let s = ModelSpec::cramer_doubled();
        assert!(s.weight(8).unwrap() < 1.0);
        assert!(s.weight(7).is_err());
    }

    #[test]
    fn general_weights_have_finite_range() {
        let s = ModelSpec::general(2, vec![0.3, 0.6]).unwrap();
        assert_eq!(s.weight(3).unwrap(), 0.6);
        assert!(s.weight(4).is_err());
        assert!(moments(&s, 4).is_err());
        let m = moments(&s, 3).unwrap();
        assert!((m.mean - 0.9).abs() < 1e-15);
    }

    #[test]
    fn jump_instants_by_definition() {
        let t = Trajectory::from_bits(&ModelSpec::cramer(), &[false, false, true, false, true]).unwrap();
        let js = jump_instants(&t);
        assert_eq!(js.instants, vec![5, 7]);
        assert!(js.gaps.is_none());

        let f = Trajectory::from_bits(&ModelSpec::fair_coin(), &[true, false, false, true]).unwrap();
        let js = jump_instants(&f);
        assert_eq!(js.gaps.unwrap(), vec![1, 3]);
        assert_eq!(js.cumulative.unwrap(), vec![1, 4]);
    }

    #[test]
    fn empty_jump_set() {
        let t = Trajectory::from_bits(&ModelSpec::cramer(), &[false; 10]).unwrap();
        assert!(jump_instants(&t).instants.is_empty());
    }

    #[test]
    fn exact_law_two_fair_coins() {
        let law = exact_law(&ModelSpec::fair_coin(), 2).unwrap();
        assert_eq!(law.probabilities(), vec![0.25, 0.5, 0.25]);
    }

    #[test]
    fn exact_law_cramer_n4_by_enumeration() {
        let (p3, p4) = (1.0 / 3f64.ln(), 1.0 / 4f64.ln());
        let expect = [(1.0 - p3) * (1.0 - p4), p3 * (1.0 - p4) + (1.0 - p3) * p4, p3 * p4];
        let law = exact_law(&ModelSpec::cramer(), 4).unwrap();
        let got = law.probabilities();
        assert_eq!(got.len(), 3);
        for (g, e) in got.iter().zip(expect) {
            assert!((g - e).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_law_guards() {
        assert!(matches!(exact_law(&ModelSpec::fair_coin(), 20_002), Err(Error::Resource(_))));
        assert!(matches!(exact_law_mod(&ModelSpec::fair_coin(), 1_000_000, 2_000), Err(Error::Resource(_))));
        assert!(exact_law_mod(&ModelSpec::fair_coin(), 10, 0).is_err());
    }

    #[test]
    fn exact_law_mod_small_cases() {
        assert_eq!(exact_law_mod(&ModelSpec::fair_coin(), 2, 2).unwrap(), vec![0.5, 0.5]);
        assert_eq!(exact_law_mod(&ModelSpec::cramer(), 50, 1).unwrap(), vec![1.0]);
    }

    #[test]
    fn truncated_law_keeps_mass() {
        let law = exact_law(&ModelSpec::fair_coin(), 8000).unwrap();
        let (lo, hi) = law.window();
        assert!(lo > 0 && hi < 8000);
        assert!((law.total() - 1.0).abs() < 1e-12);
        assert!(law.truncated_mass() < 2e-18);
    }

    #[test]
    fn trajectory_matches_sampler_stream() {
        let spec = ModelSpec::cramer();
        let table = spec.weight_table(5000).unwrap();
        let t = sample_trajectory_with(&spec, &table, 99);
        let mut rng = trajectory_rng(99);
        assert_eq!(table.sample_sum(&mut rng), t.total());
        let mut rng = trajectory_rng(99);
        assert_eq!(table.sample_sum_to(1234, &mut rng), t.partial_sum(1234));
    }

    #[test]
    fn threshold_matches_float_comparison() {
        for &p in &[0.5, 1.0 / 3f64.ln(), 0.1, 2.0 / 1000f64.ln(), 1e-9] {
            let t = threshold53(p);
            for k in [t.saturating_sub(2), t.saturating_sub(1), t, t + 1] {
                let u = k as f64 / 9_007_199_254_740_992.0;
                assert_eq!(k < t, u < p, "p={p} k={k}");
            }
        }
    }
}
