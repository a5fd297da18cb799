use serde::Serialize;

use crate::error::{domain, Result};
use crate::model::{MomentSweep, Trajectory};

/// An increasing integer sequence `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Subsequence {
    /// Every integer.
    All,
    /// Explicit members, strictly increasing.
    Explicit(Vec<u64>),
}

impl Subsequence {
    pub fn explicit(members: Vec<u64>) -> Result<Self> {
        if members.windows(2).any(|w| w[1] <= w[0]) || members.first() == Some(&0) {
            return Err(domain("subsequence must be positive and strictly increasing"));
        }
        Ok(Subsequence::Explicit(members))
    }

    /// `{2^{2^k} : k >= 1}` below `limit`.
    pub fn double_exponential(limit: u64) -> Self {
        let m = (1..6u32).map(|k| 1u64 << (1u64 << k)).take_while(|&v| v <= limit).collect();
        Subsequence::Explicit(m)
    }

    fn contains(&self, n: u64) -> bool {
        match self {
            Subsequence::All => n >= 1,
            Subsequence::Explicit(v) => v.binary_search(&n).is_ok(),
        }
    }
}

/// Index `k` of the block containing `n`: `I_0 = (0, M]`,
/// `I_k = (M^k, M^{k+1}]`.
fn block_index(n: u64, m: f64) -> u64 {
    let mut k = ((n as f64).ln() / m.ln()).ceil().max(1.0) as u64 - 1;
    // repair rounding at block edges
    while k > 0 && (n as f64) <= m.powi(k as i32) {
        k -= 1;
    }
    while (n as f64) > m.powi(k as i32 + 1) {
        k += 1;
    }
    k
}

/// `phi_N(n) = sqrt(2 ln(p + 2))` where `I_{kappa_p}` is the `p`-th block
/// (counting from 1) that meets `N` and contains `n`.
pub fn subseq_normalizer(seq: &Subsequence, m: f64, n: u64) -> Result<f64> {
    if !(m > 1.0) {
        return Err(domain(format!("M must exceed 1, got {m}")));
    }
    if !seq.contains(n) {
        return Err(domain(format!("{n} is not a member of the subsequence")));
    }
    let k = block_index(n, m);
    let p = match seq {
        Subsequence::All => k + 1,
        Subsequence::Explicit(v) => {
            let mut blocks: Vec<u64> = v.iter().take_while(|&&x| x <= n).map(|&x| block_index(x, m)).collect();
            blocks.dedup();
            blocks.len() as u64
        }
    };
    Ok((2.0 * ((p + 2) as f64).ln()).sqrt())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LilStatistic {
    /// `max_{n in N, n <= n_max} |S_n - m_n| / (sqrt(B_n) phi_N(n))`
    pub value: f64,
    pub argmax: u64,
    pub members_seen: u64,
}

/// The running maximum of the normalized deviations along `N`; `phi_scale`
/// multiplies the normalizer.
pub fn lil_subseq_statistic(
    traj: &Trajectory,
    sweep: &MomentSweep,
    seq: &Subsequence,
    m: f64,
    phi_scale: f64,
) -> Result<LilStatistic> {
    if !(m > 1.0) || !(phi_scale > 0.0) {
        return Err(domain("need M > 1 and a positive normalizer scale"));
    }
    if sweep.start() != traj.start() || sweep.n_max() < traj.n_max() {
        return Err(domain("moment sweep does not cover the trajectory"));
    }
    let start = traj.start();
    let mut best = LilStatistic { value: 0.0, argmax: 0, members_seen: 0 };
    let mut visit = |n: u64, p: u64| {
        let phi = (2.0 * ((p + 2) as f64).ln()).sqrt() * phi_scale;
        let v = (traj.partial_sum(n) as f64 - sweep.mean(n)).abs() / (sweep.variance(n).sqrt() * phi);
        best.members_seen += 1;
        if v > best.value {
            best.value = v;
            best.argmax = n;
        }
    };
    match seq {
        Subsequence::All => {
            // blocks containing integers are consecutive, so p = k + 1
            let mut k = block_index(start, m);
            let mut edge = m.powi(k as i32 + 1);
            for n in start..=traj.n_max() {
                while n as f64 > edge {
                    k += 1;
                    edge = m.powi(k as i32 + 1);
                }
                visit(n, k + 1);
            }
        }
        Subsequence::Explicit(v) => {
            let mut p = 0u64;
            let mut last_block = None;
            for &n in v.iter().take_while(|&&n| n <= traj.n_max()) {
                let k = block_index(n, m);
                if last_block != Some(k) {
                    p += 1;
                    last_block = Some(k);
                }
                if n >= start {
                    visit(n, p);
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn all_integers_with_base_e() {
        // (e^k, e^{k+1}] is the (k+1)-th block meeting the integers
        for (n, k) in [(1u64, 0u64), (2, 0), (3, 1), (7, 1), (8, 2), (20, 2), (21, 3), (1000, 6)] {
            let phi = subseq_normalizer(&Subsequence::All, E, n).unwrap();
            assert!((phi - (2.0 * ((k + 3) as f64).ln()).sqrt()).abs() < 1e-15, "n={n}");
        }
    }

    #[test]
    fn double_exponential_blocks() {
        let s = Subsequence::double_exponential(1 << 40);
        assert_eq!(s, Subsequence::Explicit(vec![4, 16, 256, 65536, 1 << 32]));
        // each member sits in its own block for M = 2, so p counts members
        for (p, &n) in [4u64, 16, 256, 65536, 1 << 32].iter().enumerate() {
            let phi = subseq_normalizer(&s, 2.0, n).unwrap();
            assert!((phi - (2.0 * ((p as u64 + 3) as f64).ln()).sqrt()).abs() < 1e-15);
        }
        assert!(subseq_normalizer(&s, 2.0, 5).is_err());
    }

    #[test]
    fn locality_of_kappa() {
        let a = Subsequence::explicit(vec![5, 100, 1000, 5000]).unwrap();
        let b = Subsequence::explicit(vec![6, 100, 1000, 5000]).unwrap();
        for n in [100u64, 1000, 5000] {
            assert_eq!(subseq_normalizer(&a, E, n).unwrap(), subseq_normalizer(&b, E, n).unwrap());
        }
    }
}
