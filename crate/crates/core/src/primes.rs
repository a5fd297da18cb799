//! Prime services: an odd-only segmented sieve with O(1) prime counting,
//! smallest prime factors, the quasiprime predicate and prime-weighted
//! Gaussian sums.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{domain, resource, Error, Result};
use crate::numeric::Neumaier;

/// Largest sieve limit accepted by [`sieve`].
pub const SIEVE_MAX: u64 = 1_000_000_000;
/// Segment length in odd numbers.
const SEGMENT_ODDS: u64 = 1 << 21;

const DUMP_MAGIC: &[u8; 4] = b"CRPT";
const DUMP_VERSION: u16 = 1;

/// Prime membership over `[2, limit]`.
///
/// Bit `i` of the mask stands for the odd number `2i + 1`; the prime 2 is
/// handled separately.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    bits: Vec<u64>,
    /// Odd primes in words `0..w`.
    prefix: Vec<u32>,
}

/// Sieve of Eratosthenes up to `limit`.
pub fn sieve(limit: u64) -> Result<PrimeTable> {
    if limit < 2 {
        return Err(domain(format!("sieve limit must be >= 2, got {limit}")));
    }
    if limit > SIEVE_MAX {
        return Err(resource(format!("sieve limit {limit} exceeds {SIEVE_MAX}")));
    }
    let odds = limit.div_ceil(2); // odd numbers 1, 3, ..., <= limit
    let words = odds.div_ceil(64) as usize;
    let mut bits = vec![!0u64; words];
    let tail = odds % 64;
    if tail != 0 {
        bits[words - 1] = (1u64 << tail) - 1;
    }
    bits[0] &= !1; // 1 is not prime

    let root = isqrt(limit);
    let base = small_odd_primes(root);
    let mut lo = 0u64;
    while lo < odds {
        let hi = (lo + SEGMENT_ODDS).min(odds);
        for &p in &base {
            // first odd multiple of p at index >= lo, starting no lower than p^2
            let mut i = (p * p - 1) / 2;
            if i < lo {
                let v_lo = 2 * lo + 1;
                let mut m = v_lo.div_ceil(p) * p;
                if m % 2 == 0 {
                    m += p;
                }
                i = (m - 1) / 2;
            }
            while i < hi {
                bits[(i / 64) as usize] &= !(1u64 << (i % 64));
                i += p;
            }
        }
        lo = hi;
    }
    Ok(PrimeTable::from_bits(limit, bits))
}

/// Odd primes `<= x` by a plain sieve (base primes for segmentation).
fn small_odd_primes(x: u64) -> Vec<u64> {
    if x < 3 {
        return Vec::new();
    }
    let x = x as usize;
    let mut comp = vec![false; x + 1];
    let mut out = Vec::new();
    let mut v = 3;
    while v <= x {
        if !comp[v] {
            out.push(v as u64);
            let mut m = v * v;
            while m <= x {
                comp[m] = true;
                m += 2 * v;
            }
        }
        v += 2;
    }
    out
}

/// Integer square root.
pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.saturating_mul(r) > n {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= n {
        r += 1;
    }
    r
}

impl PrimeTable {
    fn from_bits(limit: u64, bits: Vec<u64>) -> Self {
        let mut prefix = Vec::with_capacity(bits.len() + 1);
        let mut acc = 0u32;
        prefix.push(0);
        for w in &bits {
            acc += w.count_ones();
            prefix.push(acc);
        }
        PrimeTable { limit, bits, prefix }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Primality of `n <= limit`.
    ///
    /// # Panics
    /// If `n` exceeds the sieve limit.
    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        assert!(n <= self.limit, "{n} beyond sieve limit {}", self.limit);
        if n < 3 {
            return n == 2;
        }
        if n % 2 == 0 {
            return false;
        }
        let i = (n - 1) / 2;
        self.bits[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    pub fn try_is_prime(&self, n: u64) -> Result<bool> {
        if n > self.limit {
            return Err(domain(format!("{n} beyond sieve limit {}", self.limit)));
        }
        Ok(self.is_prime(n))
    }

    /// `pi(x)`, the number of primes `<= x`, for `x <= limit`.
    pub fn pi(&self, x: u64) -> u64 {
        assert!(x <= self.limit, "{x} beyond sieve limit {}", self.limit);
        if x < 2 {
            return 0;
        }
        let i = (x - 1) / 2; // last odd index <= x
        let w = (i / 64) as usize;
        let b = i % 64;
        let mask = if b == 63 { !0 } else { (1u64 << (b + 1)) - 1 };
        1 + self.prefix[w] as u64 + (self.bits[w] & mask).count_ones() as u64
    }

    /// Primes in `[lo, hi]` (clamped to the table), increasing.
    pub fn primes_in(&self, lo: u64, hi: u64) -> impl Iterator<Item = u64> + '_ {
        let hi = hi.min(self.limit);
        let two = (lo <= 2 && hi >= 2).then_some(2);
        let start = lo.max(3);
        let mut i = (start - 1) / 2 + u64::from(start % 2 == 0);
        let end = if hi >= 3 { (hi - 1) / 2 } else { 0 };
        let odd = std::iter::from_fn(move || {
            while i <= end && hi >= 3 {
                let w = self.bits[(i / 64) as usize] >> (i % 64);
                if w == 0 {
                    i = (i / 64 + 1) * 64;
                    continue;
                }
                i += w.trailing_zeros() as u64;
                if i > end {
                    return None;
                }
                let v = 2 * i + 1;
                i += 1;
                return Some(v);
            }
            None
        });
        two.into_iter().chain(odd)
    }

    /// All primes `<= x`.
    pub fn primes_upto(&self, x: u64) -> impl Iterator<Item = u64> + '_ {
        self.primes_in(2, x)
    }

    /// Writes the sieve to `path` (16-byte header, then little-endian words).
    pub fn dump(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        w.write_all(&0u16.to_le_bytes())?;
        w.write_all(&self.limit.to_le_bytes())?;
        for word in &self.bits {
            w.write_all(&word.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[..4] != DUMP_MAGIC {
            return Err(Error::Format("bad sieve dump magic".into()));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != DUMP_VERSION {
            return Err(Error::Format(format!("unsupported sieve dump version {version}")));
        }
        let limit = u64::from_le_bytes(header[8..16].try_into().unwrap());
        if !(2..=SIEVE_MAX).contains(&limit) {
            return Err(Error::Format(format!("sieve dump limit {limit} out of range")));
        }
        let words = limit.div_ceil(2).div_ceil(64) as usize;
        let mut raw = vec![0u8; words * 8];
        r.read_exact(&mut raw)?;
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(Error::Format("trailing bytes after sieve dump".into()));
        }
        let bits = raw.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(PrimeTable::from_bits(limit, bits))
    }
}

/// Smallest prime factor `P^-(m)`; `None` for `m` in `{0, 1}`.
///
/// Needs every prime up to `sqrt(m)` in the table.
pub fn smallest_prime_factor(m: u64, table: &PrimeTable) -> Result<Option<u64>> {
    if m < 2 {
        return Ok(None);
    }
    if m <= table.limit() && table.is_prime(m) {
        return Ok(Some(m));
    }
    let root = isqrt(m);
    if root > table.limit() {
        return Err(domain(format!("sqrt({m}) beyond sieve limit {}", table.limit())));
    }
    for p in table.primes_upto(root) {
        if m % p == 0 {
            return Ok(Some(p));
        }
    }
    Ok(Some(m))
}

/// `gcd(m, prod_{p <= zeta} p) = 1`, i.e. `P^-(m) > zeta`. Zero and one
/// are quasiprime for every `zeta`.
pub fn is_quasiprime(m: u64, zeta: f64, table: &PrimeTable) -> Result<bool> {
    if m < 2 {
        return Ok(true);
    }
    if zeta < 2.0 {
        return Ok(true);
    }
    let root = isqrt(m);
    let z = if zeta >= root as f64 { root } else { zeta.floor() as u64 };
    if z > table.limit() {
        return Err(domain(format!("quasiprime test needs primes up to {z}, sieve limit {}", table.limit())));
    }
    for p in table.primes_upto(z) {
        if m % p == 0 {
            return Ok(false);
        }
    }
    // No factor up to min(zeta, sqrt m): either zeta < sqrt m and every
    // factor exceeds zeta, or m itself is prime.
    Ok(z < root || m as f64 > zeta)
}

/// `sum_{p prime, |p - m| <= h} (2 pi B)^{-1/2} exp(-(p - m)^2 / (2B))`.
pub fn gaussian_prime_sum(m: f64, b: f64, half_width: f64, table: &PrimeTable) -> Result<f64> {
    if !(b > 0.0) {
        return Err(domain(format!("variance must be positive, got {b}")));
    }
    if !(half_width >= 0.0) {
        return Err(domain("half_width must be nonnegative"));
    }
    let (lo, hi) = (m - half_width, m + half_width);
    if lo < 2.0 || hi > table.limit() as f64 {
        return Err(domain(format!(
            "window [{lo}, {hi}] not inside [2, {}]",
            table.limit()
        )));
    }
    let norm = (2.0 * std::f64::consts::PI * b).sqrt().recip();
    let mut s = Neumaier::default();
    for p in table.primes_in(lo.ceil() as u64, hi.floor() as u64) {
        let x = p as f64 - m;
        s.add(norm * (-x * x / (2.0 * b)).exp());
    }
    Ok(s.sum())
}

/// An increasing set of primes, known on `[2, coverage]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeSet {
    members: Vec<u64>,
    coverage: u64,
}

impl PrimeSet {
    /// A finite explicit set (complete: nothing lies outside the list).
    pub fn explicit(mut members: Vec<u64>, table: &PrimeTable) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        for &p in &members {
            if !table.try_is_prime(p)? {
                return Err(domain(format!("{p} is not prime")));
            }
        }
        Ok(PrimeSet { members, coverage: u64::MAX })
    }

    pub fn empty() -> Self {
        PrimeSet { members: Vec::new(), coverage: u64::MAX }
    }

    /// All primes, known up to the table limit.
    pub fn all(table: &PrimeTable) -> Self {
        PrimeSet { members: table.primes_upto(table.limit()).collect(), coverage: table.limit() }
    }

    /// Primes in `[2, upto]` satisfying `keep`, known up to `upto`.
    pub fn filtered(table: &PrimeTable, upto: u64, mut keep: impl FnMut(u64) -> bool) -> Self {
        let upto = upto.min(table.limit());
        PrimeSet { members: table.primes_upto(upto).filter(|&p| keep(p)).collect(), coverage: upto }
    }

    /// Membership is known for every integer `<= coverage`.
    pub fn coverage(&self) -> u64 {
        self.coverage
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.members.binary_search(&n).is_ok()
    }

    /// Members in `[lo, hi]`.
    pub fn range(&self, lo: u64, hi: u64) -> &[u64] {
        let a = self.members.partition_point(|&p| p < lo);
        let b = self.members.partition_point(|&p| p <= hi);
        &self.members[a..b.max(a)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn small_counts() {
        let t = sieve(1000).unwrap();
        assert_eq!(t.pi(10), 4);
        assert_eq!(t.pi(100), (0..=100).filter(|&n| trial_is_prime(n)).count() as u64);
        assert_eq!(t.pi(1), 0);
        assert_eq!(t.pi(2), 1);
        for n in 0..=1000 {
            assert_eq!(t.is_prime(n), trial_is_prime(n), "{n}");
        }
    }

    #[test]
    fn tiny_limits() {
        assert!(sieve(1).is_err());
        let t = sieve(2).unwrap();
        assert_eq!(t.pi(2), 1);
        assert_eq!(t.primes_upto(2).collect::<Vec<_>>(), vec![2]);
        let t = sieve(3).unwrap();
        assert_eq!(t.primes_upto(3).collect::<Vec<_>>(), vec![2, 3]);
    }

    #[test]
    fn primes_in_ranges() {
        let t = sieve(200).unwrap();
        assert_eq!(t.primes_in(71, 80).collect::<Vec<_>>(), vec![71, 73, 79]);
        assert_eq!(t.primes_in(24, 28).count(), 0);
        assert_eq!(t.primes_in(190, 500).collect::<Vec<_>>(), vec![191, 193, 197, 199]);
        assert_eq!(t.primes_in(0, 5).collect::<Vec<_>>(), vec![2, 3, 5]);
    }

    #[test]
    fn spf_examples() {
        let t = sieve(100).unwrap();
        assert_eq!(smallest_prime_factor(25, &t).unwrap(), Some(5));
        assert_eq!(smallest_prime_factor(97, &t).unwrap(), Some(97));
        assert_eq!(smallest_prime_factor(1, &t).unwrap(), None);
        assert_eq!(smallest_prime_factor(0, &t).unwrap(), None);
        assert_eq!(smallest_prime_factor(9991, &t).unwrap(), Some(97));
        assert!(smallest_prime_factor(1_000_003 * 1_000_003, &t).is_err());
    }

    #[test]
    fn quasiprime_examples() {
        let t = sieve(100).unwrap();
        assert!(is_quasiprime(25, 3.0, &t).unwrap());
        assert!(!is_quasiprime(25, 5.0, &t).unwrap());
        assert!(is_quasiprime(1, 1e6, &t).unwrap());
        assert!(is_quasiprime(30, 1.5, &t).unwrap());
        assert!(!is_quasiprime(30, 2.0, &t).unwrap());
        assert!(!is_quasiprime(7, 10.0, &t).unwrap());
        assert!(is_quasiprime(11, 10.0, &t).unwrap());
        assert!(is_quasiprime(121, 10.0, &t).unwrap());
    }

    #[test]
    fn gaussian_sum_examples() {
        let t = sieve(1000).unwrap();
        assert_eq!(gaussian_prime_sum(26.0, 1.0, 2.0, &t).unwrap(), 0.0);
        let v = gaussian_prime_sum(5.0, 1.0, 0.5, &t).unwrap();
        assert!((v - (2.0 * std::f64::consts::PI).sqrt().recip()).abs() < 1e-16);
        let direct: f64 = (71..=127u64)
            .filter(|&p| trial_is_prime(p))
            .map(|p| (-(p as f64 - 100.0).powi(2) / 50.0).exp() / (50.0 * std::f64::consts::PI).sqrt())
            .sum();
        assert!((gaussian_prime_sum(100.0, 25.0, 30.0, &t).unwrap() - direct).abs() < 1e-14);
        assert!(gaussian_prime_sum(5.0, 1.0, 4.0, &t).is_err());
        assert!(gaussian_prime_sum(990.0, 1.0, 20.0, &t).is_err());
    }

    #[test]
    fn dump_roundtrip() {
        let t = sieve(12_345).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + t.bits.len() * 8);
        assert_eq!(&buf[..4], b"CRPT");
        assert_eq!(PrimeTable::read_from(&mut buf.as_slice()).unwrap(), t);
        buf[0] = b'X';
        assert!(PrimeTable::read_from(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn prime_set_validates() {
        let t = sieve(100).unwrap();
        assert!(PrimeSet::explicit(vec![2, 4], &t).is_err());
        let s = PrimeSet::explicit(vec![7, 3, 3], &t).unwrap();
        assert_eq!(s.members(), &[3, 7]);
        assert_eq!(s.range(4, 100), &[7]);
        assert_eq!(PrimeSet::all(&t).members().len(), 25);
    }
}
