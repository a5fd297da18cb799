//! Small numerical helpers shared across modules.

/// Neumaier (improved Kahan) compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Neumaier::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

/// Compensated sum of an iterator.
pub fn csum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<Neumaier>().sum()
}

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// Van der Corput / golden-ratio quasi-random sequence in `[0, 1)`.
pub fn golden_sequence(len: usize) -> impl Iterator<Item = f64> {
    const PHI_FRAC: f64 = 0.618_033_988_749_894_8;
    (1..=len).map(|i| (i as f64 * PHI_FRAC).fract())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancellation() {
        assert_eq!(csum([1.0, 1e100, 1.0, -1e100]), 2.0);
    }
}
