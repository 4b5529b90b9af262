use crate::{Error, Result, C64};

/// An eventually-periodic complex sequence `s_1, s_2, ...`: a finite prefix
/// followed by a repeating block.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSeq {
    prefix: Vec<C64>,
    period: Vec<C64>,
}

impl PeriodicSeq {
    pub fn new(prefix: Vec<C64>, period: Vec<C64>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidInput("periodic block must be nonempty".into()));
        }
        if prefix
            .iter()
            .chain(period.iter())
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidInput("sequence values must be finite".into()));
        }
        Ok(Self { prefix, period })
    }

    pub fn constant(value: C64) -> Self {
        Self {
            prefix: Vec::new(),
            period: vec![value],
        }
    }

    /// Purely periodic real sequence, e.g. `(1, 4)` for `1, 4, 1, 4, ...`.
    pub fn periodic_real(values: &[f64]) -> Result<Self> {
        Self::new(Vec::new(), values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    /// The n-th term, 1-based.
    pub fn get(&self, n: usize) -> C64 {
        debug_assert!(n >= 1);
        let i = n - 1;
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.prefix
            .iter()
            .chain(self.period.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn prefix(&self) -> &[C64] {
        &self.prefix
    }

    pub fn period(&self) -> &[C64] {
        &self.period
    }

    pub fn period_len(&self) -> usize {
        self.period.len()
    }

    pub fn conj(&self) -> Self {
        Self {
            prefix: self.prefix.iter().map(|z| z.conj()).collect(),
            period: self.period.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Termwise reciprocal; `None` if some term vanishes.
    pub fn recip(&self) -> Option<Self> {
        if self.prefix.iter().chain(self.period.iter()).any(|z| z.norm() == 0.0) {
            return None;
        }
        Some(Self {
            prefix: self.prefix.iter().map(|z| z.inv()).collect(),
            period: self.period.iter().map(|z| z.inv()).collect(),
        })
    }

    /// Geometric mean of the moduli over one period.
    pub fn period_geometric_mean(&self) -> f64 {
        let logs: f64 = self.period.iter().map(|z| z.norm().ln()).sum();
        (logs / self.period.len() as f64).exp()
    }

    pub fn is_constant(&self) -> bool {
        let first = self.period[0];
        self.prefix.iter().chain(self.period.iter()).all(|&z| z == first)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_wraps_after_prefix() {
        let s = PeriodicSeq::new(vec![C64::new(2.0, 0.0)], vec![C64::new(1.0, 0.0), C64::new(4.0, 0.0)]).unwrap();
        let got: Vec<f64> = (1..=6).map(|n| s.get(n).re).collect();
        assert_eq!(got, vec![2.0, 1.0, 4.0, 1.0, 4.0, 1.0]);
        assert_eq!(s.sup_abs(), 4.0);
        assert_eq!(s.period_len(), 2);
    }

    #[test]
    fn geometric_mean_of_one_four_is_two() {
        let s = PeriodicSeq::periodic_real(&[1.0, 4.0]).unwrap();
        assert!((s.period_geometric_mean() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_empty_period_and_nan() {
        assert!(PeriodicSeq::new(vec![], vec![]).is_err());
        assert!(PeriodicSeq::periodic_real(&[f64::NAN]).is_err());
    }
}
