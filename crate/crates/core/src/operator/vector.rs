use std::fmt;

use crate::C64;

/// A vector in l2 held as finitely many leading coefficients plus a
/// certified bound on the norm of everything not represented.
///
/// `coeffs[0]` is the coefficient of `e_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailBoundedVector {
    coeffs: Vec<C64>,
    tail_bound: f64,
}

impl TailBoundedVector {
    /// Panics if the tail bound is negative or non-finite.
    pub fn new(coeffs: Vec<C64>, tail_bound: f64) -> Self {
        assert!(
            tail_bound >= 0.0 && tail_bound.is_finite(),
            "tail bound must be finite and nonnegative, got {tail_bound}"
        );
        let mut v = Self { coeffs, tail_bound };
        v.trim();
        v
    }

    pub fn exact(coeffs: Vec<C64>) -> Self {
        Self::new(coeffs, 0.0)
    }

    pub fn zero() -> Self {
        Self::exact(Vec::new())
    }

    /// The standard basis vector `e_k`, `k >= 1`.
    pub fn basis(k: usize) -> Self {
        assert!(k >= 1, "basis vectors are indexed from 1");
        let mut c = vec![C64::new(0.0, 0.0); k];
        c[k - 1] = C64::new(1.0, 0.0);
        Self::exact(c)
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::exact(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn with_tail(mut self, tail_bound: f64) -> Self {
        assert!(tail_bound >= 0.0 && tail_bound.is_finite());
        self.tail_bound = tail_bound;
        self
    }

    /// Number of represented coefficients after trimming trailing zeros.
    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of `e_i`, 1-based; zero beyond the represented part.
    pub fn coeff(&self, i: usize) -> C64 {
        assert!(i >= 1);
        self.coeffs.get(i - 1).copied().unwrap_or_default()
    }

    /// Norm of the represented part.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Upper bound on the norm of the vector being represented.
    pub fn norm_upper(&self) -> f64 {
        self.norm() + self.tail_bound
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.is_empty() && self.tail_bound == 0.0
    }

    pub fn scale(&self, alpha: C64) -> Self {
        if alpha == C64::new(0.0, 0.0) {
            return Self::zero();
        }
        Self::new(
            self.coeffs.iter().map(|&z| alpha * z).collect(),
            alpha.norm() * self.tail_bound,
        )
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: C64, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.coeffs.get(i).copied().unwrap_or_default();
            let b = other.coeffs.get(i).copied().unwrap_or_default();
            c.push(a + alpha * b);
        }
        Self::new(c, self.tail_bound + alpha.norm() * other.tail_bound)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(C64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    /// `<self, other>` on the represented parts, linear in the first slot.
    pub fn inner(&self, other: &Self) -> C64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    /// Bound on `|<x, y> - inner(repr x, repr y)|`.
    pub fn inner_error(&self, other: &Self) -> f64 {
        self.norm() * other.tail_bound + self.tail_bound * other.norm_upper()
    }

    /// Certified distance bound: represented difference plus both tails.
    pub fn dist_bound(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut s = 0.0;
        for i in 0..n {
            let a = self.coeffs.get(i).copied().unwrap_or_default();
            let b = other.coeffs.get(i).copied().unwrap_or_default();
            s += (a - b).norm_sqr();
        }
        s.sqrt() + self.tail_bound + other.tail_bound
    }

    /// epsilon-equality in the sense of the certified distance bound.
    pub fn eps_eq(&self, other: &Self, eps: f64) -> bool {
        self.dist_bound(other) <= eps
    }

    /// Drop everything past index `n`, folding it into the tail bound.
    pub fn truncated(&self, n: usize) -> Self {
        if self.coeffs.len() <= n {
            return self.clone();
        }
        let dropped: f64 = self.coeffs[n..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Self::new(self.coeffs[..n].to_vec(), self.tail_bound + dropped)
    }

    /// Coefficients padded or cut to exactly `n` entries (no tail bookkeeping).
    pub fn to_dense(&self, n: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); n];
        for (dst, src) in v.iter_mut().zip(self.coeffs.iter()) {
            *dst = *src;
        }
        v
    }

    fn trim(&mut self) {
        while let Some(last) = self.coeffs.last() {
            if last.re == 0.0 && last.im == 0.0 {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }
}

impl fmt::Display for TailBoundedVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, z) in self.coeffs.iter().take(8).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:.4}{:+.4}i", z.re, z.im)?;
        }
        if self.coeffs.len() > 8 {
            write!(f, ", ... ({} terms)", self.coeffs.len())?;
        }
        write!(f, "] + tail <= {:.3e}", self.tail_bound)
    }
}

/// Bounded linear functional `x -> <x, v>`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerFunctional {
    v: TailBoundedVector,
}

impl InnerFunctional {
    pub fn new(v: TailBoundedVector) -> Self {
        Self { v }
    }

    /// The coordinate functional `x -> <x, e_1>`.
    pub fn first_coordinate() -> Self {
        Self::new(TailBoundedVector::basis(1))
    }

    pub fn vector(&self) -> &TailBoundedVector {
        &self.v
    }

    pub fn eval(&self, x: &TailBoundedVector) -> C64 {
        x.inner(&self.v)
    }

    pub fn eval_error(&self, x: &TailBoundedVector) -> f64 {
        x.inner_error(&self.v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn basis_and_coeff_are_one_based() {
        let e3 = TailBoundedVector::basis(3);
        assert_eq!(e3.coeff(3), c(1.0));
        assert_eq!(e3.coeff(1), c(0.0));
        assert_eq!(e3.coeff(10), c(0.0));
        assert_eq!(e3.support_len(), 3);
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        let v = TailBoundedVector::exact(vec![c(1.0), c(0.0), c(0.0)]);
        assert_eq!(v.support_len(), 1);
    }

    #[test]
    fn eps_equality_counts_tails() {
        let a = TailBoundedVector::from_real(&[1.0, 2.0]).with_tail(1e-3);
        let b = TailBoundedVector::from_real(&[1.0, 2.0]);
        assert!(a.eps_eq(&b, 1e-3));
        assert!(!a.eps_eq(&b, 5e-4));
    }

    #[test]
    fn truncation_moves_mass_into_tail() {
        let v = TailBoundedVector::from_real(&[1.0, 3.0, 4.0]);
        let t = v.truncated(1);
        assert_eq!(t.support_len(), 1);
        assert!((t.tail_bound() - 5.0).abs() < 1e-15);
    }

    #[test]
    #[should_panic]
    fn negative_tail_is_rejected() {
        let _ = TailBoundedVector::new(vec![], -1.0);
    }

    #[test]
    fn first_coordinate_functional() {
        let r = InnerFunctional::first_coordinate();
        let v = TailBoundedVector::exact(vec![C64::new(0.7, 0.2), c(5.0)]);
        assert_eq!(r.eval(&v), C64::new(0.7, 0.2));
    }
}
