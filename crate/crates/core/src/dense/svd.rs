//! Singular values via Householder bidiagonalization and Sturm bisection on
//! the Golub-Kahan tridiagonal matrix.
//!
//! Accuracy is absolute, of order `eps * ||A||`, which is what the rank
//! decisions in `gamma` need.

use super::DenseMatrix;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Real upper bidiagonal factor: diagonal `d` and superdiagonal `e`.
#[derive(Debug, Clone)]
pub struct Bidiagonal {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

/// Reduce `A` (or `A^H` when wide) to a real bidiagonal with the same
/// singular values.
pub fn bidiagonalize(a: &DenseMatrix) -> Bidiagonal {
    let a = if a.rows() < a.cols() { a.adjoint() } else { a.clone() };
    let (m, n) = (a.rows(), a.cols());
    // column-major
    let mut w = vec![ZERO; m * n];
    for i in 0..m {
        for j in 0..n {
            w[j * m + i] = a[(i, j)];
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    for k in 0..n {
        // left reflector on column k, rows k..m
        let col: Vec<C64> = w[k * m + k..(k + 1) * m].to_vec();
        if let Some((u, beta)) = super::qr::reflector(&col) {
            let uu: f64 = u.iter().map(|z| z.norm_sqr()).sum();
            for j in k..n {
                let c = &mut w[j * m + k..(j + 1) * m];
                let dot: C64 = u.iter().zip(c.iter()).map(|(p, q)| p.conj() * q).sum();
                let f = dot * (2.0 / uu);
                for (ci, ui) in c.iter_mut().zip(&u) {
                    *ci -= f * ui;
                }
            }
            d[k] = beta.norm();
        } else {
            d[k] = 0.0;
        }
        if k + 1 >= n {
            continue;
        }
        // right reflector on row k, columns k+1..n
        let row_conj: Vec<C64> = ((k + 1)..n).map(|j| w[j * m + k].conj()).collect();
        if let Some((u, beta)) = super::qr::reflector(&row_conj) {
            let uu: f64 = u.iter().map(|z| z.norm_sqr()).sum();
            for i in k..m {
                let s: C64 = ((k + 1)..n).zip(&u).map(|(j, uj)| w[j * m + i] * uj).sum();
                let f = s * (2.0 / uu);
                for (j, uj) in ((k + 1)..n).zip(&u) {
                    w[j * m + i] -= f * uj.conj();
                }
            }
            e[k] = beta.norm();
        } else {
            e[k] = 0.0;
        }
    }
    Bidiagonal { d, e }
}

impl Bidiagonal {
    fn tgk_offdiag(&self) -> Vec<f64> {
        let n = self.d.len();
        let mut b = Vec::with_capacity(2 * n);
        for k in 0..n {
            b.push(self.d[k]);
            if k + 1 < n {
                b.push(self.e[k]);
            }
        }
        b
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let n = self.d.len();
        let mut out = self.bisect(1..=n);
        out.reverse();
        out
    }

    pub fn largest(&self) -> f64 {
        let n = self.d.len();
        if n == 0 {
            return 0.0;
        }
        self.bisect(n..=n)[0]
    }

    /// The `j`-th smallest singular values for `j` in `js` (1-based).
    fn bisect(&self, js: std::ops::RangeInclusive<usize>) -> Vec<f64> {
        let n = self.d.len();
        if n == 0 {
            return Vec::new();
        }
        let b = self.tgk_offdiag();
        let bmax = b.iter().copied().fold(0.0, f64::max);
        if bmax == 0.0 {
            return vec![0.0; js.count()];
        }
        let b2: Vec<f64> = b.iter().map(|x| x * x).collect();
        let pivmin = f64::MIN_POSITIVE * bmax * bmax;
        let hi0 = 2.0 * bmax * (1.0 + 1e-12) + pivmin;
        let abs_tol = 2.0 * f64::EPSILON * bmax;
        let count_below = |x: f64| -> usize {
            let mut count = 0;
            let mut q = -x;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
            for &bb in &b2 {
                q = -x - bb / q;
                if q.abs() < pivmin {
                    q = -pivmin;
                }
                if q < 0.0 {
                    count += 1;
                }
            }
            count
        };
        let mut out = Vec::with_capacity(n);
        for j in js {
            let target = n + j;
            let (mut lo, mut hi) = (0.0f64, hi0);
            for _ in 0..200 {
                if hi - lo <= abs_tol.max(4.0 * f64::EPSILON * hi) {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if count_below(mid) >= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        out
    }
}

/// Largest singular value, to the same absolute accuracy.
pub fn sigma_max(a: &DenseMatrix) -> f64 {
    if a.rows() == 0 || a.cols() == 0 {
        return 0.0;
    }
    bidiagonalize(a).largest()
}

/// All singular values of `a`, descending.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    bidiagonalize(a).singular_values()
}


#[cfg(test)]
mod tests {
    use super::oracle::jacobi_singular_values;
    use super::*;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{x} vs {y}");
        }
    }

    #[test]
    fn matches_jacobi_on_random_square() {
        let a = DenseMatrix::random(10, 10, 42);
        assert_close(&singular_values(&a), &jacobi_singular_values(&a), 1e-12);
    }

    #[test]
    fn matches_jacobi_on_tall_and_wide() {
        let a = DenseMatrix::random(13, 6, 7);
        assert_close(&singular_values(&a), &jacobi_singular_values(&a), 1e-12);
        let b = a.adjoint();
        assert_close(&singular_values(&b), &jacobi_singular_values(&b), 1e-12);
    }

    #[test]
    fn rank_deficient_shows_clean_zeros() {
        // subdiagonal ones: singular values 1 (n-1 times) and 0
        let n = 16;
        let a = DenseMatrix::from_fn(n, n, |i, j| if i == j + 1 { C64::new(1.0, 0.0) } else { ZERO });
        let sv = singular_values(&a);
        for s in &sv[..n - 1] {
            assert!((s - 1.0).abs() < 1e-14);
        }
        assert!(sv[n - 1] < 1e-14);
    }

    #[test]
    fn largest_matches_full_list() {
        let a = DenseMatrix::random(9, 5, 3);
        assert_eq!(sigma_max(&a), singular_values(&a)[0]);
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(singular_values(&DenseMatrix::zeros(3, 2)), vec![0.0, 0.0]);
    }
}
