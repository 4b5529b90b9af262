//! Small-matrix eigenvalue oracle: Hessenberg reduction followed by
//! single-shift complex QR with Wilkinson shifts.

use super::qr::{reflect, reflector};
use super::DenseMatrix;
use crate::{Error, Result, C64};

pub const EIG_ORACLE_MAX_DIM: usize = 64;

fn hessenberg(a: &DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        let Some((u, _)) = reflector(&x) else { continue };
        for j in 0..n {
            let mut col: Vec<C64> = ((k + 1)..n).map(|i| h[(i, j)]).collect();
            reflect(&u, &mut col);
            for (i, z) in ((k + 1)..n).zip(col) {
                h[(i, j)] = z;
            }
        }
        // right multiplication: rows of H times the (Hermitian) reflector
        for i in 0..n {
            let mut row: Vec<C64> = ((k + 1)..n).map(|j| h[(i, j)].conj()).collect();
            reflect(&u, &mut row);
            for (j, z) in ((k + 1)..n).zip(row) {
                h[(i, j)] = z.conj();
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
    h
}

fn givens(a: C64, b: C64) -> (f64, C64) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if a.norm() == 0.0 {
        return (0.0, b.conj() / b.norm());
    }
    let c = a.norm() / r;
    let s = (a / a.norm()) * b.conj() / r;
    (c, s)
}

fn wilkinson(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() < (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// All eigenvalues of a square matrix with `n <= 64`. Intended as a test
/// oracle; the order of the returned values is unspecified.
pub fn eig_oracle(a: &DenseMatrix) -> Result<Vec<C64>> {
    if !a.is_square() {
        return Err(Error::Dimension("eigenvalues of a non-square matrix".into()));
    }
    let n = a.rows();
    if n > EIG_ORACLE_MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "eig_oracle supports n <= {EIG_ORACLE_MAX_DIM}, got {n}"
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(a);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut iter_since_deflation = 0usize;
    let mut total_iter = 0usize;
    let max_iter = 100 * n.max(1);
    loop {
        // deflate
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if sub <= f64::EPSILON * diag.max(f64::EPSILON * scale) {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eigs.push(h[(hi, hi)]);
            iter_since_deflation = 0;
            if hi == 0 {
                break;
            }
            hi -= 1;
            continue;
        }
        total_iter += 1;
        iter_since_deflation += 1;
        if total_iter > max_iter {
            return Err(Error::NotConverged {
                best: f64::NAN,
                lower: f64::NAN,
                upper: f64::NAN,
                iterations: total_iter,
            });
        }
        let mut mu = wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
        if iter_since_deflation % 11 == 10 {
            // exceptional shift
            mu = h[(hi, hi)] + C64::new(0.75, 0.5) * h[(hi, hi - 1)].norm();
        }
        for k in lo..=hi {
            h[(k, k)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = c * x + s * y;
                h[(k + 1, j)] = -s.conj() * x + c * y;
            }
            rots.push((c, s));
        }
        for (idx, k) in (lo..hi).enumerate() {
            let (c, s) = rots[idx];
            let top = (k + 2).min(hi);
            for i in lo..=top {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += mu;
        }
    }
    Ok(eigs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::Lu;

    fn sorted_re(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn diagonal_eigenvalues() {
        let e = sorted_re(eig_oracle(&DenseMatrix::diag_real(&[1.0, 2.0, 3.0])).unwrap());
        for (z, want) in e.iter().zip([1.0, 2.0, 3.0]) {
            assert!((z - C64::new(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_has_plus_minus_i() {
        let r = DenseMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        let e = eig_oracle(&r).unwrap();
        let mut ims: Vec<f64> = e.iter().map(|z| z.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-12 && (ims[1] - 1.0).abs() < 1e-12);
        assert!(e.iter().all(|z| z.re.abs() < 1e-12));
    }

    #[test]
    fn product_matches_lu_determinant() {
        let a = DenseMatrix::random(8, 8, 8);
        let e = eig_oracle(&a).unwrap();
        let prod: C64 = e.iter().product();
        let det = Lu::factor(&a).unwrap().determinant();
        assert!((prod - det).norm() < 1e-6 * det.norm().max(1.0), "{prod} vs {det}");
        let tr: C64 = e.iter().sum();
        assert!((tr - a.trace()).norm() < 1e-10);
    }

    #[test]
    fn hessenberg_is_similarity() {
        let a = DenseMatrix::random(7, 7, 3);
        let h = hessenberg(&a);
        assert!((h.trace() - a.trace()).norm() < 1e-12);
        assert!((h.frobenius_norm() - a.frobenius_norm()).abs() < 1e-12);
        for i in 2..7 {
            for j in 0..i - 1 {
                assert_eq!(h[(i, j)], C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn rejects_large_inputs() {
        assert!(eig_oracle(&DenseMatrix::zeros(65, 65)).is_err());
    }
}
