//! Norms, spectral radius, smallest singular value and reduced minimum
//! modulus of dense matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{singular_values, vec_norm, DenseMatrix, Lu};
use crate::{Error, Result, C64};

pub const DEFAULT_MAXIT: usize = 10_000;
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
const RESTART_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn normalize(v: &mut [C64]) -> f64 {
    let n = vec_norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|z| *z /= n);
    }
    n
}

fn random_unit(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    normalize(&mut v);
    v
}

/// Power iteration on `A^H A` from `start`. Returns (sigma^2, residual, iterations, converged).
fn power_gram(a: &DenseMatrix, mut v: Vec<C64>, tol: f64, maxit: usize) -> (f64, f64, usize, bool) {
    let mut mu = 0.0;
    let mut resid = f64::INFINITY;
    for it in 1..=maxit {
        let av = a.matvec(&v).expect("shape checked");
        let w = a.adjoint_matvec(&av).expect("shape checked");
        mu = av.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if mu == 0.0 {
            return (0.0, f64::INFINITY, it, false);
        }
        let r: Vec<C64> = w.iter().zip(&v).map(|(p, q)| p - q * mu).collect();
        resid = vec_norm(&r) / mu;
        if resid <= tol {
            return (mu, resid, it, true);
        }
        v = w;
        normalize(&mut v);
    }
    (mu, resid, maxit, false)
}

/// `||A||_2` by power iteration on `A^H A`, starting from the all-ones vector
/// and restarting once from a fixed-seed random vector.
pub fn norm2(a: &DenseMatrix, tol: f64, maxit: usize) -> Result<SpectralEstimate> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tol must be positive".into()));
    }
    let n = a.cols();
    if n == 0 || a.rows() == 0 || a.max_abs() == 0.0 {
        return Ok(SpectralEstimate {
            value: 0.0,
            residual: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let half = (maxit / 2).max(1);
    let ones = vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let (mu1, r1, it1, ok1) = power_gram(a, ones, tol, half);
    if ok1 {
        return Ok(SpectralEstimate {
            value: mu1.sqrt(),
            residual: r1,
            iterations: it1,
            converged: true,
        });
    }
    let (mu2, r2, it2, ok2) = power_gram(a, random_unit(n, RESTART_SEED), tol, maxit - half.min(maxit));
    let mu = mu1.max(mu2);
    if ok2 {
        return Ok(SpectralEstimate {
            value: mu2.sqrt(),
            residual: r2,
            iterations: it1 + it2,
            converged: true,
        });
    }
    Err(Error::NotConverged {
        best: mu.sqrt(),
        lower: mu.sqrt(),
        upper: a.frobenius_norm(),
        iterations: it1 + it2,
    })
}

/// Spectral radius through the Gelfand sequence `||A^(2^j)||^(1/2^j)`.
///
/// Powers are formed by repeated squaring with renormalization, and the
/// Frobenius norm is used throughout; it differs from the 2-norm by at most
/// a factor `sqrt(n)`, which the root washes out. Each step yields the
/// extrapolant `(log||A^(2^j)|| - log||A^(2^(j-1))||) / 2^(j-1)`, whose error
/// decays like the spectral gap rather than like `log(n)/2^j`.
///
/// The value is clamped into the bracket `[lower, upper]` where `upper` is
/// the best Gelfand value and `lower` comes from `|tr A^(2^j)| / n`.
pub fn spectral_radius(a: &DenseMatrix, tol: f64, maxit: usize) -> Result<SpectralEstimate> {
    if !a.is_square() {
        return Err(Error::Dimension("spectral radius of a non-square matrix".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tol must be positive".into()));
    }
    let n = a.rows() as f64;
    let f0 = a.frobenius_norm();
    if f0 == 0.0 {
        return Ok(SpectralEstimate {
            value: 0.0,
            residual: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let mut b = a.scale(C64::new(1.0 / f0, 0.0));
    // log ||A^(2^j)|| / 2^j
    let mut m_prev = f0.ln();
    let mut upper = f0;
    let mut lower = (a.trace().norm() / n).max(0.0);
    let mut prev_ext: Option<f64> = None;
    let limit = maxit.clamp(1, 1000);
    for j in 1..=limit {
        let sq = b.matmul(&b).expect("square");
        let f = sq.frobenius_norm();
        if f == 0.0 {
            // A^(2^j) vanishes: nilpotent
            return Ok(SpectralEstimate {
                value: 0.0,
                residual: 0.0,
                iterations: j,
                converged: true,
            });
        }
        let pow = 2f64.powi(j as i32);
        let half = 2f64.powi(j as i32 - 1);
        let ell = f.ln();
        let m = m_prev + ell / pow;
        let ext = m_prev + ell / half;
        b = sq.scale(C64::new(1.0 / f, 0.0));
        upper = upper.min(m.exp());
        let tr = b.trace().norm() / n;
        if tr > 0.0 {
            lower = lower.max((m + tr.ln() / pow).exp());
        }
        let ext_val = ext.exp();
        if let Some(p) = prev_ext {
            let residual = (ext_val - p).abs() / ext_val.max(f64::MIN_POSITIVE);
            if residual <= tol {
                return Ok(SpectralEstimate {
                    value: ext_val.clamp(lower.min(upper), upper),
                    residual,
                    iterations: j,
                    converged: true,
                });
            }
        }
        prev_ext = Some(ext_val);
        m_prev = m;
    }
    let best = prev_ext.unwrap_or(upper).clamp(lower.min(upper), upper);
    Err(Error::NotConverged {
        best,
        lower,
        upper,
        iterations: limit,
    })
}

/// Smallest singular value by inverse iteration on `A^H A`.
///
/// Square matrices use an LU factorization of `A`; tall matrices use the
/// Gram matrix. Wide matrices are handled through their adjoint. A singular
/// factorization reports 0.
pub fn smallest_singular_value(a: &DenseMatrix, tol: f64) -> Result<SpectralEstimate> {
    smallest_singular_value_with(a, tol, DEFAULT_MAXIT)
}

pub fn smallest_singular_value_with(a: &DenseMatrix, tol: f64, maxit: usize) -> Result<SpectralEstimate> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tol must be positive".into()));
    }
    if a.rows() < a.cols() {
        return smallest_singular_value_with(&a.adjoint(), tol, maxit);
    }
    let n = a.cols();
    if n == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    let singular = |iterations| SpectralEstimate {
        value: 0.0,
        residual: 0.0,
        iterations,
        converged: true,
    };
    let square = a.is_square();
    let lu = if square { Lu::factor(a) } else { Lu::factor(&a.gram()) };
    let lu = match lu {
        Ok(lu) => lu,
        Err(Error::SingularToTolerance { .. }) => return Ok(singular(0)),
        Err(e) => return Err(e),
    };
    // z = (A^H A)^{-1} v
    let apply_inv = |v: &[C64]| -> Result<Vec<C64>> {
        if square {
            let y = lu.solve_adjoint(v)?;
            lu.solve(&y)
        } else {
            lu.solve(v)
        }
    };
    let mut v = vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let mut est = f64::INFINITY;
    for it in 1..=maxit.max(1) {
        let z = apply_inv(&v)?;
        let rayleigh: f64 = v.iter().zip(&z).map(|(p, q)| (p.conj() * q).re).sum();
        if !rayleigh.is_finite() || rayleigh <= 0.0 {
            return Ok(singular(it));
        }
        let new_est = (1.0 / rayleigh).sqrt();
        let residual = (new_est - est).abs() / new_est.max(f64::MIN_POSITIVE);
        est = new_est;
        let mut z = z;
        if normalize(&mut z) == 0.0 {
            return Ok(singular(it));
        }
        v = z;
        if residual <= tol {
            // the Rayleigh quotient of the last iterate is sharper
            let av = a.matvec(&v)?;
            let sharp = vec_norm(&av);
            return Ok(SpectralEstimate {
                value: sharp.min(est),
                residual,
                iterations: it,
                converged: true,
            });
        }
    }
    Err(Error::NotConverged {
        best: est,
        lower: 0.0,
        upper: est,
        iterations: maxit,
    })
}

/// Reduced minimum modulus of a matrix: its smallest nonzero singular value.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaEstimate {
    pub value: f64,
    pub sigma_max: f64,
    pub rank: usize,
    /// Smallest retained singular value over the larger of the threshold
    /// and the largest discarded one.
    pub gap_ratio: f64,
    pub zero_operator: bool,
    /// Set when `gap_ratio < 10`: the rank decision is fragile.
    pub ambiguous_rank_gap: bool,
}

/// Smallest singular value above `rank_tol * ||A||_2`.
pub fn gamma(a: &DenseMatrix, rank_tol: f64) -> Result<GammaEstimate> {
    if !(rank_tol > 0.0) {
        return Err(Error::InvalidInput("rank_tol must be positive".into()));
    }
    let sv = singular_values(a);
    Ok(gamma_from_singular_values(&sv, rank_tol))
}

pub fn gamma_from_singular_values(sv: &[f64], rank_tol: f64) -> GammaEstimate {
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let threshold = rank_tol * sigma_max;
    let rank = sv.iter().take_while(|&&s| s > threshold).count();
    if sigma_max == 0.0 || rank == 0 {
        return GammaEstimate {
            value: 0.0,
            sigma_max,
            rank: 0,
            gap_ratio: f64::INFINITY,
            zero_operator: true,
            ambiguous_rank_gap: false,
        };
    }
    let value = sv[rank - 1];
    let below = sv.get(rank).copied().unwrap_or(0.0).max(threshold);
    let gap_ratio = value / below;
    GammaEstimate {
        value,
        sigma_max,
        rank,
        gap_ratio,
        zero_operator: false,
        ambiguous_rank_gap: gap_ratio < 10.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::svd::oracle::jacobi_singular_values;

    fn c(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn norm2_basics() {
        let e = norm2(&DenseMatrix::identity(5), 1e-12, DEFAULT_MAXIT).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12 && e.converged);
        let e = norm2(&DenseMatrix::diag_real(&[3.0, -1.0]), 1e-12, DEFAULT_MAXIT).unwrap();
        assert!((e.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn norm2_matches_jacobi_oracle() {
        let a = DenseMatrix::random(10, 10, 11);
        let e = norm2(&a, 1e-12, DEFAULT_MAXIT).unwrap();
        let sv = jacobi_singular_values(&a);
        assert!((e.value - sv[0]).abs() < 1e-8, "{} vs {}", e.value, sv[0]);
    }

    #[test]
    fn norm2_restarts_when_ones_is_orthogonal() {
        // (1, -1) direction carries all the mass; ones is in the kernel
        let a = DenseMatrix::from_real_rows(&[&[1.0, -1.0], &[0.0, 0.0]]).unwrap();
        let e = norm2(&a, 1e-12, 100).unwrap();
        assert!((e.value - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn spectral_radius_examples() {
        let e = spectral_radius(&DenseMatrix::identity(4), 1e-12, DEFAULT_MAXIT).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        let jordan = DenseMatrix::from_fn(4, 4, |i, j| if j == i + 1 { c(1.0) } else { c(0.0) });
        let e = spectral_radius(&jordan, 1e-10, DEFAULT_MAXIT).unwrap();
        assert!(e.value < 1e-6);
        let companion = DenseMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e = spectral_radius(&companion, 1e-12, DEFAULT_MAXIT).unwrap();
        // root of z^2 - z - 1 by Newton from 2
        let mut z = 2.0f64;
        for _ in 0..50 {
            z -= (z * z - z - 1.0) / (2.0 * z - 1.0);
        }
        assert!((e.value - z).abs() < 1e-6, "{} vs {z}", e.value);
    }

    #[test]
    fn spectral_radius_of_rotation_uses_trace_bracket() {
        let r = DenseMatrix::from_real_rows(&[&[0.0, -2.0], &[2.0, 0.0]]).unwrap();
        let e = spectral_radius(&r, 1e-12, DEFAULT_MAXIT).unwrap();
        assert!((e.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn spectral_radius_nonnormal_below_norm() {
        let a = DenseMatrix::from_real_rows(&[&[0.5, 10.0], &[0.0, 0.25]]).unwrap();
        let e = spectral_radius(&a, 1e-10, DEFAULT_MAXIT).unwrap();
        assert!((e.value - 0.5).abs() < 1e-6, "{}", e.value);
    }

    #[test]
    fn smallest_singular_value_examples() {
        let e = smallest_singular_value(&DenseMatrix::diag_real(&[0.0, 2.0, 3.0]), 1e-12).unwrap();
        assert_eq!(e.value, 0.0);
        let shift = DenseMatrix::from_fn(8, 8, |i, j| if i == j + 1 { c(1.0) } else { c(0.0) });
        assert_eq!(smallest_singular_value(&shift, 1e-12).unwrap().value, 0.0);
        let a = DenseMatrix::random(12, 12, 99);
        let e = smallest_singular_value(&a, 1e-14).unwrap();
        let sv = jacobi_singular_values(&a);
        assert!((e.value - sv[11]).abs() < 1e-8, "{} vs {}", e.value, sv[11]);
    }

    #[test]
    fn smallest_singular_value_rectangular() {
        let a = DenseMatrix::random(15, 6, 4);
        let e = smallest_singular_value(&a, 1e-14).unwrap();
        let sv = jacobi_singular_values(&a);
        assert!((e.value - sv[5]).abs() < 1e-8);
        let e = smallest_singular_value(&a.adjoint(), 1e-14).unwrap();
        assert!((e.value - sv[5]).abs() < 1e-8);
    }

    #[test]
    fn gamma_examples() {
        let g = gamma(&DenseMatrix::diag_real(&[0.0, 2.0, 3.0]), DEFAULT_RANK_TOL).unwrap();
        assert!((g.value - 2.0).abs() < 1e-13 && g.rank == 2 && !g.ambiguous_rank_gap);
        let shift = DenseMatrix::from_fn(16, 16, |i, j| if i == j + 1 { c(1.0) } else { c(0.0) });
        let g = gamma(&shift, DEFAULT_RANK_TOL).unwrap();
        assert!((g.value - 1.0).abs() < 1e-13 && g.rank == 15);
        let z = gamma(&DenseMatrix::zeros(3, 3), DEFAULT_RANK_TOL).unwrap();
        assert!(z.zero_operator && z.value == 0.0);
    }

    #[test]
    fn gamma_flags_ambiguous_gap() {
        let g = gamma(&DenseMatrix::diag_real(&[1.0, 5e-9]), DEFAULT_RANK_TOL).unwrap();
        assert!(g.ambiguous_rank_gap);
    }
}
