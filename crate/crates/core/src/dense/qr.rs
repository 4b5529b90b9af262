//! Householder QR for tall matrices and least-squares solves.

use super::DenseMatrix;
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Hermitian reflector `I - 2 u u^H / (u^H u)` mapping `x` onto a multiple of `e_1`.
/// Returns `None` when `x` is already zero.
pub(crate) fn reflector(x: &[C64]) -> Option<(Vec<C64>, C64)> {
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    let phase = if x[0].norm() == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        x[0] / x[0].norm()
    };
    let mut u = x.to_vec();
    u[0] += phase * norm;
    // H x = -phase * norm * e_1
    Some((u, -phase * norm))
}

/// Apply the reflector defined by `u` to `v` in place.
pub(crate) fn reflect(u: &[C64], v: &mut [C64]) {
    let uu: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    if uu == 0.0 {
        return;
    }
    let dot: C64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    let f = dot * (2.0 / uu);
    for (vi, ui) in v.iter_mut().zip(u) {
        *vi -= f * ui;
    }
}

#[derive(Debug, Clone)]
pub struct Qr {
    rows: usize,
    cols: usize,
    r: DenseMatrix,
    reflectors: Vec<Option<Vec<C64>>>,
}

impl Qr {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        let (m, n) = (a.rows(), a.cols());
        if m < n {
            return Err(Error::Dimension(format!("QR needs rows >= cols, got {m}x{n}")));
        }
        // column-major working copy
        let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
        let mut reflectors = Vec::with_capacity(n);
        for k in 0..n {
            let h = reflector(&cols[k][k..]);
            if let Some((u, _)) = &h {
                for col in cols.iter_mut().skip(k) {
                    reflect(u, &mut col[k..]);
                }
            }
            reflectors.push(h.map(|(u, _)| u));
        }
        let r = DenseMatrix::from_fn(n, n, |i, j| if i <= j { cols[j][i] } else { ZERO });
        Ok(Self {
            rows: m,
            cols: n,
            r,
            reflectors,
        })
    }

    pub fn r(&self) -> &DenseMatrix {
        &self.r
    }

    /// `Q^H b`.
    pub fn apply_qh(&self, b: &[C64]) -> Vec<C64> {
        let mut y = b.to_vec();
        for (k, u) in self.reflectors.iter().enumerate() {
            if let Some(u) = u {
                reflect(u, &mut y[k..]);
            }
        }
        y
    }

    /// Smallest over largest diagonal magnitude of `R`.
    pub fn pivot_ratio(&self) -> f64 {
        let d: Vec<f64> = (0..self.cols).map(|i| self.r[(i, i)].norm()).collect();
        let max = d.iter().copied().fold(0.0, f64::max);
        let min = d.iter().copied().fold(f64::INFINITY, f64::min);
        if max == 0.0 {
            0.0
        } else {
            min / max
        }
    }

    /// Least-squares solution and residual norm.
    pub fn solve_least_squares(&self, b: &[C64]) -> Result<(Vec<C64>, f64)> {
        if b.len() != self.rows {
            return Err(Error::Dimension("rhs length".into()));
        }
        let y = self.apply_qh(b);
        let n = self.cols;
        let mut x = vec![ZERO; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in (i + 1)..n {
                s -= self.r[(i, j)] * x[j];
            }
            let d = self.r[(i, i)];
            if d.norm() == 0.0 {
                return Err(Error::SingularToTolerance { step: i, pivot: 0.0 });
            }
            x[i] = s / d;
        }
        let resid = y[n..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Ok((x, resid))
    }
}
