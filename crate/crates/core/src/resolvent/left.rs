use super::{Domain, ResolventKind, ResolventMap};
use crate::dense::{singular_values, DenseMatrix, Qr, DEFAULT_RANK_TOL};
use crate::operator::{OperatorExpr, TailBoundedVector};
use crate::{Error, Result, C64};

const ONE: C64 = C64::new(1.0, 0.0);

/// Columns `1..n` of `lambda - T`, with every row they reach.
fn window_of_lambda_minus(t: &OperatorExpr, lambda: C64, n: usize) -> Result<DenseMatrix> {
    Ok(t.lambda_minus(lambda).column_window(n)?.matrix)
}

/// `A^+ = R^{-1} Q^H` for a tall full-column-rank matrix.
fn pseudo_inverse(qr: &Qr, rows: usize, cols: usize) -> Result<DenseMatrix> {
    let mut pinv = DenseMatrix::zeros(cols, rows);
    let mut e = vec![C64::new(0.0, 0.0); rows];
    for i in 0..rows {
        e.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        e[i] = ONE;
        let (x, _) = qr.solve_least_squares(&e)?;
        pinv.set_column(i, &x);
    }
    Ok(pinv)
}

/// Moore-Penrose left inverse of the `n`-column window of `lambda - T`,
/// as a finite operator acting on the window rows.
pub fn mp_left_inverse(t: &OperatorExpr, lambda: C64, n: usize) -> Result<OperatorExpr> {
    let a = window_of_lambda_minus(t, lambda, n)?;
    let sv = singular_values(&a);
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    if a.rows() < a.cols() || smin <= DEFAULT_RANK_TOL * smax.max(1.0) {
        return Err(Error::NotLeftInvertible { sigma_min: smin });
    }
    let qr = Qr::factor(&a)?;
    Ok(OperatorExpr::finite(pseudo_inverse(&qr, a.rows(), a.cols())?))
}

pub fn mp_resolvent_map(t: &OperatorExpr, n: usize, domain: Domain) -> ResolventMap {
    let t = t.clone();
    ResolventMap::new("moore-penrose", ResolventKind::Left, domain, move |lambda| {
        mp_left_inverse(&t, lambda, n)
    })
}

struct Augmented {
    qr: Qr,
    rows: usize,
    n: usize,
    k: usize,
    sigma_min: f64,
}

fn augmented(
    t: &OperatorExpr,
    complement: &[TailBoundedVector],
    lambda: C64,
    n: usize,
    min_rows: usize,
) -> Result<Augmented> {
    let w = window_of_lambda_minus(t, lambda, n)?;
    let k = complement.len();
    let rows = complement
        .iter()
        .map(|m| m.support_len())
        .chain([w.rows(), min_rows, n + k])
        .max()
        .unwrap_or(0);
    let mut aug = w.resized(rows, n + k);
    for (j, m) in complement.iter().enumerate() {
        aug.set_column(n + j, &m.to_dense(rows));
    }
    let qr = Qr::factor(&aug)?;
    let sv = singular_values(qr.r());
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    if ratio < DEFAULT_RANK_TOL {
        return Err(Error::ComplementDegenerate { ratio });
    }
    Ok(Augmented {
        qr,
        rows,
        n,
        k,
        sigma_min: smin,
    })
}

/// `f = L(lambda) g` where `g = (lambda - T) f + m` with `m` in the span of
/// `complement`. The kernel of `L(lambda)` is that fixed span, so the family
/// is a left resolvent.
pub fn complement_left_resolvent(
    t: &OperatorExpr,
    complement: &[TailBoundedVector],
    lambda: C64,
    g: &TailBoundedVector,
    n: usize,
) -> Result<TailBoundedVector> {
    let aug = augmented(t, complement, lambda, n, g.support_len())?;
    let (x, resid) = aug.qr.solve_least_squares(&g.to_dense(aug.rows))?;
    let tail = (g.tail_bound() + resid) / aug.sigma_min;
    Ok(TailBoundedVector::new(x[..aug.n].to_vec(), tail))
}

/// The complement construction as a map; each evaluation materializes the
/// `f`-rows of the augmented pseudo-inverse.
pub fn complement_resolvent_map(
    t: &OperatorExpr,
    complement: Vec<TailBoundedVector>,
    n: usize,
    domain: Domain,
) -> ResolventMap {
    let t = t.clone();
    ResolventMap::new("complement", ResolventKind::Left, domain, move |lambda| {
        let aug = augmented(&t, &complement, lambda, n, 0)?;
        let pinv = pseudo_inverse(&aug.qr, aug.rows, aug.n + aug.k)?;
        Ok(OperatorExpr::finite(pinv.submatrix(aug.n, aug.rows)))
    })
}

/// Closed-form left resolvent of the unweighted forward shift with kernel
/// `span(e_1)`: `L(lambda) = (lambda S - I)^{-1} S`, `S` the backward shift.
pub fn shift_left_resolvent() -> ResolventMap {
    let s = OperatorExpr::backward();
    ResolventMap::new("shift-left", ResolventKind::Left, Domain::disk(1.0), move |lambda| {
        Ok(OperatorExpr::geometric_inverse(lambda, &s).compose(&s))
    })
}

/// Closed-form right resolvent of the unweighted backward shift:
/// `R(lambda) = U (lambda U - I)^{-1}`, `U` the forward shift.
pub fn backward_right_resolvent() -> ResolventMap {
    let u = OperatorExpr::shift();
    ResolventMap::new(
        "backward-right",
        ResolventKind::Right,
        Domain::disk(1.0),
        move |lambda| Ok(u.compose(&OperatorExpr::geometric_inverse(lambda, &u))),
    )
}

/// `(lambda - c)^{-1} I`.
pub fn scalar_resolvent_map(c: C64) -> ResolventMap {
    ResolventMap::new(
        "scalar",
        ResolventKind::TwoSided,
        Domain::Exterior { center: c, radius: 0.0 },
        move |lambda| Ok(OperatorExpr::scalar((lambda - c).inv())),
    )
}

/// `(lambda - T)^{-1} = -(1/lambda) (T/lambda - I)^{-1}` for `|lambda| > ||T||`.
pub fn true_resolvent_map(t: &OperatorExpr) -> ResolventMap {
    let t = t.clone();
    let radius = t.norm_bound();
    ResolventMap::new(
        "neumann-exterior",
        ResolventKind::TwoSided,
        Domain::Exterior {
            center: C64::new(0.0, 0.0),
            radius,
        },
        move |lambda| {
            let inv = lambda.inv();
            Ok(OperatorExpr::geometric_inverse(inv, &t).scaled(-inv))
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::vec_norm;
    use crate::operator::PeriodicSeq;
    use crate::resolvent::{residual_left_inverse, residual_resolvent_identity, standard_probes};

    fn c(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    /// Coefficients of `(g(z) - g(lambda)) / (lambda - z)` by synthetic division.
    fn division_oracle(g: &[C64], lambda: C64) -> Vec<C64> {
        // (g(z) - g(lambda)) / (z - lambda) via Horner, then negate
        let d = g.len();
        if d <= 1 {
            return Vec::new();
        }
        let mut q = vec![C64::new(0.0, 0.0); d - 1];
        let mut acc = C64::new(0.0, 0.0);
        for i in (1..d).rev() {
            acc = acc * lambda + g[i];
            q[i - 1] = acc;
        }
        q.iter().map(|z| -z).collect()
    }

    #[test]
    fn mp_left_inverse_examples() {
        let u = OperatorExpr::shift();
        let l = mp_left_inverse(&u, c(0.0), 32).unwrap();
        let e1 = TailBoundedVector::basis(1);
        let y = l.apply(&u.lambda_minus(c(0.0)).apply(&e1).unwrap()).unwrap();
        assert!(y.eps_eq(&e1, 1e-12));
        let d = OperatorExpr::diagonal(PeriodicSeq::constant(c(2.0)));
        let l = mp_left_inverse(&d, c(0.0), 8).unwrap();
        let m = l.truncate(8).unwrap();
        assert!(m.sub(&DenseMatrix::diag_real(&[-0.5; 8])).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn mp_kernel_is_conjugate_eigenvector() {
        let u = OperatorExpr::shift();
        let n = 40;
        let l = mp_left_inverse(&u, c(0.5), n).unwrap();
        let lm = l.column_window(n + 1).unwrap().matrix;
        let k: Vec<C64> = (0..=n).map(|i| c(0.5f64.powi(i as i32))).collect();
        let lk = lm.matvec(&k).unwrap();
        assert!(vec_norm(&lk) < 1e-10 * vec_norm(&k));
    }

    #[test]
    fn mp_rejects_non_left_invertible() {
        let d = OperatorExpr::diagonal(PeriodicSeq::constant(c(2.0)));
        assert!(matches!(
            mp_left_inverse(&d, c(2.0), 8),
            Err(Error::NotLeftInvertible { .. })
        ));
    }

    #[test]
    fn complement_solve_matches_polynomial_division() {
        let u = OperatorExpr::shift();
        let m = [TailBoundedVector::basis(1)];
        let lambda = c(0.3);
        let f = complement_left_resolvent(&u, &m, lambda, &TailBoundedVector::basis(1), 32).unwrap();
        assert!(f.norm_upper() < 1e-12);
        let f = complement_left_resolvent(&u, &m, lambda, &TailBoundedVector::basis(2), 32).unwrap();
        assert!(f.eps_eq(&TailBoundedVector::from_real(&[-1.0]), 1e-12));
        let f = complement_left_resolvent(&u, &m, lambda, &TailBoundedVector::basis(3), 32).unwrap();
        assert!(f.eps_eq(&TailBoundedVector::from_real(&[-0.3, -1.0]), 1e-12));
        for lambda in [c(0.3), C64::new(0.0, 0.5), C64::new(-0.7, 0.2)] {
            for g in standard_probes() {
                let f = complement_left_resolvent(&u, &m, lambda, &g, 32).unwrap();
                let oracle = TailBoundedVector::exact(division_oracle(g.coeffs(), lambda));
                assert!(f.eps_eq(&oracle, 1e-11), "lambda {lambda}");
            }
        }
    }

    #[test]
    fn complement_is_linear() {
        let u = OperatorExpr::shift();
        let m = [TailBoundedVector::basis(1)];
        let p = standard_probes();
        let alpha = C64::new(0.7, -1.3);
        let lambda = C64::new(0.2, 0.4);
        let lhs = complement_left_resolvent(&u, &m, lambda, &p[20].axpy(alpha, &p[3]), 32).unwrap();
        let a = complement_left_resolvent(&u, &m, lambda, &p[20], 32).unwrap();
        let b = complement_left_resolvent(&u, &m, lambda, &p[3], 32).unwrap();
        assert!(lhs.eps_eq(&a.axpy(alpha, &b), 1e-12));
    }

    #[test]
    fn degenerate_complement_is_reported() {
        // e_2 lies in the range of lambda - U at lambda = 0
        let u = OperatorExpr::shift();
        let r = complement_left_resolvent(
            &u,
            &[TailBoundedVector::basis(2)],
            c(0.0),
            &TailBoundedVector::basis(1),
            16,
        );
        assert!(matches!(r, Err(Error::ComplementDegenerate { .. })));
    }

    #[test]
    fn closed_form_agrees_with_window_map() {
        let u = OperatorExpr::shift();
        let win = complement_resolvent_map(&u, vec![TailBoundedVector::basis(1)], 48, Domain::disk(1.0));
        let closed = shift_left_resolvent();
        for lambda in [c(0.3), C64::new(0.0, 0.5)] {
            for x in standard_probes() {
                let a = win.apply(lambda, &x).unwrap();
                let b = closed.apply(lambda, &x).unwrap();
                assert!(a.eps_eq(&b, 1e-11));
            }
        }
    }

    #[test]
    fn left_resolvent_residuals() {
        let u = OperatorExpr::shift();
        let probes = standard_probes();
        let l = shift_left_resolvent();
        for lambda in [c(0.3), C64::new(0.0, 0.5)] {
            assert!(residual_left_inverse(&l, &u, lambda, &probes).unwrap().max_residual < 1e-10);
        }
        let r = residual_resolvent_identity(&l, c(0.3), C64::new(0.0, 0.5), &probes).unwrap();
        assert!(r.max_residual < 1e-10);
        let mp = mp_resolvent_map(&u, 64, Domain::disk(1.0));
        let r = residual_left_inverse(&mp, &u, c(0.3), &probes).unwrap();
        assert!(r.max_residual < 1e-9);
        let r = residual_resolvent_identity(&mp, c(0.3), C64::new(0.0, 0.5), &probes).unwrap();
        assert!(r.max_residual > 1e-2);
    }

    #[test]
    fn wrong_left_inverse_is_detected() {
        let t = OperatorExpr::shift().scaled(c(2.0));
        let t2 = t.clone();
        let wrong = ResolventMap::new("adjoint", ResolventKind::Left, Domain::Whole, move |_| Ok(t2.adjoint()));
        let r = residual_left_inverse(&wrong, &t, c(0.0), &standard_probes()).unwrap();
        assert!(r.max_residual > 1.0);
    }

    #[test]
    fn right_resolvent_of_backward_shift() {
        let s = OperatorExpr::backward();
        let r = backward_right_resolvent();
        let rep = crate::resolvent::residual_right_inverse(&r, &s, c(0.3), &standard_probes()).unwrap();
        assert!(rep.max_residual < 1e-12);
        let rep = residual_resolvent_identity(&r, c(0.3), C64::new(0.0, 0.5), &standard_probes()).unwrap();
        assert!(rep.max_residual < 1e-12);
    }

    #[test]
    fn exterior_true_resolvent() {
        let u = OperatorExpr::shift();
        let r = true_resolvent_map(&u);
        let lambda = c(2.5);
        let rep = residual_left_inverse(&r, &u, lambda, &standard_probes()).unwrap();
        assert!(rep.max_residual < 1e-12);
        let rep = crate::resolvent::residual_right_inverse(&r, &u, lambda, &standard_probes()).unwrap();
        assert!(rep.max_residual < 1e-12);
        let s = scalar_resolvent_map(c(2.0));
        let rep = residual_resolvent_identity(&s, c(0.3), C64::new(0.0, 0.5), &standard_probes()).unwrap();
        assert!(rep.max_residual < 1e-12);
    }
}
