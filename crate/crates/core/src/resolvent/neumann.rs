use super::{Domain, ResolventKind, ResolventMap};
use crate::operator::OperatorExpr;
use crate::{Error, Result, C64};

/// `G(lambda) = sum_n lambda^n S0^(n+1) = -S0 (lambda S0 - I)^{-1}`.
///
/// With `T S0 T = T` this is a generalized inverse of `T - lambda`, so the
/// map built by [`neumann_resolvent_map`] carries orientation `-1`. At
/// `lambda = 0` the action is exactly that of `S0`.
pub fn neumann_generalized_resolvent(s0: &OperatorExpr, lambda: C64, tol: f64) -> Result<OperatorExpr> {
    let nb = s0.norm_bound();
    if lambda.norm() * nb >= 1.0 {
        return Err(Error::OutsideDisk {
            lambda,
            radius: 1.0 / nb,
        });
    }
    Ok(s0
        .compose(&OperatorExpr::geometric_inverse_tol(lambda, s0, tol))
        .scaled(C64::new(-1.0, 0.0)))
}

pub fn neumann_resolvent_map(s0: &OperatorExpr, tol: f64) -> ResolventMap {
    let s0 = s0.clone();
    let radius = 1.0 / s0.norm_bound();
    ResolventMap::new(
        "neumann",
        ResolventKind::Generalized,
        Domain::disk(radius),
        move |lambda| neumann_generalized_resolvent(&s0, lambda, tol),
    )
    .with_orientation(-1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{PeriodicSeq, TailBoundedVector};
    use crate::resolvent::{
        residual_generalized_inverse, residual_resolvent_identity, scalar_resolvent_map, standard_probes,
    };

    fn c(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    /// Direct summation of `sum_{n < terms} lambda^n S0^(n+1) x`.
    fn series_oracle(s0: &OperatorExpr, lambda: C64, x: &TailBoundedVector, terms: usize) -> TailBoundedVector {
        let mut acc = TailBoundedVector::zero();
        let mut p = s0.apply(x).unwrap();
        let mut coef = c(1.0);
        for _ in 0..terms {
            acc = acc.axpy(coef, &p);
            p = s0.apply(&p).unwrap();
            coef *= lambda;
        }
        acc
    }

    #[test]
    fn at_zero_is_s0() {
        let s0 = OperatorExpr::shift().adjoint();
        let g = neumann_generalized_resolvent(&s0, c(0.0), 1e-14).unwrap();
        for x in standard_probes() {
            assert_eq!(g.apply(&x).unwrap(), s0.apply(&x).unwrap());
        }
    }

    #[test]
    fn matches_direct_summation() {
        let s0 = OperatorExpr::shift().adjoint();
        let g = neumann_generalized_resolvent(&s0, c(0.5), 1e-14).unwrap();
        let y = g.apply(&TailBoundedVector::basis(2)).unwrap();
        assert!(y.eps_eq(&TailBoundedVector::basis(1), 1e-15));
        for lambda in [c(0.5), C64::new(-0.3, 0.7)] {
            let g = neumann_generalized_resolvent(&s0, lambda, 1e-14).unwrap();
            for x in standard_probes() {
                let want = series_oracle(&s0, lambda, &x, 60);
                assert!(g.apply(&x).unwrap().eps_eq(&want, 1e-13));
            }
        }
    }

    #[test]
    fn diagonal_sign_convention() {
        let s0 = OperatorExpr::diagonal(PeriodicSeq::constant(c(0.5)));
        let lambda = C64::new(0.4, -0.9);
        let g = neumann_generalized_resolvent(&s0, lambda, 1e-15).unwrap();
        let y = g.apply(&TailBoundedVector::basis(1)).unwrap().coeff(1);
        let scalar = 1.0 / (c(2.0) - lambda);
        assert!((y - scalar).norm() < 1e-13);
        // the true resolvent (lambda - 2)^{-1} has the opposite sign
        let r = scalar_resolvent_map(c(2.0))
            .apply(lambda, &TailBoundedVector::basis(1))
            .unwrap();
        assert!((r.coeff(1) + y).norm() < 1e-13);
    }

    #[test]
    fn generalized_resolvent_of_shift() {
        let t = OperatorExpr::shift();
        let map = neumann_resolvent_map(&t.adjoint(), 1e-14);
        let probes = standard_probes();
        for lambda in [c(0.5), c(0.8), C64::new(0.0, -0.8), C64::new(0.4, 0.6)] {
            let r = residual_generalized_inverse(&map, &t, lambda, &probes).unwrap();
            assert!(r.max_residual < 1e-9, "{lambda}: {r:?}");
        }
        let r = residual_resolvent_identity(&map, c(0.5), C64::new(0.0, 0.8), &probes).unwrap();
        assert!(r.max_residual < 1e-9);
    }

    #[test]
    fn outside_disk() {
        let s0 = OperatorExpr::shift().adjoint();
        assert!(matches!(
            neumann_generalized_resolvent(&s0, c(1.0), 1e-14),
            Err(Error::OutsideDisk { .. })
        ));
    }
}
