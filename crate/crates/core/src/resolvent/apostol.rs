use super::{rel_dist, Domain, ResidualReport, ResolventKind, ResolventMap};
use crate::operator::{OperatorExpr, TailBoundedVector};
use crate::{Result, C64};

/// Upper-triangular operator `[[Tr, A, B], [0, T0, C], [0, 0, Tl]]` on
/// `H_r + H_0 + H_l` together with a right resolvent of `Tr`, the resolvent
/// of `T0` and a left resolvent of `Tl`. Missing couplings are zero.
#[derive(Debug, Clone)]
pub struct ApostolData {
    pub tr: OperatorExpr,
    pub t0: OperatorExpr,
    pub tl: OperatorExpr,
    pub a: Option<OperatorExpr>,
    pub b: Option<OperatorExpr>,
    pub c: Option<OperatorExpr>,
    pub rmap: ResolventMap,
    pub r0map: ResolventMap,
    pub lmap: ResolventMap,
}

impl ApostolData {
    pub fn operator(&self) -> OperatorExpr {
        OperatorExpr::block(
            3,
            vec![
                Some(self.tr.clone()),
                self.a.clone(),
                self.b.clone(),
                None,
                Some(self.t0.clone()),
                self.c.clone(),
                None,
                None,
                Some(self.tl.clone()),
            ],
        )
        .expect("3x3 grid")
    }

    /// The assembled generalized resolvent as a map.
    pub fn map(&self) -> ResolventMap {
        let data = self.clone();
        let domain = Domain::Intersection(vec![
            self.rmap.domain().clone(),
            self.r0map.domain().clone(),
            self.lmap.domain().clone(),
        ]);
        ResolventMap::new("apostol", ResolventKind::Generalized, domain, move |lambda| {
            apostol_assemble(&data, lambda)
        })
    }
}

/// `G(lambda)` for the block operator:
///
/// ```text
/// [ R   R A R0   R (A R0 C + B) L ]
/// [ 0   R0       R0 C L           ]
/// [ 0   0        L                ]
/// ```
///
/// so that `(lambda - T) G = diag(I, I, (lambda - Tl) L)` and
/// `G (lambda - T) = diag(R (lambda - Tr), I, I)`.
pub fn apostol_assemble(data: &ApostolData, lambda: C64) -> Result<OperatorExpr> {
    let r = data.rmap.eval(lambda)?;
    let r0 = data.r0map.eval(lambda)?;
    let l = data.lmap.eval(lambda)?;
    let g12 = data.a.as_ref().map(|a| r.compose(a).compose(&r0));
    let g23 = data.c.as_ref().map(|c| r0.compose(c).compose(&l));
    let mut inner = Vec::new();
    if let (Some(a), Some(c)) = (&data.a, &data.c) {
        inner.push(a.compose(&r0).compose(c));
    }
    if let Some(b) = &data.b {
        inner.push(b.clone());
    }
    let g13 = if inner.is_empty() {
        None
    } else {
        Some(r.compose(&OperatorExpr::sum(inner)).compose(&l))
    };
    OperatorExpr::block(3, vec![Some(r), g12, g13, None, Some(r0), g23, None, None, Some(l)])
}

/// Residuals of `P(lambda)P(mu) = P(lambda)` and `Q(lambda)Q(mu) = Q(mu)`
/// together with idempotency of `P(lambda)` and `Q(lambda)`, where
/// `P = (lambda - T) G` and `Q = G (lambda - T)`.
pub fn apostol_projection_check(
    data: &ApostolData,
    lambda: C64,
    mu: C64,
    probes: &[TailBoundedVector],
) -> Result<ResidualReport> {
    let t = data.operator();
    let gl = apostol_assemble(data, lambda)?;
    let gm = apostol_assemble(data, mu)?;
    let p = |z: C64, g: &OperatorExpr| t.lambda_minus(z).compose(g);
    let q = |z: C64, g: &OperatorExpr| g.compose(&t.lambda_minus(z));
    let (pl, pm) = (p(lambda, &gl), p(mu, &gm));
    let (ql, qm) = (q(lambda, &gl), q(mu, &gm));
    let mut worst = [0.0f64; 4];
    for x in probes {
        let plx = pl.apply(x)?;
        let pmx = pm.apply(x)?;
        let qlx = ql.apply(x)?;
        let qmx = qm.apply(x)?;
        worst[0] = worst[0].max(rel_dist(&pl.apply(&pmx)?, &plx, x));
        worst[1] = worst[1].max(rel_dist(&ql.apply(&qmx)?, &qmx, x));
        worst[2] = worst[2].max(rel_dist(&pl.apply(&plx)?, &plx, x));
        worst[3] = worst[3].max(rel_dist(&ql.apply(&qlx)?, &qlx, x));
    }
    Ok(ResidualReport::from_parts(
        probes.len(),
        vec![
            ("range-projection".into(), worst[0]),
            ("kernel-projection".into(), worst[1]),
            ("range-idempotent".into(), worst[2]),
            ("kernel-idempotent".into(), worst[3]),
        ],
    ))
}
