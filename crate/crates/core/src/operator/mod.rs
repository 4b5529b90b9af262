//! Lazy expressions for structured bounded operators on l2 and their action
//! on tail-bounded vectors.
//!
//! Operators on finite direct sums `H_1 + ... + H_m` act on a single
//! sequence space by interleaving: coordinate `l` of component `c` (0-based
//! component, 1-based coordinate) sits at global index `(l - 1) * m + c + 1`.

mod seq;
mod vector;

use std::sync::Arc;

pub use seq::PeriodicSeq;
pub use vector::{InnerFunctional, TailBoundedVector};

use crate::dense::DenseMatrix;
use crate::{Error, Result, C64};

pub const DEFAULT_SERIES_TOL: f64 = 1e-14;
const MAX_SERIES_TERMS: usize = 200_000;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone)]
pub enum Node {
    Identity,
    /// `e_n -> w_n e_{n+1}`.
    ForwardShift(PeriodicSeq),
    /// `(x_1, x_2, ...) -> (w_1 x_2, w_2 x_3, ...)`.
    BackwardShift(PeriodicSeq),
    Diagonal(PeriodicSeq),
    /// `x -> <x, v> u`.
    RankOne {
        u: TailBoundedVector,
        v: TailBoundedVector,
    },
    ScalarMul(C64, OperatorExpr),
    Sum(Vec<OperatorExpr>),
    /// `left . right`.
    Compose(OperatorExpr, OperatorExpr),
    Adjoint(OperatorExpr),
    /// `(lambda U - I)^{-1} = -sum_k lambda^k U^k`, valid when `|lambda| * ||U|| < 1`.
    GeometricInverse {
        lambda: C64,
        base: OperatorExpr,
        /// Relative truncation tolerance of the series.
        tol: f64,
    },
    DirectSum(Vec<OperatorExpr>),
    /// `size x size` grid, row-major; `None` is the zero operator.
    Block {
        size: usize,
        entries: Vec<Option<OperatorExpr>>,
    },
    /// A matrix acting on the leading `cols` coordinates and landing in the
    /// leading `rows` coordinates; everything else is sent to zero.
    Finite(Arc<DenseMatrix>),
}

/// Immutable, cheaply clonable operator expression.
#[derive(Debug, Clone)]
pub struct OperatorExpr(Arc<Node>);

impl From<Node> for OperatorExpr {
    fn from(node: Node) -> Self {
        Self(Arc::new(node))
    }
}

/// Column window of an operator: the images of `e_1..e_n`, keeping every
/// row any of them reaches.
#[derive(Debug, Clone)]
pub struct ColumnWindow {
    pub matrix: DenseMatrix,
    /// Largest tail bound among the computed columns.
    pub max_tail: f64,
}

impl OperatorExpr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn identity() -> Self {
        Node::Identity.into()
    }

    pub fn zero() -> Self {
        Node::Sum(Vec::new()).into()
    }

    /// Unweighted forward shift.
    pub fn shift() -> Self {
        Self::forward_shift(PeriodicSeq::constant(ONE))
    }

    /// Unweighted backward shift.
    pub fn backward() -> Self {
        Self::backward_shift(PeriodicSeq::constant(ONE))
    }

    pub fn forward_shift(weights: PeriodicSeq) -> Self {
        Node::ForwardShift(weights).into()
    }

    pub fn backward_shift(weights: PeriodicSeq) -> Self {
        Node::BackwardShift(weights).into()
    }

    pub fn weighted_shift(period: &[f64]) -> Result<Self> {
        Ok(Self::forward_shift(PeriodicSeq::periodic_real(period)?))
    }

    pub fn weighted_backward_shift(period: &[f64]) -> Result<Self> {
        Ok(Self::backward_shift(PeriodicSeq::periodic_real(period)?))
    }

    pub fn diagonal(values: PeriodicSeq) -> Self {
        Node::Diagonal(values).into()
    }

    /// `alpha I`.
    pub fn scalar(alpha: C64) -> Self {
        Self::identity().scaled(alpha)
    }

    pub fn rank_one(u: TailBoundedVector, v: TailBoundedVector) -> Self {
        Node::RankOne { u, v }.into()
    }

    pub fn finite(m: DenseMatrix) -> Self {
        Node::Finite(Arc::new(m)).into()
    }

    pub fn scaled(&self, alpha: C64) -> Self {
        Node::ScalarMul(alpha, self.clone()).into()
    }

    pub fn sum(terms: Vec<OperatorExpr>) -> Self {
        Node::Sum(terms).into()
    }

    pub fn plus(&self, other: &OperatorExpr) -> Self {
        Self::sum(vec![self.clone(), other.clone()])
    }

    pub fn minus(&self, other: &OperatorExpr) -> Self {
        Self::sum(vec![self.clone(), other.scaled(-ONE)])
    }

    /// `self . right`.
    pub fn compose(&self, right: &OperatorExpr) -> Self {
        Node::Compose(self.clone(), right.clone()).into()
    }

    pub fn adjoint(&self) -> Self {
        Node::Adjoint(self.clone()).into()
    }

    /// `(lambda U - I)^{-1}`. The contraction condition is checked on application.
    pub fn geometric_inverse(lambda: C64, base: &OperatorExpr) -> Self {
        Self::geometric_inverse_tol(lambda, base, DEFAULT_SERIES_TOL)
    }

    pub fn geometric_inverse_tol(lambda: C64, base: &OperatorExpr, tol: f64) -> Self {
        Node::GeometricInverse {
            lambda,
            base: base.clone(),
            tol,
        }
        .into()
    }

    pub fn direct_sum(parts: Vec<OperatorExpr>) -> Self {
        Node::DirectSum(parts).into()
    }

    pub fn block(size: usize, entries: Vec<Option<OperatorExpr>>) -> Result<Self> {
        if size == 0 || entries.len() != size * size {
            return Err(Error::Dimension(format!(
                "block of size {size} needs {} entries, got {}",
                size * size,
                entries.len()
            )));
        }
        Ok(Node::Block { size, entries }.into())
    }

    /// `lambda I - self`.
    pub fn lambda_minus(&self, lambda: C64) -> Self {
        Self::scalar(lambda).minus(self)
    }

    /// `self^k` as a composition chain; `k = 0` gives the identity.
    pub fn pow(&self, k: usize) -> Self {
        let mut out = if k == 0 { Self::identity() } else { self.clone() };
        for _ in 1..k {
            out = self.compose(&out);
        }
        out
    }

    /// Certified upper bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        match self.node() {
            Node::Identity => 1.0,
            Node::ForwardShift(w) | Node::BackwardShift(w) | Node::Diagonal(w) => w.sup_abs(),
            Node::RankOne { u, v } => u.norm_upper() * v.norm_upper(),
            Node::ScalarMul(a, c) => a.norm() * c.norm_bound(),
            Node::Sum(t) => t.iter().map(|c| c.norm_bound()).sum(),
            Node::Compose(l, r) => l.norm_bound() * r.norm_bound(),
            Node::Adjoint(c) => c.norm_bound(),
            Node::GeometricInverse { lambda, base, .. } => {
                let ratio = lambda.norm() * base.norm_bound();
                if ratio < 1.0 {
                    1.0 / (1.0 - ratio)
                } else {
                    f64::INFINITY
                }
            }
            Node::DirectSum(p) => p.iter().map(|c| c.norm_bound()).fold(0.0, f64::max),
            Node::Block { entries, .. } => entries
                .iter()
                .flatten()
                .map(|c| c.norm_bound().powi(2))
                .sum::<f64>()
                .sqrt(),
            Node::Finite(m) => m.frobenius_norm(),
        }
    }

    /// Least common multiple of the periods of all weight sequences.
    pub fn period(&self) -> usize {
        fn gcd(a: usize, b: usize) -> usize {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        let lcm = |a: usize, b: usize| a / gcd(a, b) * b;
        match self.node() {
            Node::ForwardShift(w) | Node::BackwardShift(w) | Node::Diagonal(w) => w.period_len(),
            Node::ScalarMul(_, c) | Node::Adjoint(c) => c.period(),
            Node::GeometricInverse { base, .. } => base.period(),
            Node::Compose(l, r) => lcm(l.period(), r.period()),
            Node::Sum(t) | Node::DirectSum(t) => t.iter().fold(1, |acc, c| lcm(acc, c.period())),
            Node::Block { entries, .. } => entries.iter().flatten().fold(1, |acc, c| lcm(acc, c.period())),
            Node::Identity | Node::RankOne { .. } | Node::Finite(_) => 1,
        }
    }

    pub fn apply(&self, x: &TailBoundedVector) -> Result<TailBoundedVector> {
        apply_node(self, x, false, f64::INFINITY)
    }

    /// Apply with a relative tolerance for geometric series; each series uses
    /// the tighter of this and its own tolerance.
    pub fn apply_tol(&self, x: &TailBoundedVector, tol: f64) -> Result<TailBoundedVector> {
        apply_node(self, x, false, tol)
    }

    /// `<op e_j, e_i>`, 1-based.
    pub fn entry(&self, i: usize, j: usize) -> Result<C64> {
        if i == 0 || j == 0 {
            return Err(Error::InvalidInput("matrix entries are indexed from 1".into()));
        }
        Ok(self.apply(&TailBoundedVector::basis(j))?.coeff(i))
    }

    /// The `n x n` principal compression, column by column through `apply`.
    pub fn truncate(&self, n: usize) -> Result<DenseMatrix> {
        Ok(self.truncate_with_leakage(n)?.0)
    }

    /// Principal compression together with the largest norm, over the
    /// columns, of what falls outside the window (including tails).
    pub fn truncate_with_leakage(&self, n: usize) -> Result<(DenseMatrix, f64)> {
        let mut m = DenseMatrix::zeros(n, n);
        let mut leak = 0.0f64;
        for j in 0..n {
            let col = self.apply(&TailBoundedVector::basis(j + 1))?;
            m.set_column(j, &col.to_dense(n));
            let outside = col.coeffs().iter().skip(n).map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            leak = leak.max(outside + col.tail_bound());
        }
        Ok((m, leak))
    }

    /// Images of `e_1..e_cols` with all reached rows.
    pub fn column_window(&self, cols: usize) -> Result<ColumnWindow> {
        let columns: Vec<TailBoundedVector> = (1..=cols)
            .map(|j| self.apply(&TailBoundedVector::basis(j)))
            .collect::<Result<_>>()?;
        let rows = columns.iter().map(|c| c.support_len()).max().unwrap_or(0).max(1);
        let mut m = DenseMatrix::zeros(rows, cols);
        let mut max_tail = 0.0f64;
        for (j, c) in columns.iter().enumerate() {
            m.set_column(j, &c.to_dense(rows));
            max_tail = max_tail.max(c.tail_bound());
        }
        Ok(ColumnWindow { matrix: m, max_tail })
    }
}

/// Pack components of a direct sum into one interleaved vector.
pub fn interleave(parts: &[TailBoundedVector]) -> TailBoundedVector {
    let m = parts.len();
    if m == 0 {
        return TailBoundedVector::zero();
    }
    let len = parts.iter().map(|p| p.support_len()).max().unwrap_or(0);
    let mut c = vec![ZERO; len * m];
    for (ci, p) in parts.iter().enumerate() {
        for (l, &z) in p.coeffs().iter().enumerate() {
            c[l * m + ci] = z;
        }
    }
    let tail = parts.iter().map(|p| p.tail_bound().powi(2)).sum::<f64>().sqrt();
    TailBoundedVector::new(c, tail)
}

/// Split an interleaved vector into its `m` components. Each component
/// inherits the full tail bound.
pub fn deinterleave(x: &TailBoundedVector, m: usize) -> Vec<TailBoundedVector> {
    assert!(m >= 1);
    let mut parts = vec![Vec::new(); m];
    for (g, &z) in x.coeffs().iter().enumerate() {
        parts[g % m].push(z);
    }
    parts
        .into_iter()
        .map(|c| TailBoundedVector::new(c, x.tail_bound()))
        .collect()
}

/// Global 1-based index of coordinate `l` (1-based) of component `c` (0-based).
pub fn interleaved_index(m: usize, c: usize, l: usize) -> usize {
    (l - 1) * m + c + 1
}

fn shift_forward(w: &PeriodicSeq, x: &TailBoundedVector) -> TailBoundedVector {
    let mut c = Vec::with_capacity(x.support_len() + 1);
    c.push(ZERO);
    for (i, &z) in x.coeffs().iter().enumerate() {
        c.push(w.get(i + 1) * z);
    }
    TailBoundedVector::new(c, w.sup_abs() * x.tail_bound())
}

fn shift_backward(w: &PeriodicSeq, x: &TailBoundedVector) -> TailBoundedVector {
    let c: Vec<C64> = x
        .coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &z)| w.get(i) * z)
        .collect();
    TailBoundedVector::new(c, w.sup_abs() * x.tail_bound())
}

fn diagonal(d: &PeriodicSeq, x: &TailBoundedVector) -> TailBoundedVector {
    let c: Vec<C64> = x.coeffs().iter().enumerate().map(|(i, &z)| d.get(i + 1) * z).collect();
    TailBoundedVector::new(c, d.sup_abs() * x.tail_bound())
}

fn rank_one(u: &TailBoundedVector, v: &TailBoundedVector, x: &TailBoundedVector) -> TailBoundedVector {
    let alpha = x.inner(v);
    let err = x.inner_error(v);
    let out = u.scale(alpha);
    let tail = out.tail_bound() + err * u.norm_upper();
    out.with_tail(tail)
}

fn finite(m: &DenseMatrix, x: &TailBoundedVector, adjoint: bool) -> Result<TailBoundedVector> {
    let (inp, _) = if adjoint {
        (m.rows(), m.cols())
    } else {
        (m.cols(), m.rows())
    };
    let xv = x.to_dense(inp);
    let y = if adjoint {
        m.adjoint_matvec(&xv)?
    } else {
        m.matvec(&xv)?
    };
    Ok(TailBoundedVector::new(y, m.frobenius_norm() * x.tail_bound()))
}

fn geometric(
    lambda: C64,
    base: &OperatorExpr,
    x: &TailBoundedVector,
    adjoint: bool,
    tol: f64,
) -> Result<TailBoundedVector> {
    let ratio = lambda.norm() * base.norm_bound();
    if !(ratio < 1.0) {
        return Err(Error::ContractiveViolation { ratio });
    }
    let scale = x.norm_upper();
    if scale == 0.0 {
        return Ok(TailBoundedVector::zero());
    }
    let lam = if adjoint { lambda.conj() } else { lambda };
    let mut acc = TailBoundedVector::zero();
    let mut v = x.clone();
    for _ in 0..MAX_SERIES_TERMS {
        if v.is_exact_zero() {
            return Ok(acc);
        }
        let size = v.norm_upper();
        if size <= tol * (1.0 - ratio) * scale {
            let t = acc.tail_bound() + size / (1.0 - ratio);
            return Ok(acc.with_tail(t));
        }
        acc = acc.axpy(-ONE, &v);
        v = apply_node(base, &v, adjoint, tol)?.scale(lam);
    }
    let size = v.norm_upper();
    let t = acc.tail_bound() + size / (1.0 - ratio);
    Ok(acc.with_tail(t))
}

fn apply_node(op: &OperatorExpr, x: &TailBoundedVector, adj: bool, tol: f64) -> Result<TailBoundedVector> {
    Ok(match op.node() {
        Node::Identity => x.clone(),
        Node::ForwardShift(w) => {
            if adj {
                shift_backward(&w.conj(), x)
            } else {
                shift_forward(w, x)
            }
        }
        Node::BackwardShift(w) => {
            if adj {
                shift_forward(&w.conj(), x)
            } else {
                shift_backward(w, x)
            }
        }
        Node::Diagonal(d) => {
            if adj {
                diagonal(&d.conj(), x)
            } else {
                diagonal(d, x)
            }
        }
        Node::RankOne { u, v } => {
            if adj {
                rank_one(v, u, x)
            } else {
                rank_one(u, v, x)
            }
        }
        Node::ScalarMul(a, c) => {
            let a = if adj { a.conj() } else { *a };
            apply_node(c, x, adj, tol)?.scale(a)
        }
        Node::Sum(terms) => {
            let mut acc = TailBoundedVector::zero();
            for t in terms {
                acc = acc.add(&apply_node(t, x, adj, tol)?);
            }
            acc
        }
        Node::Compose(l, r) => {
            if adj {
                let y = apply_node(l, x, true, tol)?;
                apply_node(r, &y, true, tol)?
            } else {
                let y = apply_node(r, x, false, tol)?;
                apply_node(l, &y, false, tol)?
            }
        }
        Node::Adjoint(c) => apply_node(c, x, !adj, tol)?,
        Node::GeometricInverse { lambda, base, tol: own } => geometric(*lambda, base, x, adj, own.min(tol))?,
        Node::DirectSum(parts) => {
            let m = parts.len();
            if m == 0 {
                return Ok(TailBoundedVector::zero());
            }
            let xs = deinterleave(x, m);
            let ys: Vec<TailBoundedVector> = parts
                .iter()
                .zip(&xs)
                .map(|(p, xi)| apply_node(p, xi, adj, tol))
                .collect::<Result<_>>()?;
            interleave(&ys)
        }
        Node::Block { size, entries } => {
            let m = *size;
            let xs = deinterleave(x, m);
            let mut ys = Vec::with_capacity(m);
            for i in 0..m {
                let mut acc = TailBoundedVector::zero();
                for (j, xj) in xs.iter().enumerate() {
                    // adjoint of a block swaps (i, j)
                    let e = if adj { &entries[j * m + i] } else { &entries[i * m + j] };
                    if let Some(e) = e {
                        acc = acc.add(&apply_node(e, xj, adj, tol)?);
                    }
                }
                ys.push(acc);
            }
            interleave(&ys)
        }
        Node::Finite(m) => finite(m, x, adj)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn identity_and_backward_on_e1() {
        let e3 = TailBoundedVector::basis(3);
        let y = OperatorExpr::identity().apply(&e3).unwrap();
        assert_eq!(y, e3);
        let y = OperatorExpr::backward().apply(&TailBoundedVector::basis(1)).unwrap();
        assert!(y.is_exact_zero());
    }

    #[test]
    fn geometric_inverse_times_shift_on_e1() {
        let u = OperatorExpr::shift();
        let op = OperatorExpr::geometric_inverse(c(0.5), &u).compose(&u);
        let y = op.apply(&TailBoundedVector::basis(1)).unwrap();
        // oracle: -(e_2 + 0.5 e_3 + 0.25 e_4 + ...)
        let mut expect = vec![c(0.0)];
        let mut p = 1.0;
        while p > 1e-18 {
            expect.push(c(-p));
            p *= 0.5;
        }
        let oracle = TailBoundedVector::exact(expect);
        assert!(y.tail_bound() <= 1e-13);
        assert!(y.eps_eq(&oracle, 1e-13 + 1e-16));
    }

    #[test]
    fn geometric_inverse_outside_disk_is_rejected() {
        let u = OperatorExpr::shift();
        let g = OperatorExpr::geometric_inverse(c(1.0), &u);
        assert!(matches!(
            g.apply(&TailBoundedVector::basis(1)),
            Err(Error::ContractiveViolation { .. })
        ));
    }

    #[test]
    fn geometric_inverse_inverts_lambda_u_minus_i() {
        let u = OperatorExpr::weighted_shift(&[1.0, 0.5]).unwrap();
        for lam in [c(0.9), C64::new(0.0, -0.7), C64::new(0.3, 0.4)] {
            let g = OperatorExpr::geometric_inverse(lam, &u);
            let x = TailBoundedVector::exact(vec![c(1.0), C64::new(0.0, 2.0), c(-0.5)]);
            let gx = g.apply(&x).unwrap();
            let a = u.scaled(lam).minus(&OperatorExpr::identity());
            let y = a.apply(&gx).unwrap();
            let eps = y.tail_bound() + 1e-12 * x.norm();
            assert!(y.eps_eq(&x, eps), "lambda {lam}");
            let y = u.lambda_minus(C64::new(1.0, 0.0) / lam).scaled(lam).apply(&gx).unwrap();
            assert!(
                y.eps_eq(&x.scale(-ONE), y.tail_bound() + 1e-12 * x.norm()),
                "lambda {lam}"
            );
        }
    }

    #[test]
    fn entries() {
        assert_eq!(OperatorExpr::shift().entry(2, 1).unwrap(), c(1.0));
        let d = OperatorExpr::diagonal(PeriodicSeq::periodic_real(&[1.0, 4.0]).unwrap());
        assert_eq!(d.entry(4, 4).unwrap(), c(4.0));
        let r = OperatorExpr::rank_one(TailBoundedVector::basis(1), TailBoundedVector::basis(1));
        assert_eq!(r.entry(1, 1).unwrap(), c(1.0));
        for (i, j) in [(1, 2), (2, 1), (2, 2), (3, 1)] {
            assert_eq!(r.entry(i, j).unwrap(), c(0.0));
        }
    }

    #[test]
    fn truncations() {
        assert_eq!(OperatorExpr::identity().truncate(3).unwrap(), DenseMatrix::identity(3));
        let s = OperatorExpr::shift().truncate(3).unwrap();
        let expect = DenseMatrix::from_real_rows(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(s, expect);
        let op = OperatorExpr::shift().scaled(c(2.0));
        let m = op.truncate(4).unwrap();
        for i in 1..=4 {
            for j in 1..=4 {
                assert_eq!(m[(i - 1, j - 1)], op.entry(i, j).unwrap());
            }
        }
    }

    #[test]
    fn compose_is_compression_of_product() {
        // P_n S U P_n = I_n, while the product of compressions loses a corner
        let op = OperatorExpr::backward().compose(&OperatorExpr::shift());
        assert_eq!(op.truncate(5).unwrap(), DenseMatrix::identity(5));
        let (_, leak) = OperatorExpr::shift().truncate_with_leakage(5).unwrap();
        assert_eq!(leak, 1.0);
    }

    #[test]
    fn adjoint_pushdown() {
        let u = OperatorExpr::weighted_shift(&[1.0, 4.0]).unwrap();
        let ops = vec![
            u.clone(),
            OperatorExpr::geometric_inverse(C64::new(0.1, 0.2), &u),
            u.compose(&OperatorExpr::diagonal(
                PeriodicSeq::new(vec![], vec![C64::new(1.0, 1.0), c(2.0)]).unwrap(),
            )),
            OperatorExpr::rank_one(
                TailBoundedVector::exact(vec![c(1.0), C64::new(0.0, 1.0)]),
                TailBoundedVector::basis(3),
            ),
        ];
        for op in ops {
            let a = op.adjoint();
            for i in 1..=6 {
                for j in 1..=6 {
                    let lhs = a.entry(i, j).unwrap();
                    let rhs = op.entry(j, i).unwrap().conj();
                    assert!((lhs - rhs).norm() < 1e-13);
                }
            }
            let aa = a.adjoint();
            for i in 1..=6 {
                for j in 1..=6 {
                    assert_eq!(aa.entry(i, j).unwrap(), op.entry(i, j).unwrap());
                }
            }
        }
    }

    #[test]
    fn interleave_round_trip() {
        let a = TailBoundedVector::exact(vec![c(1.0), c(2.0), c(3.0)]);
        let b = TailBoundedVector::exact(vec![c(-1.0)]);
        let x = interleave(&[a.clone(), b.clone()]);
        assert_eq!(x.coeffs(), &[c(1.0), c(-1.0), c(2.0), c(0.0), c(3.0)]);
        let parts = deinterleave(&x, 2);
        assert_eq!(parts[0], a);
        assert_eq!(parts[1], b);
        assert_eq!(interleaved_index(2, 1, 1), 2);
    }

    #[test]
    fn block_acts_componentwise() {
        let s = OperatorExpr::shift();
        let blk = OperatorExpr::block(
            2,
            vec![Some(s.clone()), Some(OperatorExpr::identity()), None, Some(s.adjoint())],
        )
        .unwrap();
        let x = interleave(&[TailBoundedVector::basis(1), TailBoundedVector::basis(2)]);
        let y = deinterleave(&blk.apply(&x).unwrap(), 2);
        // top: S e1 + e2 = 2 e2 ; bottom: S* e2 = e1
        assert_eq!(y[0], TailBoundedVector::basis(2).scale(c(2.0)));
        assert_eq!(y[1], TailBoundedVector::basis(1));
        let adj = blk.adjoint();
        for i in 1..=6 {
            for j in 1..=6 {
                assert_eq!(adj.entry(i, j).unwrap(), blk.entry(j, i).unwrap().conj());
            }
        }
    }

    #[test]
    fn finite_block_acts_on_leading_coordinates() {
        let m = DenseMatrix::from_real_rows(&[&[0.0, 2.0]]).unwrap();
        let f = OperatorExpr::finite(m);
        let y = f.apply(&TailBoundedVector::from_real(&[5.0, 1.0, 7.0])).unwrap();
        assert_eq!(y.coeffs(), &[c(2.0)]);
        let y = f.adjoint().apply(&TailBoundedVector::from_real(&[1.0, 9.0])).unwrap();
        assert_eq!(y.coeffs(), &[c(0.0), c(2.0)]);
    }

    #[test]
    fn period_is_lcm() {
        let a = OperatorExpr::weighted_shift(&[1.0, 4.0]).unwrap();
        let b = OperatorExpr::diagonal(PeriodicSeq::periodic_real(&[1.0, 2.0, 3.0]).unwrap());
        assert_eq!(a.compose(&b).period(), 6);
        assert_eq!(OperatorExpr::shift().period(), 1);
    }

    #[test]
    fn column_window_keeps_reached_rows() {
        let w = OperatorExpr::shift().pow(3).column_window(4).unwrap();
        assert_eq!((w.matrix.rows(), w.matrix.cols()), (7, 4));
        assert_eq!(w.matrix[(3, 0)], c(1.0));
    }
}
