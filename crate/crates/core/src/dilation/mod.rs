//! Shift gadget, the extension `T~(lambda)` of an operator with a left
//! resolvent, and the checks around it.

mod ransford;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{gamma_from_singular_values, sigma_max, singular_values, DenseMatrix, Lu};
use crate::operator::{deinterleave, interleave, InnerFunctional, OperatorExpr, TailBoundedVector};
use crate::resolvent::{rel_dist, Domain, ResidualReport, ResolventMap};
use crate::{Error, Result, C64};

pub use ransford::{
    ransford_probe, ransford_sigma_min, ransford_window, subharmonicity_check, RansfordPoint, RansfordReport,
    SubharmonicityReport,
};

pub const DEFAULT_KERNEL_RANK_TOL: f64 = 1e-9;
const NULL_SEED: u64 = 7;

type OpMap = dyn Fn(C64) -> Result<OperatorExpr> + Send + Sync;
type VecMap = dyn Fn(C64) -> Result<TailBoundedVector> + Send + Sync;

/// `(S, U(lambda), r, K(lambda))` on `H'` with `(lambda - S) U = I`,
/// `U (lambda - S) = I - r(.) K` and `r(K) = 1`.
#[derive(Clone)]
pub struct Gadget {
    s: OperatorExpr,
    r: InnerFunctional,
    domain: Domain,
    umap: Arc<OpMap>,
    kmap: Arc<VecMap>,
}

impl std::fmt::Debug for Gadget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gadget")
            .field("s", &self.s)
            .field("r", &self.r)
            .field("domain", &self.domain)
            .finish()
    }
}

impl Gadget {
    pub fn new(
        s: OperatorExpr,
        r: InnerFunctional,
        domain: Domain,
        umap: impl Fn(C64) -> Result<OperatorExpr> + Send + Sync + 'static,
        kmap: impl Fn(C64) -> Result<TailBoundedVector> + Send + Sync + 'static,
    ) -> Self {
        Self {
            s,
            r,
            domain,
            umap: Arc::new(umap),
            kmap: Arc::new(kmap),
        }
    }

    pub fn s(&self) -> &OperatorExpr {
        &self.s
    }

    pub fn r(&self) -> &InnerFunctional {
        &self.r
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    fn check(&self, lambda: C64) -> Result<()> {
        if self.domain.contains(lambda) {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                lambda,
                domain: self.domain.to_string(),
            })
        }
    }

    pub fn u(&self, lambda: C64) -> Result<OperatorExpr> {
        self.check(lambda)?;
        (self.umap)(lambda)
    }

    pub fn k(&self, lambda: C64) -> Result<TailBoundedVector> {
        self.check(lambda)?;
        (self.kmap)(lambda)
    }
}

/// The backward shift `S` with `U(lambda) = (lambda U - I)^{-1} U`,
/// `K(lambda) = -(lambda U - I)^{-1} e_1 = (1, lambda, lambda^2, ...)` and
/// `r = <., e_1>`, `U` the forward shift.
pub fn example_gadget(lambda: C64, tol: f64) -> Result<Gadget> {
    if lambda.norm() >= 1.0 {
        return Err(Error::OutsideDisk { lambda, radius: 1.0 });
    }
    let u = OperatorExpr::shift();
    let u2 = u.clone();
    Ok(Gadget::new(
        OperatorExpr::backward(),
        InnerFunctional::first_coordinate(),
        Domain::disk(1.0),
        move |z| Ok(OperatorExpr::geometric_inverse_tol(z, &u, tol).compose(&u)),
        move |z| {
            OperatorExpr::geometric_inverse_tol(z, &u2, tol)
                .scaled(C64::new(-1.0, 0.0))
                .apply(&TailBoundedVector::basis(1))
        },
    ))
}

/// Conditions 1-3 and the two derived properties, maximized over probes:
/// `cond1` `(lambda - S) U x = x`, `cond2` `U (lambda - S) x = x - r(x) K`,
/// `cond3` `r(K) = 1`, `range-r` `r(U x) = 0`, `kernel-k` `(lambda - S) K = 0`.
pub fn verify_gadget(g: &Gadget, lambda: C64, probes: &[TailBoundedVector]) -> Result<ResidualReport> {
    let u = g.u(lambda)?;
    let k = g.k(lambda)?;
    let a = g.s.lambda_minus(lambda);
    let mut w = [0.0f64; 5];
    for x in probes {
        let ux = u.apply(x)?;
        w[0] = w[0].max(rel_dist(&a.apply(&ux)?, x, x));
        let rhs = x
            .axpy(-g.r.eval(x), &k)
            .with_tail(x.tail_bound() + g.r.eval_error(x) * k.norm_upper());
        w[1] = w[1].max(rel_dist(&u.apply(&a.apply(x)?)?, &rhs, x));
        w[3] = w[3].max((g.r.eval(&ux).norm() + g.r.eval_error(&ux)) / x.norm());
    }
    w[2] = (g.r.eval(&k) - 1.0).norm() + g.r.eval_error(&k);
    w[4] = a.apply(&k)?.norm_upper();
    Ok(ResidualReport::from_parts(
        probes.len(),
        vec![
            ("cond1".into(), w[0]),
            ("cond2".into(), w[1]),
            ("cond3".into(), w[2]),
            ("range-r".into(), w[3]),
            ("kernel-k".into(), w[4]),
        ],
    ))
}

/// Orthonormal basis of `N(L(lambda))` and the coefficient functionals
/// `c_j(h) = <h - (lambda - T) L(lambda) h, e_j>`.
#[derive(Debug, Clone)]
pub struct KernelData {
    pub lambda: C64,
    pub m: usize,
    pub basis: Vec<TailBoundedVector>,
    /// `max_j ||L(lambda) e_j||`.
    pub kernel_residual: f64,
    pub gap_ratio: f64,
    l: OperatorExpr,
    a: OperatorExpr,
}

impl KernelData {
    pub fn l(&self) -> &OperatorExpr {
        &self.l
    }

    /// `h - (lambda - T) L(lambda) h`.
    pub fn defect(&self, h: &TailBoundedVector) -> Result<TailBoundedVector> {
        Ok(h.sub(&self.a.apply(&self.l.apply(h)?)?))
    }

    pub fn coefficients(&self, h: &TailBoundedVector) -> Result<Vec<C64>> {
        let d = self.defect(h)?;
        Ok(self.basis.iter().map(|e| d.inner(e)).collect())
    }

    /// Largest deviation of the Gram matrix of the basis from the identity.
    pub fn gram_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.inner(b) - want).norm());
            }
        }
        worst
    }
}

/// Kernel of `L(lambda)` from its first `w` columns.
pub fn kernel_data(l: &ResolventMap, t: &OperatorExpr, lambda: C64, w: usize) -> Result<KernelData> {
    if l.orientation() < 0.0 {
        return Err(Error::InvalidInput(
            "kernel data needs a map inverting lambda - T".into(),
        ));
    }
    let lop = l.eval(lambda)?;
    let win = lop.column_window(w)?.matrix;
    let (vectors, gap_ratio) = null_space(&win, DEFAULT_KERNEL_RANK_TOL)?;
    let basis: Vec<TailBoundedVector> = vectors.into_iter().map(TailBoundedVector::exact).collect();
    let mut kernel_residual = 0.0f64;
    for e in &basis {
        kernel_residual = kernel_residual.max(lop.apply(e)?.norm_upper());
    }
    Ok(KernelData {
        lambda,
        m: basis.len(),
        basis,
        kernel_residual,
        gap_ratio,
        l: lop,
        a: l.target(t, lambda),
    })
}

/// Orthonormal null space of `a`, by inverse iteration on the shifted Gram
/// matrix. Each vector's first sizeable coordinate is made real positive.
fn null_space(a: &DenseMatrix, rank_tol: f64) -> Result<(Vec<Vec<C64>>, f64)> {
    let n = a.cols();
    let sv = singular_values(a);
    let g = gamma_from_singular_values(&sv, rank_tol);
    let null_dim = n - g.rank;
    if null_dim > 0 && g.rank > 0 && g.ambiguous_rank_gap {
        return Err(Error::KernelDimensionUnstable {
            rank: g.rank,
            gap: g.gap_ratio,
        });
    }
    if null_dim == 0 {
        return Ok((Vec::new(), g.gap_ratio));
    }
    let mut gram = a.gram();
    let shift = f64::EPSILON * g.sigma_max.max(f64::MIN_POSITIVE).powi(2) * n as f64;
    for i in 0..n {
        gram[(i, i)] += shift;
    }
    let lu = Lu::factor(&gram)?;
    let mut rng = ChaCha8Rng::seed_from_u64(NULL_SEED);
    let mut x: Vec<Vec<C64>> = (0..null_dim)
        .map(|_| {
            (0..n)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    for _ in 0..3 {
        for v in x.iter_mut() {
            *v = lu.solve(v)?;
        }
        orthonormalize(&mut x);
    }
    for v in x.iter_mut() {
        let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if let Some(p) = v.iter().find(|z| z.norm() > 1e-8 * big) {
            let phase = p.conj() / p.norm();
            v.iter_mut().for_each(|z| *z *= phase);
        }
    }
    Ok((x, g.gap_ratio))
}

/// Modified Gram-Schmidt, each vector orthogonalized twice.
fn orthonormalize(vs: &mut [Vec<C64>]) {
    for i in 0..vs.len() {
        for _ in 0..2 {
            for j in 0..i {
                let (done, rest) = vs.split_at_mut(i);
                let p: C64 = rest[0].iter().zip(&done[j]).map(|(a, b)| a * b.conj()).sum();
                rest[0].iter_mut().zip(&done[j]).for_each(|(a, b)| *a -= p * b);
            }
        }
        let nrm = vs[i].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        vs[i].iter_mut().for_each(|z| *z /= nrm);
    }
}

/// Kernel dimension of `L(lambda)` at each grid point.
pub fn kernel_dimensions(l: &ResolventMap, t: &OperatorExpr, grid: &[C64], w: usize) -> Result<Vec<usize>> {
    grid.iter().map(|&z| Ok(kernel_data(l, t, z, w)?.m)).collect()
}

/// `T~` and `R~ = (lambda - T~)^{-1}` on `H + H'^m`, interleaved as `m + 1` components.
#[derive(Debug, Clone)]
pub struct ExtensionModel {
    pub m: usize,
    pub lambda: C64,
    pub ttilde: OperatorExpr,
    pub rtilde: OperatorExpr,
    pub t: OperatorExpr,
    pub l: OperatorExpr,
    pub coupled: bool,
}

/// `T~(h, h'_1, ..) = (T h - sum_j r(h'_j) e_j, S h'_1, ..)` and
/// `R~(h, h'_1, ..) = (L h, c_1(h) K + U h'_1, ..)`.
pub fn build_extension(
    t: &OperatorExpr,
    l: &ResolventMap,
    g: &Gadget,
    kd: &KernelData,
    lambda: C64,
) -> Result<ExtensionModel> {
    assemble_extension(t, l, g, kd, lambda, true)
}

/// The same model with the coupling `-sum_j r(h'_j) e_j` dropped from `T~`.
pub fn build_corrupted_extension(
    t: &OperatorExpr,
    l: &ResolventMap,
    g: &Gadget,
    kd: &KernelData,
    lambda: C64,
) -> Result<ExtensionModel> {
    assemble_extension(t, l, g, kd, lambda, false)
}

fn assemble_extension(
    t: &OperatorExpr,
    l: &ResolventMap,
    g: &Gadget,
    kd: &KernelData,
    lambda: C64,
    coupled: bool,
) -> Result<ExtensionModel> {
    if kd.lambda != lambda {
        return Err(Error::InvalidInput(format!(
            "kernel data computed at {}, extension requested at {lambda}",
            kd.lambda
        )));
    }
    let m = kd.m;
    let size = m + 1;
    let lop = l.eval(lambda)?;
    let u = g.u(lambda)?;
    let k = g.k(lambda)?;
    let defect = OperatorExpr::identity().minus(&kd.a.compose(&lop));
    let mut te: Vec<Option<OperatorExpr>> = vec![None; size * size];
    let mut re: Vec<Option<OperatorExpr>> = vec![None; size * size];
    te[0] = Some(t.clone());
    re[0] = Some(lop.clone());
    for (j, e) in kd.basis.iter().enumerate() {
        let c = j + 1;
        if coupled {
            te[c] = Some(OperatorExpr::rank_one(
                e.scale(C64::new(-1.0, 0.0)),
                g.r.vector().clone(),
            ));
        }
        te[c * size + c] = Some(g.s.clone());
        re[c * size] = Some(OperatorExpr::rank_one(k.clone(), e.clone()).compose(&defect));
        re[c * size + c] = Some(u.clone());
    }
    Ok(ExtensionModel {
        m,
        lambda,
        ttilde: OperatorExpr::block(size, te)?,
        rtilde: OperatorExpr::block(size, re)?,
        t: t.clone(),
        l: lop,
        coupled,
    })
}

impl ExtensionModel {
    pub fn components(&self) -> usize {
        self.m + 1
    }

    /// Embed `h` as `(h, 0, .., 0)`.
    pub fn embed(&self, h: &TailBoundedVector) -> TailBoundedVector {
        let mut parts = vec![TailBoundedVector::zero(); self.components()];
        parts[0] = h.clone();
        interleave(&parts)
    }
}

/// `R~ (lambda - T~) x = x` and `(lambda - T~) R~ x = x` over probes.
pub fn verify_extension(ext: &ExtensionModel, probes: &[TailBoundedVector]) -> Result<ResidualReport> {
    let a = ext.ttilde.lambda_minus(ext.lambda);
    let left = ext.rtilde.compose(&a);
    let right = a.compose(&ext.rtilde);
    let (mut wl, mut wr) = (0.0f64, 0.0f64);
    for x in probes {
        wl = wl.max(rel_dist(&left.apply(x)?, x, x));
        wr = wr.max(rel_dist(&right.apply(x)?, x, x));
    }
    Ok(ResidualReport::from_parts(
        probes.len(),
        vec![("left-identity".into(), wl), ("right-identity".into(), wr)],
    ))
}

/// `P_H R~ (h, 0) = L h` over probes `h` in `H`.
pub fn compression_check(ext: &ExtensionModel, probes: &[TailBoundedVector]) -> Result<ResidualReport> {
    let mut worst = 0.0f64;
    for h in probes {
        let y = ext.rtilde.apply(&ext.embed(h))?;
        let top = deinterleave(&y, ext.components()).swap_remove(0);
        worst = worst.max(rel_dist(&top, &ext.l.apply(h)?, h));
    }
    Ok(ResidualReport::from_parts(
        probes.len(),
        vec![("compression".into(), worst)],
    ))
}

/// Whether every entry of the `n x n` window of `R~` in the `H` rows and
/// `H'` columns is exactly zero.
pub fn upper_right_block_zero(ext: &ExtensionModel, n: usize) -> Result<bool> {
    let w = ext.rtilde.truncate(n)?;
    let c = ext.components();
    for i in (0..n).filter(|i| i % c == 0) {
        for j in (0..n).filter(|j| j % c != 0) {
            if w[(i, j)] != C64::new(0.0, 0.0) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Spectral norm of the `n x n` window of `T~(lambda1) - T~(lambda2)`.
pub fn lambda_independence(
    build: impl Fn(C64) -> Result<ExtensionModel>,
    lambda1: C64,
    lambda2: C64,
    n: usize,
) -> Result<f64> {
    let a = build(lambda1)?.ttilde.truncate(n)?;
    let b = build(lambda2)?.ttilde.truncate(n)?;
    if a.rows() != b.rows() {
        return Err(Error::Dimension("extensions of different size".into()));
    }
    Ok(sigma_max(&a.sub(&b)?))
}

/// `||(F(lambda + h) - F(lambda)) x / h + s F(lambda)^2 x|| / ||x||` for
/// `h = step` (`real-step`) and `h = i step` (`imag-step`), `s` the
/// orientation of the map.
pub fn derivative_check(
    f: &ResolventMap,
    lambda: C64,
    step: f64,
    probes: &[TailBoundedVector],
) -> Result<ResidualReport> {
    if !(step > 0.0) {
        return Err(Error::InvalidInput("step must be positive".into()));
    }
    let f0 = f.eval(lambda)?;
    let s = C64::new(f.orientation(), 0.0);
    let mut parts = Vec::new();
    for (name, h) in [("real-step", C64::new(step, 0.0)), ("imag-step", C64::new(0.0, step))] {
        let f1 = f.eval(lambda + h)?;
        let mut worst = 0.0f64;
        for x in probes {
            let fx = f0.apply(x)?;
            let dq = f1.apply(x)?.sub(&fx).scale(h.inv());
            let ffx = f0.apply(&fx)?;
            worst = worst.max(rel_dist(&dq, &ffx.scale(-s), x));
        }
        parts.push((name.to_string(), worst));
    }
    Ok(ResidualReport::from_parts(probes.len(), parts))
}

/// `||R~^k e_1||^{1/k}` for `k = 1..=kmax`, `e_1` in `H`.
pub fn growth_rates(ext: &ExtensionModel, kmax: usize) -> Result<Vec<f64>> {
    let mut x = ext.embed(&TailBoundedVector::basis(1));
    let mut out = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        x = ext.rtilde.apply(&x)?;
        out.push(x.norm().powf(1.0 / k as f64));
    }
    Ok(out)
}
