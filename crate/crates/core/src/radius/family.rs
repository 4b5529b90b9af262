use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{sigma_max, spectral_radius, DenseMatrix, SpectralEstimate, DEFAULT_MAXIT};
use crate::operator::{Node, OperatorExpr, TailBoundedVector};
use crate::resolvent::{random_probes, standard_probes, PROBE_SEED};
use crate::{Error, Result, C64};

/// Window size for the objective `r(S)`.
pub const DEFAULT_RADIUS_WINDOW: usize = 64;
const MEMBERSHIP_TOL: f64 = 1e-10;
const MAX_REAL_PARAMS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// `S = S0 + W (I - A S0)`, all satisfying `S A = I`.
    Left,
    /// `S = S0 + U (I - A S0) + (I - S0 A) V`, all satisfying `A S A = A`.
    Inner,
}

/// Affine family of inverses of `A` through a base inverse `S0`. The free
/// blocks are `p x q` matrices acting on the leading coordinates.
#[derive(Debug, Clone)]
pub struct InverseFamily {
    a: OperatorExpr,
    base: OperatorExpr,
    kind: FamilyKind,
    shape: (usize, usize),
    finite_dim: Option<usize>,
    window: usize,
    base_window: DenseMatrix,
    base_leak: f64,
    // first q rows of the window of I - A S0
    left_factor: DenseMatrix,
    left_tail: f64,
    // first p columns of I - S0 A
    right_factor: DenseMatrix,
    right_leak: f64,
}

/// Dimension of `A` when it is a square matrix on the leading coordinates.
fn finite_dimension(a: &OperatorExpr) -> Option<usize> {
    match a.node() {
        Node::Finite(m) if m.is_square() => Some(m.rows()),
        _ => None,
    }
}

pub fn make_inverse_family(
    a: &OperatorExpr,
    base: &OperatorExpr,
    kind: FamilyKind,
    shape: (usize, usize),
) -> Result<InverseFamily> {
    let blocks = match kind {
        FamilyKind::Left => 1,
        FamilyKind::Inner => 2,
    };
    if 2 * blocks * shape.0 * shape.1 > MAX_REAL_PARAMS {
        return Err(Error::InvalidInput(format!(
            "{} real parameters exceed the limit of {MAX_REAL_PARAMS}",
            2 * blocks * shape.0 * shape.1
        )));
    }
    let finite_dim = finite_dimension(a);
    let window = finite_dim.unwrap_or(DEFAULT_RADIUS_WINDOW);
    if shape.0 > window || shape.1 > window {
        return Err(Error::Dimension(format!(
            "block shape {shape:?} exceeds window {window}"
        )));
    }
    let id = OperatorExpr::identity();
    let (base_window, base_leak) = base.truncate_with_leakage(window)?;
    let defect_left = id.minus(&a.compose(base));
    let mut left_factor = DenseMatrix::zeros(shape.1, window);
    let mut left_tail = 0.0f64;
    for j in 0..window {
        let col = defect_left.apply(&TailBoundedVector::basis(j + 1))?;
        left_factor.set_column(j, &col.to_dense(shape.1));
        left_tail = left_tail.max(col.tail_bound());
    }
    let defect_right = id.minus(&base.compose(a));
    let mut right_factor = DenseMatrix::zeros(window, shape.0);
    let mut right_leak = 0.0f64;
    if kind == FamilyKind::Inner {
        for j in 0..shape.0 {
            let col = defect_right.apply(&TailBoundedVector::basis(j + 1))?;
            right_factor.set_column(j, &col.to_dense(window));
            let outside = col
                .coeffs()
                .iter()
                .skip(window)
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                .sqrt();
            right_leak = right_leak.max(outside + col.tail_bound());
        }
    }
    let fam = InverseFamily {
        a: a.clone(),
        base: base.clone(),
        kind,
        shape,
        finite_dim,
        window,
        base_window,
        base_leak,
        left_factor,
        left_tail,
        right_factor,
        right_leak,
    };
    let zero = vec![0.0; fam.dim()];
    let residual = fam.membership_residual(&zero)?;
    if !(residual <= MEMBERSHIP_TOL) {
        return Err(Error::BaseInvalid { residual });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let p: Vec<f64> = (0..fam.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let residual = fam.membership_residual(&p)?;
    if !(residual <= MEMBERSHIP_TOL) {
        return Err(Error::BaseInvalid { residual });
    }
    Ok(fam)
}

impl InverseFamily {
    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn base(&self) -> &OperatorExpr {
        &self.base
    }

    pub fn operator(&self) -> &OperatorExpr {
        &self.a
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Number of real parameters.
    pub fn dim(&self) -> usize {
        let blocks = match self.kind {
            FamilyKind::Left => 1,
            FamilyKind::Inner => 2,
        };
        2 * blocks * self.shape.0 * self.shape.1
    }

    fn block(&self, params: &[f64], which: usize) -> DenseMatrix {
        let (p, q) = self.shape;
        let off = which * 2 * p * q;
        DenseMatrix::from_fn(p, q, |i, j| {
            let k = off + 2 * (i * q + j);
            C64::new(params[k], params[k + 1])
        })
    }

    fn check_len(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "expected {} parameters, got {}",
                self.dim(),
                params.len()
            )));
        }
        Ok(())
    }

    pub fn member(&self, params: &[f64]) -> Result<OperatorExpr> {
        self.check_len(params)?;
        if self.dim() == 0 {
            return Ok(self.base.clone());
        }
        let id = OperatorExpr::identity();
        let w = OperatorExpr::finite(self.block(params, 0));
        let mut s = self.base.plus(&w.compose(&id.minus(&self.a.compose(&self.base))));
        if self.kind == FamilyKind::Inner {
            let v = OperatorExpr::finite(self.block(params, 1));
            s = s.plus(&id.minus(&self.base.compose(&self.a)).compose(&v));
        }
        Ok(s)
    }

    fn probes(&self) -> Vec<TailBoundedVector> {
        match self.finite_dim {
            None => standard_probes(),
            Some(d) => {
                let mut p: Vec<TailBoundedVector> = (1..=d).map(TailBoundedVector::basis).collect();
                p.extend(random_probes(8, d, PROBE_SEED));
                p
            }
        }
    }

    /// Largest relative defect of `S A = I` (left) or `A S A = A` (inner) on probes.
    pub fn membership_residual(&self, params: &[f64]) -> Result<f64> {
        let s = self.member(params)?;
        let mut worst = 0.0f64;
        for x in self.probes() {
            let ax = self.a.apply(&x)?;
            let sax = s.apply(&ax)?;
            let d = match self.kind {
                FamilyKind::Left => sax.dist_bound(&x),
                FamilyKind::Inner => self.a.apply(&sax)?.dist_bound(&ax),
            };
            worst = worst.max(d / x.norm());
        }
        Ok(worst)
    }

    /// Window of `member(params)` from the cached factors, with its leakage.
    pub fn member_window(&self, params: &[f64]) -> Result<(DenseMatrix, f64)> {
        self.check_len(params)?;
        let mut m = self.base_window.clone();
        let mut leak = self.base_leak;
        if self.dim() == 0 {
            return Ok((m, leak));
        }
        let n = self.window;
        let w = self.block(params, 0);
        let wl = w.matmul(&self.left_factor)?.resized(n, n);
        m = m.add(&wl)?;
        leak += w.frobenius_norm() * self.left_tail;
        if self.kind == FamilyKind::Inner {
            let v = self.block(params, 1).resized(self.shape.0, n);
            m = m.add(&self.right_factor.matmul(&v)?)?;
            leak += v.frobenius_norm() * self.right_leak;
        }
        Ok((m, leak))
    }

    pub fn spectral_radius(&self, params: &[f64]) -> Result<SpectralEstimate> {
        let (m, leak) = self.member_window(params)?;
        matrix_radius(&m, leak, self.finite_dim.is_some())
    }
}

/// `r(S)` from an `n x n` window.
///
/// When the window is invariant and holds the whole support of `S`, this is
/// the spectral radius of the matrix. Otherwise it is `min_j ||M^{2^j}||^{1/2^j}`
/// over powers below `n / 3`, where the window power still agrees with the
/// restricted power of `S`. `converged` is false when the window leaks.
pub fn window_spectral_radius(s: &OperatorExpr, n: usize) -> Result<SpectralEstimate> {
    let (m, leak) = s.truncate_with_leakage(n)?;
    matrix_radius(&m, leak, false)
}

fn support(m: &DenseMatrix) -> usize {
    let n = m.rows();
    let mut last = 0;
    for i in 0..n {
        for j in 0..n {
            if m.row(i)[j] != C64::new(0.0, 0.0) {
                last = last.max(i.max(j) + 1);
            }
        }
    }
    last
}

fn matrix_radius(m: &DenseMatrix, leak: f64, finite: bool) -> Result<SpectralEstimate> {
    let n = m.rows();
    let sup = support(m);
    if sup == 0 {
        return Ok(SpectralEstimate {
            value: 0.0,
            residual: 0.0,
            iterations: 0,
            converged: leak == 0.0,
        });
    }
    if finite || (leak == 0.0 && 2 * sup <= n) {
        return spectral_radius(&m.submatrix(sup, sup), 1e-13, DEFAULT_MAXIT);
    }
    let mut p = m.clone();
    let mut k = 1usize;
    let mut best = f64::INFINITY;
    let mut prev = f64::NAN;
    let mut last = f64::NAN;
    let mut iterations = 0;
    while 3 * k <= n {
        let root = sigma_max(&p).powf(1.0 / k as f64);
        iterations += 1;
        best = best.min(root);
        prev = last;
        last = root;
        if root == 0.0 {
            break;
        }
        p = p.matmul(&p)?;
        k *= 2;
    }
    let residual = if prev.is_nan() { 0.0 } else { (last - prev).abs() };
    Ok(SpectralEstimate {
        value: best,
        residual,
        iterations,
        converged: leak == 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    /// Total objective evaluations across restarts.
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    pub shape: (usize, usize),
    pub initial_step: f64,
    /// Restart points are drawn uniformly from `[-spread, spread]`.
    pub spread: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            budget: 800,
            restarts: 16,
            seed: 42,
            shape: (2, 2),
            initial_step: 0.25,
            spread: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub restart: usize,
    pub evaluation: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerResult {
    pub best_params: Vec<f64>,
    pub best_spectral_radius: f64,
    pub base_spectral_radius: f64,
    pub evaluations: usize,
    pub trace: Vec<TraceEntry>,
}

struct RestartOutcome {
    x: Vec<f64>,
    f: f64,
    evals: usize,
    trace: Vec<(usize, f64)>,
}

/// Multistart Nelder-Mead on `p -> r(member(p))`. Restart 0 starts at the
/// base inverse, so the result never exceeds `r(S0)`.
pub fn minimize_spectral_radius(fam: &InverseFamily, options: &OptimizerOptions) -> Result<OptimizerResult> {
    if options.budget == 0 || options.restarts == 0 {
        return Err(Error::InvalidInput("budget and restarts must be at least 1".into()));
    }
    let d = fam.dim();
    let restarts = options.restarts.min(options.budget);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let starts: Vec<(Vec<f64>, usize)> = (0..restarts)
        .map(|r| {
            let x = if r == 0 {
                vec![0.0; d]
            } else {
                (0..d).map(|_| rng.gen_range(-options.spread..options.spread)).collect()
            };
            let evals = options.budget / restarts + usize::from(r < options.budget % restarts);
            (x, evals)
        })
        .collect();
    let workers = thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(restarts);
    let mut outcomes: Vec<Option<Result<RestartOutcome>>> = (0..restarts).map(|_| None).collect();
    thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let starts = &starts;
                s.spawn(move || {
                    (w..restarts)
                        .step_by(workers)
                        .map(|r| {
                            let (x0, evals) = &starts[r];
                            (r, nelder_mead(fam, x0, options.initial_step, *evals))
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (r, out) in h.join().expect("optimizer worker") {
                outcomes[r] = Some(out);
            }
        }
    });
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut trace = Vec::new();
    let mut evaluations = 0;
    let mut base = f64::NAN;
    for (r, out) in outcomes.into_iter().enumerate() {
        let out = out.expect("every restart ran")?;
        if r == 0 {
            base = out.trace.first().map(|t| t.1).unwrap_or(f64::NAN);
        }
        for &(e, v) in &out.trace {
            if best.as_ref().map_or(true, |b| v < b.1) {
                trace.push(TraceEntry {
                    restart: r,
                    evaluation: evaluations + e,
                    value: v,
                });
                best = Some((out.x.clone(), v));
            }
        }
        if best.as_ref().map_or(true, |b| out.f < b.1) {
            best = Some((out.x.clone(), out.f));
        }
        evaluations += out.evals;
    }
    let (best_params, best_spectral_radius) = best.expect("at least one evaluation");
    Ok(OptimizerResult {
        best_params,
        best_spectral_radius,
        base_spectral_radius: base,
        evaluations,
        trace,
    })
}

fn nelder_mead(fam: &InverseFamily, x0: &[f64], step: f64, max_evals: usize) -> Result<RestartOutcome> {
    let d = x0.len();
    let mut evals = 0usize;
    let mut trace: Vec<(usize, f64)> = Vec::new();
    let mut best_x = x0.to_vec();
    let mut best_f = f64::INFINITY;
    let mut f = |x: &[f64], evals: &mut usize| -> Result<f64> {
        *evals += 1;
        let v = fam.spectral_radius(x)?.value;
        if v < best_f {
            best_f = v;
            best_x = x.to_vec();
            trace.push((*evals, v));
        }
        Ok(v)
    };
    let f0 = f(x0, &mut evals)?;
    if d == 0 || evals >= max_evals {
        return Ok(RestartOutcome {
            x: best_x,
            f: best_f,
            evals,
            trace,
        });
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for i in 0..d {
        if evals >= max_evals {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += step;
        let v = f(&x, &mut evals)?;
        simplex.push((x, v));
    }
    while simplex.len() == d + 1 && evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[d].1 - simplex[0].1 <= 1e-14 * simplex[0].1.abs().max(1e-300) {
            break;
        }
        let mut centroid = vec![0.0; d];
        for (x, _) in &simplex[..d] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / d as f64;
            }
        }
        let toward = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[d].0)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = toward(-1.0);
        let fr = f(&xr, &mut evals)?;
        if fr < simplex[0].1 {
            if evals >= max_evals {
                simplex[d] = (xr, fr);
                break;
            }
            let xe = toward(-2.0);
            let fe = f(&xe, &mut evals)?;
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            if evals >= max_evals {
                break;
            }
            let xc = if fr < simplex[d].1 { toward(-0.5) } else { toward(0.5) };
            let fc = f(&xc, &mut evals)?;
            if fc < fr.min(simplex[d].1) {
                simplex[d] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    if evals >= max_evals {
                        break;
                    }
                    let xs: Vec<f64> = x0.iter().zip(&v.0).map(|(a, b)| a + 0.5 * (b - a)).collect();
                    let fs = f(&xs, &mut evals)?;
                    *v = (xs, fs);
                }
            }
        }
    }
    Ok(RestartOutcome {
        x: best_x,
        f: best_f,
        evals,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    fn small() -> OptimizerOptions {
        OptimizerOptions {
            budget: 160,
            restarts: 4,
            ..OptimizerOptions::default()
        }
    }

    #[test]
    fn base_member_of_doubled_shift() {
        let a = OperatorExpr::shift().scaled(c(-2.0));
        let s0 = OperatorExpr::backward().scaled(c(-0.5));
        let fam = make_inverse_family(&a, &s0, FamilyKind::Left, (2, 2)).unwrap();
        assert!(fam.membership_residual(&vec![0.0; 8]).unwrap() < 1e-12);
        let p: Vec<f64> = (0..8).map(|i| (i as f64 * 0.37).sin()).collect();
        assert!(fam.membership_residual(&p).unwrap() < 1e-12);
        let r = fam.spectral_radius(&vec![0.0; 8]).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12 && r.converged);
    }

    #[test]
    fn member_window_matches_truncation() {
        let a = OperatorExpr::weighted_shift(&[1.0, 4.0]).unwrap().scaled(c(-1.0));
        let s0 = OperatorExpr::weighted_backward_shift(&[1.0, 0.25])
            .unwrap()
            .scaled(c(-1.0));
        let fam = make_inverse_family(&a, &s0, FamilyKind::Left, (2, 2)).unwrap();
        let p: Vec<f64> = (0..8).map(|i| 0.1 * i as f64 - 0.3).collect();
        let (w, leak) = fam.member_window(&p).unwrap();
        let direct = fam.member(&p).unwrap().truncate(fam.window()).unwrap();
        assert!(w.sub(&direct).unwrap().max_abs() < 1e-14);
        assert_eq!(leak, 0.0);
    }

    #[test]
    fn invalid_base_is_rejected() {
        let a = OperatorExpr::shift().scaled(c(-2.0));
        let wrong = OperatorExpr::backward();
        assert!(matches!(
            make_inverse_family(&a, &wrong, FamilyKind::Left, (1, 1)),
            Err(Error::BaseInvalid { .. })
        ));
    }

    #[test]
    fn inner_family_on_singular_diagonal() {
        let a = OperatorExpr::finite(DenseMatrix::diag_real(&[0.0, 2.0]));
        let s0 = OperatorExpr::finite(DenseMatrix::diag_real(&[0.0, 0.5]));
        let fam = make_inverse_family(&a, &s0, FamilyKind::Inner, (2, 2)).unwrap();
        assert_eq!(fam.dim(), 16);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let p: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(fam.membership_residual(&p).unwrap() < 1e-12);
        }
    }

    #[test]
    fn single_point_family() {
        let a = OperatorExpr::finite(DenseMatrix::diag_real(&[2.0, 4.0]));
        let s0 = OperatorExpr::finite(DenseMatrix::diag_real(&[0.5, 0.25]));
        let fam = make_inverse_family(&a, &s0, FamilyKind::Left, (0, 0)).unwrap();
        let res = minimize_spectral_radius(&fam, &small()).unwrap();
        assert!((1.0 / res.best_spectral_radius - 2.0).abs() < 1e-9);
    }

    #[test]
    fn optimizer_cannot_beat_closed_form_optimum() {
        let a = OperatorExpr::shift().scaled(c(-2.0));
        let s0 = OperatorExpr::backward().scaled(c(-0.5));
        let fam = make_inverse_family(&a, &s0, FamilyKind::Left, (2, 2)).unwrap();
        let res = minimize_spectral_radius(&fam, &small()).unwrap();
        assert!(res.best_spectral_radius >= 0.5 - 1e-6 && res.best_spectral_radius <= 0.5 + 1e-3);
        assert!(res.best_spectral_radius <= res.base_spectral_radius);
        let again = fam.spectral_radius(&res.best_params).unwrap().value;
        assert_eq!(again, res.best_spectral_radius);
        assert!(res.evaluations <= 160);
    }

    #[test]
    fn optimizer_is_deterministic() {
        let a = OperatorExpr::shift().scaled(c(-1.0));
        let s0 = crate::radius::shifted_left_inverse(&OperatorExpr::shift(), c(0.0)).unwrap();
        let fam = make_inverse_family(&a, &s0, FamilyKind::Left, (1, 2)).unwrap();
        let r1 = minimize_spectral_radius(&fam, &small()).unwrap();
        let r2 = minimize_spectral_radius(&fam, &small()).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn gelfand_window_on_weighted_backward_shift() {
        let s = OperatorExpr::weighted_backward_shift(&[1.0, 0.25]).unwrap();
        let r = window_spectral_radius(&s, 64).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
        let r = window_spectral_radius(&OperatorExpr::finite(DenseMatrix::diag_real(&[0.5, -3.0])), 16).unwrap();
        assert!((r.value - 3.0).abs() < 1e-10);
    }
}
