//! Reduced-minimum-modulus sequences, the limit `s(T) = lim gamma(T^k)^{1/k}`
//! and searches over one-sided and inner inverse families.
//!
//! Finite matrices only exercise the invertible case here: a square singular
//! matrix has no nearby generalized inverses of bounded size, so the radius
//! formulas are checked on infinite structured operators.

mod family;

use std::thread;

use crate::dense::{gamma, DEFAULT_RANK_TOL};
use crate::operator::{Node, OperatorExpr};
use crate::{Error, Result, C64};

pub use family::{
    make_inverse_family, minimize_spectral_radius, window_spectral_radius, FamilyKind, InverseFamily, OptimizerOptions,
    OptimizerResult, TraceEntry, DEFAULT_RADIUS_WINDOW,
};

/// Relative agreement of the last three extrapolants needed for a certified limit.
pub const CERTIFY_TOL: f64 = 1e-3;
/// Largest admissible boundary leakage relative to the gamma estimate.
pub const LEAKAGE_FRACTION: f64 = 0.01;

/// Column-window size `max(floor, slope * k + margin)` for the power `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSchedule {
    pub floor: usize,
    pub slope: usize,
    pub margin: usize,
}

impl Default for WindowSchedule {
    fn default() -> Self {
        Self {
            floor: 256,
            slope: 8,
            margin: 64,
        }
    }
}

impl WindowSchedule {
    /// `8k + 64` with no floor.
    pub fn linear() -> Self {
        Self {
            floor: 0,
            slope: 8,
            margin: 64,
        }
    }

    pub fn fixed(n: usize) -> Self {
        Self {
            floor: n,
            slope: 0,
            margin: 0,
        }
    }

    pub fn size(&self, k: usize) -> usize {
        self.floor.max(self.slope * k + self.margin)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaRow {
    pub k: usize,
    pub n: usize,
    pub gamma: f64,
    pub root: f64,
    pub leakage: f64,
    pub ambiguous_rank_gap: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaTable {
    pub rows: Vec<GammaRow>,
    /// Stride used by the extrapolation (the period of the operator).
    pub stride: usize,
    /// `(k, exp((ln gamma_k - ln gamma_{k-p}) / p))`.
    pub extrapolants: Vec<(usize, f64)>,
    pub extrapolated_limit: f64,
    pub certified: bool,
    /// Places where the root column changes direction.
    pub direction_changes: usize,
}

/// `gamma(T^k)` on column windows for `k = 1..=kmax`.
pub fn gamma_sequence(t: &OperatorExpr, kmax: usize, schedule: WindowSchedule) -> Result<GammaTable> {
    if kmax == 0 {
        return Err(Error::InvalidInput("kmax must be at least 1".into()));
    }
    let ks: Vec<usize> = (1..=kmax).collect();
    let workers = thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(kmax);
    let mut rows: Vec<Result<GammaRow>> = Vec::with_capacity(kmax);
    thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let ks = &ks;
                s.spawn(move || {
                    ks.iter()
                        .skip(w)
                        .step_by(workers)
                        .map(|&k| gamma_row(t, k, schedule.size(k)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let per: Vec<Vec<Result<GammaRow>>> = handles.into_iter().map(|h| h.join().expect("gamma worker")).collect();
        let mut iters: Vec<_> = per.into_iter().map(|v| v.into_iter()).collect();
        for i in 0..kmax {
            rows.push(iters[i % workers].next().expect("row count"));
        }
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(finish_table(rows, t.period()))
}

fn gamma_row(t: &OperatorExpr, k: usize, n: usize) -> Result<GammaRow> {
    let w = t.pow(k).column_window(n)?;
    let g = gamma(&w.matrix, DEFAULT_RANK_TOL)?;
    if w.max_tail > LEAKAGE_FRACTION * g.value {
        return Err(Error::WindowTooSmall {
            k,
            n,
            leakage: w.max_tail,
            gamma: g.value,
        });
    }
    Ok(GammaRow {
        k,
        n,
        gamma: g.value,
        root: g.value.powf(1.0 / k as f64),
        leakage: w.max_tail,
        ambiguous_rank_gap: g.ambiguous_rank_gap,
    })
}

fn finish_table(rows: Vec<GammaRow>, stride: usize) -> GammaTable {
    let p = stride.max(1);
    let mut extrapolants = Vec::new();
    for i in p..rows.len() {
        let (a, b) = (rows[i].gamma, rows[i - p].gamma);
        if a > 0.0 && b > 0.0 {
            extrapolants.push((rows[i].k, ((a.ln() - b.ln()) / p as f64).exp()));
        }
    }
    let (extrapolated_limit, certified) = match extrapolants.len() {
        0 => (rows.last().map(|r| r.root).unwrap_or(0.0), false),
        len => {
            let last = extrapolants[len - 1].1;
            let certified = rows.len() >= 4
                && len >= 3
                && extrapolants[len - 3..]
                    .iter()
                    .all(|(_, e)| (e - last).abs() <= CERTIFY_TOL * last.abs());
            (last, certified)
        }
    };
    let mut direction_changes = 0;
    for w in rows.windows(3) {
        let d1 = w[1].root - w[0].root;
        let d2 = w[2].root - w[1].root;
        if d1 * d2 < 0.0 && d1.abs().min(d2.abs()) > 1e-12 {
            direction_changes += 1;
        }
    }
    GammaTable {
        rows,
        stride: p,
        extrapolants,
        extrapolated_limit,
        certified,
        direction_changes,
    }
}

/// The extrapolated `s(T)`, provided the table is long enough and certified.
pub fn regularity_radius_estimate(table: &GammaTable) -> Result<f64> {
    if table.rows.len() < 4 {
        return Err(Error::NonConvergent {
            reason: format!("gamma table has {} rows, need at least 4", table.rows.len()),
        });
    }
    if !table.certified {
        let tail: Vec<String> = table
            .extrapolants
            .iter()
            .rev()
            .take(3)
            .map(|(k, e)| format!("k={k}: {e:.6e}"))
            .collect();
        return Err(Error::NonConvergent {
            reason: format!("last extrapolants disagree beyond {CERTIFY_TOL:e}: {}", tail.join(", ")),
        });
    }
    Ok(table.extrapolated_limit)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawReport {
    pub n: usize,
    pub s_t: f64,
    pub s_tn: f64,
    pub s_t_pow: f64,
    pub gap: f64,
}

/// Compares `s(T^n)` with `s(T)^n`, both from certified tables.
pub fn power_law_check(t: &OperatorExpr, n: usize, kmax: usize, schedule: WindowSchedule) -> Result<PowerLawReport> {
    if n == 0 {
        return Err(Error::InvalidInput("power must be at least 1".into()));
    }
    let s_t = regularity_radius_estimate(&gamma_sequence(t, kmax, schedule)?)?;
    let s_tn = regularity_radius_estimate(&gamma_sequence(&t.pow(n), kmax, schedule)?)?;
    let s_t_pow = s_t.powi(n as i32);
    Ok(PowerLawReport {
        n,
        s_t,
        s_tn,
        s_t_pow,
        gap: (s_tn - s_t_pow).abs(),
    })
}

/// `dist(lambda0, sigma_l(T))` for operators whose left spectrum is known:
/// periodic weighted forward shifts (circle of geometric-mean radius),
/// diagonals, the identity, and scalar multiples of these.
pub fn closed_form_left_distance(t: &OperatorExpr, lambda0: C64) -> Option<f64> {
    match t.node() {
        Node::Identity => Some((lambda0 - 1.0).norm()),
        Node::ForwardShift(w) => Some((lambda0.norm() - w.period_geometric_mean()).abs()),
        Node::Diagonal(d) => d
            .prefix()
            .iter()
            .chain(d.period())
            .map(|v| (lambda0 - v).norm())
            .min_by(f64::total_cmp),
        Node::ScalarMul(alpha, inner) => {
            if alpha.norm() == 0.0 {
                return Some(lambda0.norm());
            }
            closed_form_left_distance(inner, lambda0 / alpha).map(|d| d * alpha.norm())
        }
        _ => None,
    }
}

/// A left inverse of `T` for the same registered families.
pub fn closed_form_left_inverse(t: &OperatorExpr) -> Option<OperatorExpr> {
    match t.node() {
        Node::Identity => Some(OperatorExpr::identity()),
        Node::ForwardShift(w) => w.recip().map(OperatorExpr::backward_shift),
        Node::Diagonal(d) => d.recip().map(OperatorExpr::diagonal),
        Node::ScalarMul(alpha, inner) if alpha.norm() > 0.0 => {
            closed_form_left_inverse(inner).map(|s| s.scaled(alpha.inv()))
        }
        _ => None,
    }
}

/// A left inverse of `lambda0 - T`: `(lambda0 S - I)^{-1} S` with `S T = I`.
pub fn shifted_left_inverse(t: &OperatorExpr, lambda0: C64) -> Result<OperatorExpr> {
    let s = closed_form_left_inverse(t)
        .ok_or_else(|| Error::InvalidInput("no closed-form left inverse for this operator".into()))?;
    if lambda0.norm() == 0.0 {
        return Ok(s.scaled(C64::new(-1.0, 0.0)));
    }
    let radius = 1.0 / s.norm_bound();
    if lambda0.norm() >= radius {
        return Err(Error::OutsideDisk {
            lambda: lambda0,
            radius,
        });
    }
    Ok(OperatorExpr::geometric_inverse(lambda0, &s).compose(&s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZemanekReport {
    pub lambda0: C64,
    pub closed_form: Option<f64>,
    pub gamma_limit: f64,
    pub gamma_certified: bool,
    pub optimizer_sup: f64,
    pub optimizer: OptimizerResult,
    /// Pairwise absolute gaps between the available estimates.
    pub gaps: Vec<(String, f64)>,
}

impl ZemanekReport {
    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().map(|(_, g)| *g).fold(0.0, f64::max)
    }
}

/// Three routes to `dist(lambda0, sigma_l(T))`: the closed form, the gamma
/// limit of `lambda0 - T`, and `sup 1/r(S)` over left inverses of `lambda0 - T`.
pub fn zemanek_gap(
    t: &OperatorExpr,
    lambda0: C64,
    kmax: usize,
    schedule: WindowSchedule,
    options: &OptimizerOptions,
) -> Result<ZemanekReport> {
    let a = t.lambda_minus(lambda0);
    let table = gamma_sequence(&a, kmax, schedule)?;
    let base = shifted_left_inverse(t, lambda0)?;
    let fam = make_inverse_family(&a, &base, FamilyKind::Left, options.shape)?;
    let opt = minimize_spectral_radius(&fam, options)?;
    let optimizer_sup = if opt.best_spectral_radius > 0.0 {
        1.0 / opt.best_spectral_radius
    } else {
        f64::INFINITY
    };
    let closed_form = closed_form_left_distance(t, lambda0);
    let mut gaps = vec![(
        "gamma-optimizer".to_string(),
        (table.extrapolated_limit - optimizer_sup).abs(),
    )];
    if let Some(d) = closed_form {
        gaps.push(("closed-gamma".into(), (d - table.extrapolated_limit).abs()));
        gaps.push(("closed-optimizer".into(), (d - optimizer_sup).abs()));
    }
    Ok(ZemanekReport {
        lambda0,
        closed_form,
        gamma_limit: table.extrapolated_limit,
        gamma_certified: table.certified,
        optimizer_sup,
        optimizer: opt,
        gaps,
    })
}
