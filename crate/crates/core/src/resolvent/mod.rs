//! Left, right and generalized resolvents: construction and residual checks.

mod apostol;
mod left;
mod neumann;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::operator::{interleave, OperatorExpr, TailBoundedVector};
use crate::{Error, Result, C64};

pub use apostol::{apostol_assemble, apostol_projection_check, ApostolData};
pub use left::{
    backward_right_resolvent, complement_left_resolvent, complement_resolvent_map, mp_left_inverse, mp_resolvent_map,
    scalar_resolvent_map, shift_left_resolvent, true_resolvent_map,
};
pub use neumann::{neumann_generalized_resolvent, neumann_resolvent_map};

pub const DEFAULT_WINDOW: usize = 64;
pub const PROBE_SEED: u64 = 20_240_611;

/// A connected region of the plane on which a resolvent map is declared.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// Open disk.
    Disk {
        center: C64,
        radius: f64,
    },
    /// Open annulus `inner < |z - center| < outer`.
    Annulus {
        center: C64,
        inner: f64,
        outer: f64,
    },
    /// `|z - center| > radius`.
    Exterior {
        center: C64,
        radius: f64,
    },
    Whole,
    /// Points in every listed domain.
    Intersection(Vec<Domain>),
}

impl Domain {
    pub fn disk(radius: f64) -> Self {
        Self::Disk {
            center: C64::new(0.0, 0.0),
            radius,
        }
    }

    pub fn contains(&self, z: C64) -> bool {
        match self {
            Self::Disk { center, radius } => (z - center).norm() < *radius,
            Self::Annulus { center, inner, outer } => {
                let r = (z - center).norm();
                *inner < r && r < *outer
            }
            Self::Exterior { center, radius } => (z - center).norm() > *radius,
            Self::Whole => true,
            Self::Intersection(parts) => parts.iter().all(|d| d.contains(z)),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Disk { center, radius } => write!(f, "|z - {center}| < {radius}"),
            Self::Annulus { center, inner, outer } => write!(f, "{inner} < |z - {center}| < {outer}"),
            Self::Exterior { center, radius } => write!(f, "|z - {center}| > {radius}"),
            Self::Whole => write!(f, "C"),
            Self::Intersection(parts) => {
                let s: Vec<String> = parts.iter().map(|d| d.to_string()).collect();
                write!(f, "{}", s.join(" and "))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventKind {
    Left,
    Right,
    Generalized,
    TwoSided,
}

type Builder = dyn Fn(C64) -> Result<OperatorExpr> + Send + Sync;

/// `lambda -> F(lambda)` on a declared domain.
///
/// `orientation` is `+1` when `F` is a one-sided or generalized inverse of
/// `lambda - T` and `-1` when it inverts `T - lambda` instead (the Neumann
/// series does the latter). The residual checks account for it.
#[derive(Clone)]
pub struct ResolventMap {
    name: String,
    kind: ResolventKind,
    domain: Domain,
    orientation: f64,
    builder: Arc<Builder>,
}

impl fmt::Debug for ResolventMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ResolventMap")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("domain", &self.domain)
            .field("orientation", &self.orientation)
            .finish()
    }
}

impl ResolventMap {
    pub fn new(
        name: impl Into<String>,
        kind: ResolventKind,
        domain: Domain,
        builder: impl Fn(C64) -> Result<OperatorExpr> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            kind,
            domain,
            orientation: 1.0,
            builder: Arc::new(builder),
        }
    }

    pub fn with_orientation(mut self, orientation: f64) -> Self {
        self.orientation = orientation.signum();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ResolventKind {
        self.kind
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn eval(&self, lambda: C64) -> Result<OperatorExpr> {
        if !self.domain.contains(lambda) {
            return Err(Error::DomainMismatch {
                lambda,
                domain: self.domain.to_string(),
            });
        }
        (self.builder)(lambda)
    }

    pub fn apply(&self, lambda: C64, x: &TailBoundedVector) -> Result<TailBoundedVector> {
        self.eval(lambda)?.apply(x)
    }

    /// The operator this map inverts at `lambda`: `orientation * (lambda - T)`.
    pub fn target(&self, t: &OperatorExpr, lambda: C64) -> OperatorExpr {
        t.lambda_minus(lambda).scaled(C64::new(self.orientation, 0.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub probes: usize,
    pub breakdown: Vec<(String, f64)>,
}

impl ResidualReport {
    pub fn from_parts(probes: usize, breakdown: Vec<(String, f64)>) -> Self {
        let max_residual = breakdown.iter().map(|(_, r)| *r).fold(0.0, f64::max);
        Self {
            max_residual,
            probes,
            breakdown,
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.breakdown.iter().find(|(n, _)| n == name).map(|(_, r)| *r)
    }
}

/// `e_1..e_16` followed by eight fixed-seed random vectors supported in `1..16`.
pub fn standard_probes() -> Vec<TailBoundedVector> {
    let mut probes: Vec<TailBoundedVector> = (1..=16).map(TailBoundedVector::basis).collect();
    probes.extend(random_probes(8, 16, PROBE_SEED));
    probes
}

pub fn random_probes(count: usize, support: usize, seed: u64) -> Vec<TailBoundedVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            TailBoundedVector::exact(
                (0..support)
                    .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect(),
            )
        })
        .collect()
}

/// Probes for an `m`-fold direct sum: `e_k` placed in each component for
/// `k = 1..per_component`, then the standard random vectors in every component.
pub fn block_probes(m: usize, per_component: usize) -> Vec<TailBoundedVector> {
    let mut probes = Vec::new();
    for c in 0..m {
        for k in 1..=per_component {
            let mut parts = vec![TailBoundedVector::zero(); m];
            parts[c] = TailBoundedVector::basis(k);
            probes.push(interleave(&parts));
        }
    }
    let rand = random_probes(8 * m, per_component, PROBE_SEED);
    for chunk in rand.chunks(m) {
        probes.push(interleave(chunk));
    }
    probes
}

/// Certified relative distance `||a - b|| / ||x||` including tails.
pub(crate) fn rel_dist(a: &TailBoundedVector, b: &TailBoundedVector, x: &TailBoundedVector) -> f64 {
    let n = x.norm();
    let d = a.dist_bound(b);
    if n == 0.0 {
        d
    } else {
        d / n
    }
}

/// `max ||L(lambda) (lambda - T) x - x|| / ||x||` over the probes.
pub fn residual_left_inverse(
    l: &ResolventMap,
    t: &OperatorExpr,
    lambda: C64,
    probes: &[TailBoundedVector],
) -> Result<ResidualReport> {
    let op = l.eval(lambda)?.compose(&l.target(t, lambda));
    let mut worst = 0.0f64;
    for x in probes {
        worst = worst.max(rel_dist(&op.apply(x)?, x, x));
    }
    Ok(ResidualReport::from_parts(
        probes.len(),
        vec![("left-inverse".into(), worst)],
    ))
}

/// `max ||(lambda - T) R(lambda) x - x|| / ||x||` over the probes.
pub fn residual_right_inverse(
    r: &ResolventMap,
    t: &OperatorExpr,
    lambda: C64,
    probes: &[TailBoundedVector],
) -> Result<ResidualReport> {
    let op = r.target(t, lambda).compose(&r.eval(lambda)?);
    let mut worst = 0.0f64;
    for x in probes {
        worst = worst.max(rel_dist(&op.apply(x)?, x, x));
    }
    Ok(ResidualReport::from_parts(
        probes.len(),
        vec![("right-inverse".into(), worst)],
    ))
}

/// `max ||F(lambda)x - F(mu)x - s (mu - lambda) F(lambda)F(mu)x|| / ||x||`,
/// `s` the map's orientation.
pub fn residual_resolvent_identity(
    f: &ResolventMap,
    lambda: C64,
    mu: C64,
    probes: &[TailBoundedVector],
) -> Result<ResidualReport> {
    let fl = f.eval(lambda)?;
    let fm = f.eval(mu)?;
    let coef = (mu - lambda) * f.orientation();
    let mut worst = 0.0f64;
    for x in probes {
        let a = fl.apply(x)?;
        let fmx = fm.apply(x)?;
        let rhs = fmx.axpy(coef, &fl.apply(&fmx)?);
        worst = worst.max(rel_dist(&a, &rhs, x));
    }
    Ok(ResidualReport::from_parts(
        probes.len(),
        vec![("resolvent-identity".into(), worst)],
    ))
}

/// Both generalized-inverse equations `A G A = A` and `G A G = G` with
/// `A = orientation * (lambda - T)`.
pub fn residual_generalized_inverse(
    g: &ResolventMap,
    t: &OperatorExpr,
    lambda: C64,
    probes: &[TailBoundedVector],
) -> Result<ResidualReport> {
    let gl = g.eval(lambda)?;
    let a = g.target(t, lambda);
    let (mut r1, mut r2) = (0.0f64, 0.0f64);
    for x in probes {
        let ax = a.apply(x)?;
        let agax = a.apply(&gl.apply(&ax)?)?;
        r1 = r1.max(rel_dist(&agax, &ax, x));
        let gx = gl.apply(x)?;
        let gagx = gl.apply(&a.apply(&gx)?)?;
        r2 = r2.max(rel_dist(&gagx, &gx, x));
    }
    Ok(ResidualReport::from_parts(
        probes.len(),
        vec![("inner-inverse".into(), r1), ("outer-inverse".into(), r2)],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domains() {
        let d = Domain::disk(0.9);
        assert!(d.contains(C64::new(0.5, 0.5)));
        assert!(!d.contains(C64::new(0.9, 0.0)));
        let a = Domain::Annulus {
            center: C64::new(0.0, 0.0),
            inner: 1.0,
            outer: 2.0,
        };
        assert!(a.contains(C64::new(0.0, 1.5)) && !a.contains(C64::new(0.5, 0.0)));
        let i = Domain::Intersection(vec![d, Domain::Whole]);
        assert!(i.contains(C64::new(0.1, 0.0)));
    }

    #[test]
    fn eval_outside_domain_is_rejected() {
        let m = ResolventMap::new("id", ResolventKind::TwoSided, Domain::disk(1.0), |_| {
            Ok(OperatorExpr::identity())
        });
        assert!(matches!(m.eval(C64::new(2.0, 0.0)), Err(Error::DomainMismatch { .. })));
    }

    #[test]
    fn probe_sets_are_deterministic() {
        let a = standard_probes();
        let b = standard_probes();
        assert_eq!(a.len(), 24);
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.support_len() <= 16));
        assert_eq!(block_probes(2, 4).len(), 8 + 8);
    }
}
