use thiserror::Error;

use crate::C64;

/// Errors produced by the operator, numerics and construction layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("geometric inverse applied outside its disk: |lambda| * norm bound = {ratio} >= 1")]
    ContractiveViolation { ratio: f64 },

    #[error("matrix is singular to tolerance (pivot {pivot:e} at step {step})")]
    SingularToTolerance { step: usize, pivot: f64 },

    #[error("iteration did not converge after {iterations} steps (best {best}, bracket [{lower}, {upper}])")]
    NotConverged {
        best: f64,
        lower: f64,
        upper: f64,
        iterations: usize,
    },

    #[error("lambda - T is not left invertible at window scale (sigma_min = {sigma_min:e})")]
    NotLeftInvertible { sigma_min: f64 },

    #[error("complement subspace fails to complement the range (pivot ratio {ratio:e})")]
    ComplementDegenerate { ratio: f64 },

    #[error("lambda = {lambda} lies outside the disk of radius {radius}")]
    OutsideDisk { lambda: C64, radius: f64 },

    #[error("lambda = {lambda} is outside the declared domain {domain}")]
    DomainMismatch { lambda: C64, domain: String },

    #[error("base inverse fails its defining identity (residual {residual:e})")]
    BaseInvalid { residual: f64 },

    #[error("extrapolation did not settle: {reason}")]
    NonConvergent { reason: String },

    #[error("window too small: leakage {leakage:e} exceeds 1% of gamma {gamma:e} at k = {k}, N = {n}")]
    WindowTooSmall {
        k: usize,
        n: usize,
        leakage: f64,
        gamma: f64,
    },

    #[error("kernel dimension unstable: singular value gap {gap:.3} at rank cut {rank}")]
    KernelDimensionUnstable { rank: usize, gap: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
