//! Numerical laboratory for one-sided and generalized resolvents of
//! structured operators on l2.
//!
//! Operators are lazy expressions ([`OperatorExpr`]) acting on finitely
//! supported vectors with certified tail bounds ([`TailBoundedVector`]).
//! Dense windows of them feed the linear algebra in [`dense`].

pub mod dense;
pub mod dilation;
pub mod error;
pub mod operator;
pub mod radius;
pub mod resolvent;

pub use dense::{DenseMatrix, SpectralEstimate};
pub use dilation::{ExtensionModel, Gadget, KernelData};
pub use error::{Error, Result};
pub use operator::{InnerFunctional, OperatorExpr, PeriodicSeq, TailBoundedVector};
pub use radius::{GammaTable, InverseFamily, OptimizerResult, WindowSchedule};
pub use resolvent::{Domain, ResidualReport, ResolventKind, ResolventMap};

pub type C64 = num_complex::Complex64;
