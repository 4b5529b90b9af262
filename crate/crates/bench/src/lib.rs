//! Fixtures shared by the benchmarks.

use reglab_core::dense::DenseMatrix;
use reglab_core::{OperatorExpr, C64};

/// Weighted shift with period `(1, 4)`.
pub fn weighted_shift() -> OperatorExpr {
    OperatorExpr::weighted_shift(&[1.0, 4.0]).expect("positive weights")
}

/// Well-conditioned random square matrix.
pub fn dense(n: usize, seed: u64) -> DenseMatrix {
    DenseMatrix::random(n, n, seed)
        .add(&DenseMatrix::identity(n).scale(C64::new(4.0, 0.0)))
        .expect("same shape")
}
