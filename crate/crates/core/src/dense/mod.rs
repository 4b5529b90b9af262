//! Dense complex linear algebra on operator windows.

mod eig;
mod lu;
mod matrix;
mod qr;
mod spectral;
pub(crate) mod svd;

pub use eig::{eig_oracle, EIG_ORACLE_MAX_DIM};
pub use lu::{solve, Lu, PIVOT_FLOOR};
pub use matrix::{vec_dot, vec_norm, DenseMatrix};
pub use qr::Qr;
pub use spectral::{
    gamma, gamma_from_singular_values, norm2, smallest_singular_value, smallest_singular_value_with, spectral_radius,
    GammaEstimate, SpectralEstimate, DEFAULT_MAXIT, DEFAULT_RANK_TOL,
};
pub use svd::{bidiagonalize, sigma_max, singular_values, Bidiagonal};
