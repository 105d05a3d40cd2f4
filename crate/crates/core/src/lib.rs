//! Non-stationary blind super-resolution from samples of modulated complex
//! exponentials.
//!
//! The observed samples are `y(n) = Σ_j c_j e^{-i2πnτ_j} g_j(n)` where both
//! the spike parameters `(τ_j, c_j)` and the per-spike waveforms `g_j` are
//! unknown, but every `g_j` lies in a known low-dimensional subspace spanned
//! by the columns of an `N×K` matrix `B`. Lifting the unknowns into the rank-J
//! matrix `X = Σ_j c_j h_j a(τ_j)^H` turns the measurements into linear
//! functionals of `X`, and the spikes can be recovered by minimizing the
//! atomic norm of `X` subject to data consistency.
//!
//! The crate provides:
//!
//! - [`model`]: the signal model, lifting, and the measurement operator with
//!   its adjoint;
//! - [`solver`]: an ADMM solver for the exact SDP reformulation of the atomic
//!   norm program, which also produces the dual optimizer;
//! - [`localize`]: support localization from the dual polynomial (grid search
//!   or polynomial rooting) and least-squares recovery of the amplitudes and
//!   waveform coefficients;
//! - [`certificate`]: numerical construction and validation of the
//!   interpolation-kernel dual certificate that underpins exact recovery;
//! - [`experiments`]: reproducible instance generation, Monte Carlo
//!   phase-transition sweeps, and the Gaussian-PSF PCA subspace pipeline.

pub mod certificate;
pub mod experiments;
pub mod localize;
pub mod model;
pub mod solver;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Mismatched dimensions between operands.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A parameter violates its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A linear system is too ill-conditioned to solve reliably.
    #[error("ill-conditioned system: condition number {cond:.3e} exceeds {limit:.3e}")]
    IllConditioned { cond: f64, limit: f64 },
    /// A numerical routine produced NaN/Inf or failed to converge internally.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    /// Random spike placement could not satisfy the separation constraint.
    #[error("separation rejection budget exhausted after {attempts} attempts")]
    SeparationRejection { attempts: usize },
}

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
