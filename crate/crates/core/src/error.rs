//! Error types shared across the crate.

use thiserror::Error;

/// Failure modes of construction, solvers, and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    /// Rejected input (bad parameter value, malformed grid, wrong shape).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// LAPACK/BLAS backend failure.
    #[error("linear algebra backend: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    /// Zero eigenvalue of the generator is not simple.
    #[error("steady state is not unique")]
    DegenerateSteadyState,

    /// An iterative solver ran out of iterations.
    #[error("no convergence: {0}")]
    Convergence(String),

    /// Step size collapsed below the resolvable limit at the given time.
    #[error("integration stalled at t = {0}")]
    Stiffness(f64),

    /// A state or result violated a structural invariant.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    /// Least-squares fit did not reach a usable minimum.
    #[error("fit failed with residual {residual}")]
    FitFailure { residual: f64 },

    /// Eigenvector basis is too ill-conditioned to use.
    #[error("defective spectrum: {0}")]
    Defective(String),

    /// A requested feature was not present in the scanned range.
    #[error("not found: {0}")]
    NotFound(String),

    /// The quantity is undefined for the supplied state.
    #[error("undefined measure: {0}")]
    UndefinedMeasure(String),

    /// Trajectory norm exceeded the divergence guard.
    #[error("trajectory blew up, norm {0}")]
    BlowUp(f64),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
