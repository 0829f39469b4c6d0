use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Im(z) must be positive (got {0})")]
    NotInUpperHalfPlane(f64),

    #[error("convergence budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("logarithmic singularity: path passes through zero at index {0}")]
    PathThroughZero(usize),

    #[error("path insufficiently refined between indices {0} and {1} (argument step >= pi/2)")]
    PathTooCoarse(usize, usize),

    #[error("zero argument has no logarithm or half power")]
    ZeroArgument,

    #[error("point outside domain: {0}")]
    OutsideDomain(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("quadrature node within {distance:.3e} of a singularity of the form")]
    NearSingularity { distance: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("function is not pluriharmonic: residual {residual:.3e} exceeds {tolerance:.1e}")]
    NotPluriharmonic { residual: f64, tolerance: f64 },

    #[error("matrix (tau(z) - conj(tau(conj w)))/2i is singular: |det| = {0:.3e}")]
    SingularMatrix(f64),

    #[error("insufficient samples/dispersion: {0}")]
    InsufficientSamples(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
