use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("spectral function is not finite at eigenvalue {eigenvalue:e} (value {value})")]
    NonFiniteSpectralValue { eigenvalue: f64, value: f64 },

    #[error("value {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("margin too small for polynomial filter: gamma = {gamma:e} needs more than {cap} Newton-Schulz steps to reach {tol:e}")]
    DepthCapExceeded { gamma: f64, tol: f64, cap: usize },

    #[error("scaling violation: spectral radius of the scaled matrix is {radius}")]
    ScalingViolation { radius: f64 },

    #[error("shift on spectrum: eigenvalue {eigenvalue:e} is within {tol:e} of the shift")]
    ShiftOnSpectrum { eigenvalue: f64, tol: f64 },

    #[error("gap closed: lower endpoint {lower} is not below upper endpoint {upper}")]
    GapClosed { lower: f64, upper: f64 },

    #[error("degenerate target gap at k = {k}: ({lower}, {upper})")]
    DegenerateGap { k: usize, lower: f64, upper: f64 },

    #[error("target index {k} outside 1..={max}")]
    InvalidIndex { k: usize, max: usize },

    #[error("scaled eigenvalue {value} (from eigenvalue {eigenvalue}) outside design interval [-{half_width}, {half_width}]")]
    OutsideDesignInterval {
        eigenvalue: f64,
        value: f64,
        half_width: f64,
    },

    #[error("inferred target index {inferred} does not match declared index {declared}")]
    IndexMismatch { inferred: usize, declared: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("rank-deficient frame in retraction at column {column}")]
    RankDeficient { column: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
