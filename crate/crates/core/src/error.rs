use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("division by zero while evaluating at z = {z}")]
    DivisionByZero { z: Complex64 },

    #[error("non-finite value encountered at z = {z}")]
    NonFinite { z: Complex64 },

    #[error("quadrature did not converge for the segment ending at z = {z}")]
    QuadratureFailed { z: Complex64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point z = {z} lies outside the domain")]
    OutsideDomain { z: Complex64 },

    #[error("grid too small: {rows}x{cols} (need at least 2x2)")]
    GridTooSmall { rows: usize, cols: usize },

    #[error("finite-difference stencil around z = {z} leaves the domain")]
    StencilOutOfDomain { z: Complex64 },

    #[error("singular point at z = {z}: {reason}")]
    SingularPoint { z: Complex64, reason: String },

    #[error("degenerate differential at z = {z}")]
    DegenerateDifferential { z: Complex64 },

    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("interpolation error: {0}")]
    Interpolation(String),

    #[error(
        "surface is not pseudoholomorphic to tolerance: |G_(n+1)|/|G_n| = {residual:e} at z = {z} exceeds {tolerance:e}"
    )]
    NotPseudoholomorphic {
        z: Complex64,
        residual: f64,
        tolerance: f64,
    },
}
