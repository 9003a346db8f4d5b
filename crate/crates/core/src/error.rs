//! Error types shared by every module of the simulation core.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A physical parameter is outside its admissible range (bad voltage,
    /// nonpositive pitch, duty outside (0,1), ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Two objects that must share a sampling grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The requested operation cannot be represented faithfully on the grid
    /// (undersampled grating period, unresolvable zone plate, aliasing kernel).
    #[error("sampling error: {0}")]
    Sampling(String),

    /// An analysis step failed (clipped integration region, empty annulus,
    /// too few sample radii, zero-power input).
    #[error("analysis error: {0}")]
    Analysis(String),

    /// The circulation around the requested circle did not round safely to an
    /// integer, or the circle crossed an amplitude null.
    #[error(
        "indeterminate winding: {reason}; residual {residual:.4}; try a different radius"
    )]
    IndeterminateWinding { reason: String, residual: f64 },

    /// Two diffraction orders transmit within the ambiguity threshold of each
    /// other; the candidates are reported highest first as (order, fraction).
    #[error("ambiguous sort: orders {:?} transmit within the ambiguity threshold", candidates)]
    AmbiguousSort { candidates: Vec<(i32, f64)> },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn sampling(msg: impl Into<String>) -> Self {
        Error::Sampling(msg.into())
    }
    pub fn analysis(msg: impl Into<String>) -> Self {
        Error::Analysis(msg.into())
    }
}
