use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A [`crate::ModularParams`] or configuration invariant failed.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// More derivatives or a longer truncation than the evaluator supports.
    #[error("capability exceeded: requested order {requested}, maximum {max}")]
    Capability { requested: usize, max: usize },

    /// A theta factor in a denominator (or a pole of `θ'/θ`, `℘`) is too close
    /// to the lattice.
    #[error("singular: {factor} vanishes at {arg} (lattice distance {distance:.3e})")]
    Singular {
        factor: String,
        arg: Complex64,
        distance: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    /// The validity window of a truncated series does not reach the
    /// coefficient that was asked for.
    #[error("precision error: {0}")]
    Precision(String),

    #[error("ill-conditioned system: condition number {condition:.3e} exceeds {threshold:.1e}")]
    Conditioning { condition: f64, threshold: f64 },

    #[error("bad site index {site} for an operator on {sites} sites")]
    BadSite { site: usize, sites: usize },
}

impl Error {
    pub fn is_singular(&self) -> bool {
        matches!(self, Error::Singular { .. })
    }
}
