use thiserror::Error;

use crate::field::Grid2D;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: Grid2D, right: Grid2D },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("solver diverged at iteration {iteration}: energy {energy:e} exceeds 10 x F(0) = {reference:e}")]
    Divergence {
        iteration: usize,
        energy: f64,
        reference: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_same_grid(a: &Grid2D, b: &Grid2D) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch {
            left: *a,
            right: *b,
        })
    }
}
