//! Error type shared across the crate.
//!
//! Variants are grouped by how a caller should react: invalid requests
//! (`InvalidArgument`, `OutOfDomain`, `UnderDetermined`), numerical
//! failures (`Singular`, `Diverged`) and data ingestion problems
//! (`Parse`, `Io`). The CLI maps these groups onto distinct exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A request that can never succeed, e.g. `alpha` outside [0, 1].
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Evaluation outside the model's knot span.
    #[error("x = {x} lies outside the model domain [{lo}, {hi}])")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    /// A least-squares segment with fewer samples than coefficients.
    #[error("segment {segment} is under-determined: {samples} samples for {unknowns} coefficients")]
    UnderDetermined {
        segment: usize,
        samples: usize,
        unknowns: usize,
    },

    /// A linear solve that failed or produced an unusable result.
    #[error("linear solve failed: {0}")]
    Singular(String),

    /// Training reached a non-finite loss.
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },

    /// Malformed input data; `line` is 1-based within the source file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
