use thiserror::Error;

/// Errors produced by the forward solvers and the inversion pipelines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration failed near r = {radius}: {reason}")]
    Integration { radius: f64, reason: String },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("turning point is not unique: sign changes bracketed by {brackets:?}")]
    NonUniqueTurningPoint { brackets: Vec<(f64, f64)> },

    #[error("line is undersampled: {points} points, need at least {needed}")]
    Resolution { points: usize, needed: usize },

    #[error("sequence is not monotone near index {index}: {reason}")]
    NonMonotone { index: usize, reason: String },

    #[error("reconstruction failed at r = {location}: {reason}")]
    Reconstruction { location: f64, reason: String },

    #[error("data does not cover the required range: {0}")]
    Coverage(String),

    #[error("truncated tail contributes {relative:.3e} of the result (limit 0.1)")]
    Truncation { relative: f64 },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Wraps an error with the name of the pipeline stage that raised it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Name of the innermost pipeline stage, if the error was tagged with one.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, source } => source.stage().or(Some(stage)),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
