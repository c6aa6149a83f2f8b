use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two grid-sampled inputs do not share a grid.
    #[error("grid mismatch: expected {expected} cells, found {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("configuration error: {0}")]
    Config(String),

    /// A Monte Carlo check was requested with too few samples to mean anything.
    #[error("underpowered: {what} needs at least {required}, got {got}")]
    Underpowered {
        what: &'static str,
        required: usize,
        got: usize,
    },

    /// A path produced a non-finite value.
    #[error(
        "numerical blowup on path {path_index} (seed {master_seed}) at step {step}: recent sup-norms {sup_norm_tail:?}"
    )]
    NumericalBlowup {
        master_seed: u64,
        path_index: u64,
        step: u64,
        sup_norm_tail: Vec<f64>,
    },

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub(crate) fn check_grid(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::GridMismatch { expected, found })
    }
}
