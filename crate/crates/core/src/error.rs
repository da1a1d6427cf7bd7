use thiserror::Error;

/// Errors raised by network construction and simulation setup.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(
        "cannot place {requested} distinct shortcuts: only {available} non-ring pairs touch a hub"
    )]
    InfeasibleShortcuts { requested: usize, available: usize },

    #[error(
        "shortcut sampling gave up after {failures} consecutive rejected draws \
         ({placed} of {requested} shortcuts placed)"
    )]
    SamplingStalled {
        failures: usize,
        placed: usize,
        requested: usize,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
