use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} limited to n <= {limit}, got n = {n}")]
    CapExceeded {
        what: &'static str,
        n: usize,
        limit: usize,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("stability certificate fails on vertex subset {subset:#b}: pair energy {energy} < -{budget}")]
    StabilityCertificate { subset: u64, energy: f64, budget: f64 },
    #[error("integral diverges: {0}")]
    Diverges(String),
    #[error("x = {0} is outside the principal branch of w e^-w = x (need 0 <= x < 1/e)")]
    OutOfBranch(f64),
    #[error("unknown name: {0}")]
    UnknownName(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
