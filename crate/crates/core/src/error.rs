use thiserror::Error;

/// Error taxonomy shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Ill-formed inputs: layout mismatches, party collisions, bad wire
    /// references, non-qubit CNOT wires.
    #[error("structural error: {0}")]
    Structural(String),

    /// Arguments outside an operation's legal range (dimensions, indices,
    /// theorem ids).
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs that are formally well-typed but carry no usable content,
    /// e.g. normalizing a zero state.
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
}
