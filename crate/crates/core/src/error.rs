//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid stable graph: {}", .0.join("; "))]
    InvalidGraph(Vec<String>),
    #[error("space mismatch: {0}")]
    Space(String),
    #[error("class is not of top degree: expected {expected}, found {found}")]
    NotTopDegree { expected: u32, found: u32 },
    #[error("unstable moduli space (g={g}, n={n})")]
    Unstable { g: u32, n: u32 },
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("missing cycle database entry for {0}")]
    MissingDb(String),
    #[error("degenerate pairing: {0}")]
    DegeneratePairing(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("inconsistent linear system")]
    Inconsistent,
}

pub type Result<T> = std::result::Result<T, Error>;
