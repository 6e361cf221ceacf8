use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("not a standard dyadic partition: {0}")]
    InvalidPartition(String),
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("index {index} out of range 1..={bound}")]
    OutOfRange { index: usize, bound: usize },
    #[error("not a permutation: {0}")]
    NotAPermutation(String),
    #[error("cylinders overlap: {0}")]
    Overlap(String),
    #[error("no element of V maps C_{from} onto C_{to}")]
    Unsatisfiable { from: String, to: String },
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("not a homomorphism: {0}")]
    NotAHomomorphism(String),
    #[error("contexts differ")]
    ContextMismatch,
    #[error("element is not central: {0}")]
    NotCentral(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("extraction failed: {0}")]
    Extraction(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
