use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForgeError {
    #[error("invalid arity: {0}")]
    InvalidArity(String),
    #[error("invalid signature (p = {p}, q = {q})")]
    InvalidSignature { p: usize, q: usize },
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("no spatial leaf labelled {0}")]
    MissingLeaf(u32),
    #[error("no planar leaf at position {0}")]
    MissingPlanarLeaf(usize),
    #[error("colour mismatch: {0}")]
    ColourMismatch(String),
    #[error("formal sum mixes degrees {0} and {1}")]
    MixedDegree(i64, i64),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("word of length {len} exceeds the truncation bound {max}")]
    WordTooLong { len: usize, max: usize },
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, ForgeError>;
