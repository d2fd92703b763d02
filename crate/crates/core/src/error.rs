use crate::element::Point;
use thiserror::Error;

/// Errors produced by element construction and semigroup operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("base set size must be positive")]
    InvalidSize,
    #[error("duplicate domain point {0}")]
    DuplicateDomain(Point),
    #[error("duplicate image point {0}")]
    DuplicateImage(Point),
    #[error("point {point} out of range 1..={n}")]
    OutOfRange { point: Point, n: usize },
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("{quantity} {value} exceeds cap {cap}")]
    CapExceeded {
        quantity: &'static str,
        value: usize,
        cap: usize,
    },
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("not an idempotent of the sandwich semigroup: {0}")]
    NotIdempotent(String),
    #[error("element of rank {rank} is indecomposable when k = {k}")]
    Indecomposable { rank: usize, k: usize },
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("class permutation moves an element out of its class: {0}")]
    CrossClassMove(String),
    #[error("degenerate context (k = 0): {0}")]
    DegenerateContext(&'static str),
    #[error("not a verified automorphism: {0}")]
    NotAutomorphism(String),
}

pub type Result<T> = std::result::Result<T, Error>;
