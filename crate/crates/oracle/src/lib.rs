//! Ground truth for finite magmas given only their multiplication
//! tables: automorphism enumeration and counting, and isomorphism
//! search, by partition refinement plus backtracking with forward
//! propagation. Nothing in this crate knows where a table came from,
//! which is what makes its answers independent evidence.

mod search;
mod table;

pub use search::{
    count_automorphisms, for_each_automorphism, is_automorphism, is_isomorphism,
    magma_automorphisms, magma_isomorphic, refined_colors,
};
pub use table::{CayleyTable, MAX_TABLE_SIZE};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("table has no elements")]
    EmptyTable,
    #[error("table has {size} elements, cap is {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("row {row} has {len} entries, expected {expected}")]
    RaggedRow { row: usize, len: usize, expected: usize },
    #[error("entry {value} at row {row}, column {col} is out of range for size {size}")]
    EntryOutOfRange { row: usize, col: usize, value: usize, size: usize },
    #[error("{found} labels for {size} elements")]
    LabelCount { size: usize, found: usize },
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
