//! Bridge from the sandwich semigroup to the table-only world: this is
//! the single place where elements are flattened to indices, so the
//! search engine downstream never sees any structure beyond the grid.

use magma_oracle::{CayleyTable, MAX_TABLE_SIZE};

use crate::element::{enumerate_all, universe_size, PartialInjection};
use crate::error::{Error, Result};
use crate::sandwich::{product_with, SandwichContext};

/// Multiplication table of the context's sandwich product over the
/// canonical element order, labelled by canonical strings.
pub fn cayley(ctx: &SandwichContext) -> Result<CayleyTable> {
    cayley_with(ctx.n(), ctx.e())
}

/// Multiplication table for the product through an arbitrary fixed
/// middle element, without normalizing it first. Same element order and
/// labels as `cayley`.
pub fn cayley_with(n: usize, middle: &PartialInjection) -> Result<CayleyTable> {
    if middle.n() != n {
        return Err(Error::SizeMismatch(middle.n(), n));
    }
    let m = universe_size(n);
    if m > MAX_TABLE_SIZE as u64 {
        return Err(Error::CapExceeded {
            quantity: "table size",
            value: m as usize,
            cap: MAX_TABLE_SIZE,
        });
    }
    let elements = enumerate_all(n)?;
    let index_of = |x: &PartialInjection| -> u16 {
        elements.binary_search(x).expect("products stay in the universe") as u16
    };
    let rows = elements
        .iter()
        .map(|a| {
            elements
                .iter()
                .map(|b| index_of(&product_with(middle, a, b).expect("sizes agree")))
                .collect()
        })
        .collect();
    let labels = elements.iter().map(PartialInjection::to_canonical_string).collect();
    let table = CayleyTable::with_labels(rows, labels)
        .expect("rows are square, entries in range, one label per element");
    Ok(table)
}
