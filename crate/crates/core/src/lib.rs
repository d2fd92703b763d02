//! Algebra of the finite symmetric inverse semigroup and its sandwich
//! variants: elements, sandwich products, the idempotent lattice,
//! congruence classes, and the automorphism group with its semidirect
//! factorization.

pub mod aut;
pub mod cayley;
pub mod congruence;
pub mod element;
pub mod perm;
pub mod sandwich;
pub mod error;

pub use element::{enumerate_all, random_element, PartialInjection, Point, PointSet};
pub use error::{Error, Result};
