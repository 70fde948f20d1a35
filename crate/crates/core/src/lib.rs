//! Tree and ideal constructions for algebraic sums in ℤ^ω, evaluated on
//! finite windows.

pub mod bench;
pub mod error;
pub mod escape;
pub mod ideals;
pub mod ledger;
pub mod seq;
pub mod shrink;
pub mod trees;
pub mod words;

pub use error::{Error, Result};
