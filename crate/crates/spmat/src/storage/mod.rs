//! The three underlying storage formats: compressed sparse column, coordinate
//! list, and a red-black tree keyed by linear element index.
//!
//! Each format owns its data outright and maintains its own invariants; the
//! hybrid layer decides which one is authoritative at any given time.

mod coo;
mod csc;
mod rbt;

pub use coo::{CooBuilder, CooIter, CooStorage};
pub use csc::{CscIter, CscStorage};
pub use rbt::{RbtIter, RbtStorage};

/// Oversized storage for CSC and COO grows in fixed chunks of this many
/// element slots, trading a bounded amount of slack for fewer reallocations
/// during element insertion.
pub const GROWTH_CHUNK: usize = 1024;

/// Column-major linear index of a matrix position.
#[inline]
pub fn linear_index(row: usize, col: usize, n_rows: usize) -> u64 {
    row as u64 + col as u64 * n_rows as u64
}

/// Inverse of [`linear_index`]: recovers `(row, col)`.
#[inline]
pub fn decode_index(index: u64, n_rows: usize) -> (usize, usize) {
    (
        (index % n_rows as u64) as usize,
        (index / n_rows as u64) as usize,
    )
}
