//! Compressed sparse column storage.
//!
//! Non-zero elements are stored column by column in three arrays: `values`
//! holds the elements, `rows` the matching row indices, and `col_offsets`
//! (length `n_cols + 1`) the start of each column within the other two.
//! `col_offsets[0]` is always 0 and `col_offsets[n_cols]` equals the number
//! of stored elements. Row indices within a column are strictly increasing,
//! and no explicit zeros are ever stored.

use super::GROWTH_CHUNK;
use crate::error::{Error, Result};
use crate::instrument;

#[derive(Debug, Clone, PartialEq)]
pub struct CscStorage {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
    rows: Vec<usize>,
    col_offsets: Vec<usize>,
}

impl CscStorage {
    /// An empty matrix of the given shape.
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            values: Vec::new(),
            rows: Vec::new(),
            col_offsets: vec![0; n_cols + 1],
        }
    }

    /// An empty matrix with room for `capacity` elements before the first
    /// chunked regrowth.
    pub fn with_capacity(n_rows: usize, n_cols: usize, capacity: usize) -> Self {
        if capacity > 0 {
            instrument::record_matrix_alloc();
        }
        Self {
            n_rows,
            n_cols,
            values: Vec::with_capacity(capacity),
            rows: Vec::with_capacity(capacity),
            col_offsets: vec![0; n_cols + 1],
        }
    }

    /// Builds storage from raw arrays, validating every invariant.
    pub fn from_parts(
        n_rows: usize,
        n_cols: usize,
        values: Vec<f64>,
        rows: Vec<usize>,
        col_offsets: Vec<usize>,
    ) -> Result<Self> {
        let csc = Self {
            n_rows,
            n_cols,
            values,
            rows,
            col_offsets,
        };
        csc.check_invariants().map_err(Error::InvalidStorage)?;
        if !csc.values.is_empty() {
            instrument::record_matrix_alloc();
        }
        Ok(csc)
    }

    /// Builds storage from raw arrays the caller guarantees are valid.
    /// Debug builds still run the full invariant audit.
    pub(crate) fn from_parts_unchecked(
        n_rows: usize,
        n_cols: usize,
        values: Vec<f64>,
        rows: Vec<usize>,
        col_offsets: Vec<usize>,
    ) -> Self {
        if !values.is_empty() {
            instrument::record_matrix_alloc();
        }
        let csc = Self {
            n_rows,
            n_cols,
            values,
            rows,
            col_offsets,
        };
        #[cfg(debug_assertions)]
        if let Err(msg) = csc.check_invariants() {
            panic!("invalid CSC construction: {msg}");
        }
        csc
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_nonzero(&self) -> usize {
        self.values.len()
    }

    /// Allocated slots in the element arrays; at least `n_nonzero`.
    pub fn capacity(&self) -> usize {
        self.values.capacity()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn col_offsets(&self) -> &[usize] {
        &self.col_offsets
    }

    /// The `[start, end)` range of element slots belonging to `col`.
    #[inline]
    pub fn col_range(&self, col: usize) -> std::ops::Range<usize> {
        self.col_offsets[col]..self.col_offsets[col + 1]
    }

    fn check_bounds(&self, row: usize, col: usize) -> Result<()> {
        if row >= self.n_rows || col >= self.n_cols {
            return Err(Error::IndexOutOfBounds {
                row,
                col,
                n_rows: self.n_rows,
                n_cols: self.n_cols,
            });
        }
        Ok(())
    }

    /// Value at `(row, col)`, or zero if the position is not stored.
    /// Locates the column in O(1), then binary-searches its row indices.
    pub fn get(&self, row: usize, col: usize) -> Result<f64> {
        self.check_bounds(row, col)?;
        let range = self.col_range(col);
        match self.rows[range.clone()].binary_search(&row) {
            Ok(pos) => Ok(self.values[range.start + pos]),
            Err(_) => Ok(0.0),
        }
    }

    /// Sets `(row, col)` to `value`, keeping all arrays sorted and packed.
    /// A zero value removes the element; existing elements shift as needed,
    /// and full arrays grow by a fixed chunk of [`GROWTH_CHUNK`] slots.
    pub fn insert(&mut self, row: usize, col: usize, value: f64) -> Result<()> {
        self.check_bounds(row, col)?;
        let range = self.col_range(col);
        match self.rows[range.clone()].binary_search(&row) {
            Ok(pos) => {
                let slot = range.start + pos;
                if value == 0.0 {
                    self.values.remove(slot);
                    self.rows.remove(slot);
                    for offset in &mut self.col_offsets[col + 1..] {
                        *offset -= 1;
                    }
                } else {
                    self.values[slot] = value;
                }
            }
            Err(pos) => {
                if value == 0.0 {
                    return Ok(());
                }
                let slot = range.start + pos;
                if self.values.len() == self.values.capacity() {
                    instrument::record_matrix_alloc();
                    self.values.reserve_exact(GROWTH_CHUNK);
                    self.rows.reserve_exact(GROWTH_CHUNK);
                }
                self.values.insert(slot, value);
                self.rows.insert(slot, row);
                for offset in &mut self.col_offsets[col + 1..] {
                    *offset += 1;
                }
            }
        }
        Ok(())
    }

    /// Ordered stream of `(row, col, value)` triplets in column-major order.
    pub fn iter(&self) -> CscIter<'_> {
        CscIter {
            csc: self,
            col: 0,
            slot: 0,
        }
    }

    /// Full structural audit; returns a description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.col_offsets.len() != self.n_cols + 1 {
            return Err(format!(
                "col_offsets length {} != n_cols + 1 = {}",
                self.col_offsets.len(),
                self.n_cols + 1
            ));
        }
        if self.col_offsets[0] != 0 {
            return Err(format!(
                "col_offsets[0] = {}, expected 0",
                self.col_offsets[0]
            ));
        }
        if self.values.len() != self.rows.len() {
            return Err("values and rows lengths differ".into());
        }
        if self.col_offsets[self.n_cols] != self.values.len() {
            return Err(format!(
                "col_offsets[n_cols] = {} != N = {}",
                self.col_offsets[self.n_cols],
                self.values.len()
            ));
        }
        for col in 0..self.n_cols {
            let (start, end) = (self.col_offsets[col], self.col_offsets[col + 1]);
            if start > end {
                return Err(format!("col_offsets decreases at column {col}"));
            }
            for slot in start..end {
                if self.rows[slot] >= self.n_rows {
                    return Err(format!(
                        "row index {} out of bounds in column {col}",
                        self.rows[slot]
                    ));
                }
                if slot > start && self.rows[slot] <= self.rows[slot - 1] {
                    return Err(format!(
                        "row indices not strictly increasing in column {col}"
                    ));
                }
                if self.values[slot] == 0.0 {
                    return Err(format!("explicit zero stored at slot {slot}"));
                }
            }
        }
        Ok(())
    }
}

/// Column-major triplet iterator over CSC storage.
pub struct CscIter<'a> {
    csc: &'a CscStorage,
    col: usize,
    slot: usize,
}

impl Iterator for CscIter<'_> {
    type Item = (usize, usize, f64);

    fn next(&mut self) -> Option<Self::Item> {
        while self.col < self.csc.n_cols {
            if self.slot < self.csc.col_offsets[self.col + 1] {
                let item = (
                    self.csc.rows[self.slot],
                    self.col,
                    self.csc.values[self.slot],
                );
                self.slot += 1;
                return Some(item);
            }
            self.col += 1;
        }
        None
    }
}
