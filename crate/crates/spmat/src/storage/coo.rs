//! Coordinate-list storage: one `(row, column, value)` triplet per non-zero
//! element, kept sorted in column-major order for efficient lookup.

use super::GROWTH_CHUNK;
use crate::error::{Error, Result};
use crate::instrument;

#[derive(Debug, Clone, PartialEq)]
pub struct CooStorage {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
    rows: Vec<usize>,
    columns: Vec<usize>,
}

impl CooStorage {
    /// An empty matrix of the given shape.
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            values: Vec::new(),
            rows: Vec::new(),
            columns: Vec::new(),
        }
    }

    /// Batch construction from arbitrary triplets. The input may be unsorted
    /// and may contain duplicates and zeros: entries are sorted column-major,
    /// the last occurrence of a duplicated position wins, and zeros are
    /// dropped after duplicate resolution.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut builder = CooBuilder::new(n_rows, n_cols);
        for &(row, col, value) in triplets {
            builder.push(row, col, value)?;
        }
        Ok(builder.finish())
    }

    /// Raw sorted arrays the caller guarantees are valid. Debug builds still
    /// run the full invariant audit.
    pub(crate) fn from_parts_unchecked(
        n_rows: usize,
        n_cols: usize,
        values: Vec<f64>,
        rows: Vec<usize>,
        columns: Vec<usize>,
    ) -> Self {
        if !values.is_empty() {
            instrument::record_matrix_alloc();
        }
        let coo = Self {
            n_rows,
            n_cols,
            values,
            rows,
            columns,
        };
        #[cfg(debug_assertions)]
        if let Err(msg) = coo.check_invariants() {
            panic!("invalid COO construction: {msg}");
        }
        coo
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

    pub fn capacity(&self) -> usize {
        self.values.capacity()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    /// Value at `(row, col)` by binary search over the sorted triplets.
    pub fn get(&self, row: usize, col: usize) -> Result<f64> {
        if row >= self.n_rows || col >= self.n_cols {
            return Err(Error::IndexOutOfBounds {
                row,
                col,
                n_rows: self.n_rows,
                n_cols: self.n_cols,
            });
        }
        let target = (col, row);
        let (mut lo, mut hi) = (0, self.values.len());
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if (self.columns[mid], self.rows[mid]) < target {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo < self.values.len() && (self.columns[lo], self.rows[lo]) == target {
            Ok(self.values[lo])
        } else {
            Ok(0.0)
        }
    }

    /// Ordered stream of `(row, col, value)` triplets.
    pub fn iter(&self) -> CooIter<'_> {
        CooIter { coo: self, pos: 0 }
    }

    /// Full structural audit; returns a description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.values.len() != self.rows.len() || self.values.len() != self.columns.len() {
            return Err("parallel array lengths differ".into());
        }
        for i in 0..self.values.len() {
            if self.rows[i] >= self.n_rows || self.columns[i] >= self.n_cols {
                return Err(format!(
                    "entry {} at ({}, {}) out of bounds",
                    i, self.rows[i], self.columns[i]
                ));
            }
            if self.values[i] == 0.0 {
                return Err(format!("explicit zero stored at entry {i}"));
            }
            if i > 0 {
                let prev = (self.columns[i - 1], self.rows[i - 1]);
                let cur = (self.columns[i], self.rows[i]);
                if prev >= cur {
                    return Err(format!("entries not strictly column-major sorted at {i}"));
                }
            }
        }
        Ok(())
    }
}

/// Triplet iterator over COO storage, already in column-major order.
pub struct CooIter<'a> {
    coo: &'a CooStorage,
    pos: usize,
}

impl Iterator for CooIter<'_> {
    type Item = (usize, usize, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.pos >= self.coo.values.len() {
            return None;
        }
        let i = self.pos;
        self.pos += 1;
        Some((self.coo.rows[i], self.coo.columns[i], self.coo.values[i]))
    }
}

/// Incremental COO assembly with chunked array growth. Entries may arrive in
/// any order; [`CooBuilder::finish`] sorts, resolves duplicates (last wins)
/// and drops zeros to produce valid storage.
#[derive(Debug)]
pub struct CooBuilder {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
    rows: Vec<usize>,
    columns: Vec<usize>,
    sorted: bool,
}

impl CooBuilder {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            values: Vec::new(),
            rows: Vec::new(),
            columns: Vec::new(),
            sorted: true,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Appends one triplet, growing the arrays by [`GROWTH_CHUNK`] slots when
    /// full.
    pub fn push(&mut self, row: usize, col: usize, value: f64) -> Result<()> {
        if row >= self.n_rows || col >= self.n_cols {
            return Err(Error::TripletOutOfBounds {
                row,
                col,
                value,
                n_rows: self.n_rows,
                n_cols: self.n_cols,
            });
        }
        if self.values.len() == self.values.capacity() {
            instrument::record_matrix_alloc();
            self.values.reserve_exact(GROWTH_CHUNK);
            self.rows.reserve_exact(GROWTH_CHUNK);
            self.columns.reserve_exact(GROWTH_CHUNK);
        }
        if let (Some(&last_col), Some(&last_row)) = (self.columns.last(), self.rows.last()) {
            if (last_col, last_row) >= (col, row) {
                self.sorted = false;
            }
        }
        self.values.push(value);
        self.rows.push(row);
        self.columns.push(col);
        Ok(())
    }

    /// Sorts (when needed), applies last-occurrence-wins duplicate resolution,
    /// drops zeros and returns the finished storage.
    pub fn finish(self) -> CooStorage {
        let CooBuilder {
            n_rows,
            n_cols,
            values,
            rows,
            columns,
            sorted,
        } = self;

        let mut order: Vec<usize> = (0..values.len()).collect();
        if !sorted {
            // Stable sort keeps duplicate positions in push order, so the
            // last pushed entry for a position is the last within its run.
            order.sort_by_key(|&i| (columns[i], rows[i]));
        }

        let mut out_values = Vec::with_capacity(values.len());
        let mut out_rows = Vec::with_capacity(values.len());
        let mut out_columns = Vec::with_capacity(values.len());
        let mut i = 0;
        while i < order.len() {
            let mut last = order[i];
            let key = (columns[last], rows[last]);
            while i + 1 < order.len() {
                let next = order[i + 1];
                if (columns[next], rows[next]) != key {
                    break;
                }
                last = next;
                i += 1;
            }
            if values[last] != 0.0 {
                out_values.push(values[last]);
                out_rows.push(rows[last]);
                out_columns.push(columns[last]);
            }
            i += 1;
        }

        CooStorage::from_parts_unchecked(n_rows, n_cols, out_values, out_rows, out_columns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_triplets() -> Vec<(usize, usize, f64)> {
        vec![
            (1, 0, 9.0),
            (0, 1, 8.0),
            (3, 1, 7.0),
            (1, 2, 6.0),
            (2, 2, 5.0),
            (4, 3, 4.0),
        ]
    }

    #[test]
    fn from_shuffled_triplets_matches_example_arrays() {
        let mut triplets = example_triplets();
        triplets.reverse();
        triplets.swap(1, 4);
        let coo = CooStorage::from_triplets(5, 4, &triplets).unwrap();
        assert_eq!(coo.values(), &[9.0, 8.0, 7.0, 6.0, 5.0, 4.0]);
        assert_eq!(coo.rows(), &[1, 0, 3, 1, 2, 4]);
        assert_eq!(coo.columns(), &[0, 1, 1, 2, 2, 3]);
    }

    #[test]
    fn duplicate_then_zero_drops_entry() {
        let coo = CooStorage::from_triplets(2, 2, &[(0, 0, 5.0), (0, 0, 0.0)]).unwrap();
        assert_eq!(coo.n_nonzero(), 0);
    }

    #[test]
    fn last_duplicate_wins() {
        let coo =
            CooStorage::from_triplets(2, 2, &[(0, 0, 5.0), (1, 1, 2.0), (0, 0, 3.0)]).unwrap();
        assert_eq!(coo.n_nonzero(), 2);
        assert_eq!(coo.get(0, 0).unwrap(), 3.0);
    }

    #[test]
    fn empty_input() {
        let coo = CooStorage::from_triplets(5, 4, &[]).unwrap();
        assert_eq!(coo.n_nonzero(), 0);
        assert!(coo.values().is_empty());
    }

    #[test]
    fn out_of_bounds_triplet_reported() {
        let err = CooStorage::from_triplets(2, 2, &[(0, 0, 1.0), (2, 1, 5.0)]).unwrap_err();
        match err {
            Error::TripletOutOfBounds {
                row, col, value, ..
            } => {
                assert_eq!((row, col, value), (2, 1, 5.0));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn get_finds_stored_and_missing() {
        let coo = CooStorage::from_triplets(5, 4, &example_triplets()).unwrap();
        assert_eq!(coo.get(3, 1).unwrap(), 7.0);
        assert_eq!(coo.get(0, 0).unwrap(), 0.0);
        assert!(coo.get(9, 0).is_err());
    }
}
