//! Conversions between the three storage formats.
//!
//! COO <-> CSC touch only the `columns`/`col_offsets` arrays and run in
//! O(N + n_cols); the element values and row indices carry over unchanged.
//! CSC <-> RBT encode and decode the linear column-major index and run in
//! O(N log N) worst case, with CSC -> RBT taking the append fast path for
//! every node because CSC iteration order is already increasing-index order.
//!
//! All conversions are pure: the input stays valid and untouched. Debug
//! builds audit every conversion output against the full format invariants.

use crate::instrument;
use crate::storage::{linear_index, CooStorage, CscStorage, RbtStorage};

/// COO -> CSC. Counts the entries per column, then prefix-sums the counts
/// into offsets; `values` and `rows` are carried over unchanged.
pub fn coo_to_csc(coo: &CooStorage) -> CscStorage {
    let n_cols = coo.n_cols();
    let mut col_offsets = vec![0usize; n_cols + 1];
    let mut writes = 0u64;
    for &col in coo.columns() {
        col_offsets[col + 1] += 1;
        writes += 1;
    }
    for col in 1..=n_cols {
        col_offsets[col] += col_offsets[col - 1];
    }
    instrument::record_convert_writes(writes);
    CscStorage::from_parts_unchecked(
        coo.n_rows(),
        n_cols,
        coo.values().to_vec(),
        coo.rows().to_vec(),
        col_offsets,
    )
}

/// CSC -> COO. Unpacks `col_offsets` into an explicit `columns` array of
/// length N; `values` and `rows` are carried over unchanged.
pub fn csc_to_coo(csc: &CscStorage) -> CooStorage {
    let n = csc.n_nonzero();
    let mut columns = vec![0usize; n];
    let mut writes = 0u64;
    let mut k = 0;
    for col in 0..csc.n_cols() {
        let span = csc.col_range(col).len();
        for slot in &mut columns[k..k + span] {
            *slot = col;
            writes += 1;
        }
        k += span;
    }
    instrument::record_convert_writes(writes);
    CooStorage::from_parts_unchecked(
        csc.n_rows(),
        csc.n_cols(),
        csc.values().to_vec(),
        csc.rows().to_vec(),
        columns,
    )
}

/// CSC -> RBT. Encodes each element location as a linear index and inserts
/// it; the column-major iteration order means every insertion appends past
/// the previous maximum, so the placement search is skipped for all N nodes.
pub fn csc_to_rbt(csc: &CscStorage) -> RbtStorage {
    let n_rows = csc.n_rows();
    let mut tree = RbtStorage::new(n_rows, csc.n_cols());
    for col in 0..csc.n_cols() {
        let range = csc.col_range(col);
        for slot in range {
            let index = linear_index(csc.rows()[slot], col, n_rows);
            tree.insert(index, csc.values()[slot])
                .expect("encoded index is in bounds by construction");
        }
    }
    #[cfg(debug_assertions)]
    if let Err(msg) = tree.check_invariants() {
        panic!("csc_to_rbt produced an invalid tree: {msg}");
    }
    tree
}

/// RBT -> CSC. An in-order traversal visits elements in column-major order,
/// so the value and row arrays fill sequentially while per-column counts
/// accumulate; a final prefix sum turns the counts into offsets. Arrays are
/// allocated at exactly N: conversion is the natural compaction point.
pub fn rbt_to_csc(rbt: &RbtStorage) -> CscStorage {
    let n = rbt.n_nonzero();
    let n_rows = rbt.n_rows() as u64;
    let n_cols = rbt.n_cols();
    let mut col_offsets = vec![0usize; n_cols + 1];
    // Indices arrive strictly increasing, so `index mod n_rows` and
    // `index div n_rows` reduce to stepping a column base forward; the
    // stepping loop advances at most n_cols times across the whole sweep.
    let mut col = 0usize;
    let mut col_base = 0u64;
    let (values, rows) = if let Some(pairs) = rbt.sorted_arena_pairs() {
        // Append-ordered tree: the arena is already the in-order sequence,
        // so values copy over in one exact-size pass.
        let values: Vec<f64> = pairs.map(|(_, value)| value).collect();
        let mut rows = Vec::with_capacity(n);
        for (index, _) in rbt.sorted_arena_pairs().expect("still append-ordered") {
            while index - col_base >= n_rows {
                col += 1;
                col_base += n_rows;
            }
            rows.push((index - col_base) as usize);
            col_offsets[col + 1] += 1;
        }
        instrument::record_rbt_traversal_steps(n as u64);
        (values, rows)
    } else {
        let mut values = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n);
        rbt.for_each_in_order(&mut |index, value| {
            while index - col_base >= n_rows {
                col += 1;
                col_base += n_rows;
            }
            values.push(value);
            rows.push((index - col_base) as usize);
            col_offsets[col + 1] += 1;
        });
        (values, rows)
    };
    for col in 1..=n_cols {
        col_offsets[col] += col_offsets[col - 1];
    }
    CscStorage::from_parts_unchecked(rbt.n_rows(), n_cols, values, rows, col_offsets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_coo() -> CooStorage {
        CooStorage::from_triplets(
            5,
            4,
            &[
                (1, 0, 9.0),
                (0, 1, 8.0),
                (3, 1, 7.0),
                (1, 2, 6.0),
                (2, 2, 5.0),
                (4, 3, 4.0),
            ],
        )
        .unwrap()
    }

    fn example_csc() -> CscStorage {
        CscStorage::from_parts(
            5,
            4,
            vec![9.0, 8.0, 7.0, 6.0, 5.0, 4.0],
            vec![1, 0, 3, 1, 2, 4],
            vec![0, 1, 3, 5, 6],
        )
        .unwrap()
    }

    #[test]
    fn coo_to_csc_builds_expected_offsets() {
        let csc = coo_to_csc(&example_coo());
        assert_eq!(csc.col_offsets(), &[0, 1, 3, 5, 6]);
        assert_eq!(csc.values(), example_coo().values());
        assert_eq!(csc.rows(), example_coo().rows());
        assert_eq!(instrument::convert_element_writes(), 6);
    }

    #[test]
    fn coo_to_csc_empty() {
        let csc = coo_to_csc(&CooStorage::new(5, 4));
        assert_eq!(csc.col_offsets(), &[0, 0, 0, 0, 0]);
        assert_eq!(csc.n_nonzero(), 0);
    }

    #[test]
    fn csc_to_coo_unpacks_columns() {
        let coo = csc_to_coo(&example_csc());
        assert_eq!(coo.columns(), &[0, 1, 1, 2, 2, 3]);
        assert_eq!(coo.values(), example_csc().values());
        assert_eq!(instrument::convert_element_writes(), 6);
    }

    #[test]
    fn csc_coo_round_trip() {
        let csc = example_csc();
        let back = coo_to_csc(&csc_to_coo(&csc));
        assert_eq!(back, csc);

        let empty = CscStorage::new(3, 7);
        assert_eq!(coo_to_csc(&csc_to_coo(&empty)), empty);
    }

    #[test]
    fn csc_to_rbt_is_all_fast_path() {
        let tree = csc_to_rbt(&example_csc());
        let pairs: Vec<_> = tree.iter().collect();
        assert_eq!(
            pairs,
            vec![
                (1, 9.0),
                (5, 8.0),
                (8, 7.0),
                (11, 6.0),
                (12, 5.0),
                (19, 4.0)
            ]
        );
        assert_eq!(tree.fast_path_inserts(), 6);

        let empty = csc_to_rbt(&CscStorage::new(5, 4));
        assert_eq!(empty.n_nonzero(), 0);
    }

    #[test]
    fn rbt_to_csc_matches_example_arrays() {
        let tree = csc_to_rbt(&example_csc());
        let csc = rbt_to_csc(&tree);
        assert_eq!(csc, example_csc());
        // Conversion compacts to exact size.
        assert_eq!(csc.capacity(), csc.n_nonzero());

        let empty = rbt_to_csc(&RbtStorage::new(5, 4));
        assert_eq!(empty.col_offsets(), &[0, 0, 0, 0, 0]);
    }

    #[test]
    fn csc_rbt_round_trip_bit_exact() {
        let csc = example_csc();
        let back = rbt_to_csc(&csc_to_rbt(&csc));
        assert_eq!(back.values().len(), csc.values().len());
        for (a, b) in back.values().iter().zip(csc.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.rows(), csc.rows());
        assert_eq!(back.col_offsets(), csc.col_offsets());
    }
}
