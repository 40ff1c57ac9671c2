//! Eager linear-algebra kernels.
//!
//! Arithmetic kernels obtain a CSC view of their operands (borrowing when the
//! operand is already in CSC state, converting a temporary copy otherwise)
//! and produce CSC-state results; the bulk coordinate transform goes through
//! COO. Exact zeros arising from arithmetic are never stored. NaN and
//! infinity propagate by the usual floating-point rules, so a NaN sum is
//! stored even though it compares unequal to zero.
//!
//! The two fused kernels implement compound expressions in a single pass:
//! the trace of a transpose-product without materializing either the
//! transpose or the product, and the diagonal of a sum without performing
//! the full addition.

use crate::error::{Error, Result};
use crate::hybrid::SpMat;
use crate::instrument;
use crate::storage::{CooStorage, CscStorage};

/// Dense vector operand/result for vector-matrix products and reductions.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector {
    data: Vec<f64>,
}

impl DenseVector {
    pub fn zeros(len: usize) -> Self {
        if len > 0 {
            instrument::record_matrix_alloc();
        }
        Self {
            data: vec![0.0; len],
        }
    }

    pub fn from_vec(data: Vec<f64>) -> Self {
        if !data.is_empty() {
            instrument::record_matrix_alloc();
        }
        Self { data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl std::ops::Index<usize> for DenseVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

/// Axis selector for [`reverse`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Cols,
}

fn require_same_shape(op: &'static str, a: &SpMat, b: &SpMat) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            op,
            lhs_rows: a.n_rows(),
            lhs_cols: a.n_cols(),
            rhs_rows: b.n_rows(),
            rhs_cols: b.n_cols(),
        });
    }
    Ok(())
}

/// Multiplies every stored element by `k`. The sparsity pattern is unchanged
/// except that exact-zero products (all of them, when `k == 0`) are dropped.
pub fn scalar_mul(a: &SpMat, k: f64) -> SpMat {
    let csc = a.csc_view();
    let n = csc.n_nonzero();
    let mut values = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    let mut col_offsets = vec![0usize; csc.n_cols() + 1];
    for col in 0..csc.n_cols() {
        for slot in csc.col_range(col) {
            let product = csc.values()[slot] * k;
            if product != 0.0 {
                values.push(product);
                rows.push(csc.rows()[slot]);
            }
        }
        col_offsets[col + 1] = values.len();
    }
    SpMat::from_csc(CscStorage::from_parts_unchecked(
        csc.n_rows(),
        csc.n_cols(),
        values,
        rows,
        col_offsets,
    ))
}

/// Element-wise sum via a column-wise two-pointer merge. The sparsity
/// pattern of the result is computed in a first pass so the output arrays
/// can be allocated at their exact final size; the second pass fills them.
/// Exact-zero sums are dropped.
pub fn sp_add(a: &SpMat, b: &SpMat) -> Result<SpMat> {
    require_same_shape("sp_add", a, b)?;
    let ca = a.csc_view();
    let cb = b.csc_view();
    let n_cols = ca.n_cols();

    // Pass 1: per-column counts of surviving entries.
    let mut col_offsets = vec![0usize; n_cols + 1];
    for col in 0..n_cols {
        let mut count = 0usize;
        merge_columns(&ca, &cb, col, |_, sum| {
            if sum != 0.0 {
                count += 1;
            }
        });
        col_offsets[col + 1] = count;
    }
    for col in 1..=n_cols {
        col_offsets[col] += col_offsets[col - 1];
    }

    // Pass 2: fill the exactly-sized arrays.
    let n = col_offsets[n_cols];
    let mut values = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for col in 0..n_cols {
        merge_columns(&ca, &cb, col, |row, sum| {
            if sum != 0.0 {
                values.push(sum);
                rows.push(row);
            }
        });
    }
    Ok(SpMat::from_csc(CscStorage::from_parts_unchecked(
        ca.n_rows(),
        n_cols,
        values,
        rows,
        col_offsets,
    )))
}

/// Two-pointer merge of one column from each operand, calling `emit` with
/// `(row, sum)` for every position stored in either.
fn merge_columns(a: &CscStorage, b: &CscStorage, col: usize, mut emit: impl FnMut(usize, f64)) {
    let ra = a.col_range(col);
    let rb = b.col_range(col);
    let (a_rows, a_vals) = (&a.rows()[ra.clone()], &a.values()[ra]);
    let (b_rows, b_vals) = (&b.rows()[rb.clone()], &b.values()[rb]);
    let (mut i, mut j) = (0, 0);
    while i < a_rows.len() && j < b_rows.len() {
        match a_rows[i].cmp(&b_rows[j]) {
            std::cmp::Ordering::Less => {
                emit(a_rows[i], a_vals[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                emit(b_rows[j], b_vals[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                emit(a_rows[i], a_vals[i] + b_vals[j]);
                i += 1;
                j += 1;
            }
        }
    }
    while i < a_rows.len() {
        emit(a_rows[i], a_vals[i]);
        i += 1;
    }
    while j < b_rows.len() {
        emit(b_rows[j], b_vals[j]);
        j += 1;
    }
}

/// Sparse-sparse product using column-by-column accumulation: for each
/// column of `b`, the referenced columns of `a` are scaled and accumulated
/// into a dense workspace of `a.n_rows` slots tracked by an occupancy list.
/// Exact-zero results are dropped.
pub fn sp_mul(a: &SpMat, b: &SpMat) -> Result<SpMat> {
    if a.n_cols() != b.n_rows() {
        return Err(Error::DimensionMismatch {
            op: "sp_mul",
            lhs_rows: a.n_rows(),
            lhs_cols: a.n_cols(),
            rhs_rows: b.n_rows(),
            rhs_cols: b.n_cols(),
        });
    }
    let ca = a.csc_view();
    let cb = b.csc_view();
    let m = ca.n_rows();
    let n_cols = cb.n_cols();

    if m > 0 {
        instrument::record_matrix_alloc();
    }
    instrument::record_mul_workspace(m);
    let mut workspace = vec![0.0f64; m];
    let mut touched = vec![usize::MAX; m];
    let mut occupancy: Vec<usize> = Vec::new();

    let mut values = Vec::new();
    let mut rows = Vec::new();
    let mut col_offsets = vec![0usize; n_cols + 1];
    for col in 0..n_cols {
        occupancy.clear();
        for slot_b in cb.col_range(col) {
            let k = cb.rows()[slot_b];
            let scale = cb.values()[slot_b];
            for slot_a in ca.col_range(k) {
                let row = ca.rows()[slot_a];
                let contribution = ca.values()[slot_a] * scale;
                if touched[row] == col {
                    workspace[row] += contribution;
                } else {
                    touched[row] = col;
                    workspace[row] = contribution;
                    occupancy.push(row);
                }
            }
        }
        occupancy.sort_unstable();
        for &row in &occupancy {
            if workspace[row] != 0.0 {
                values.push(workspace[row]);
                rows.push(row);
            }
        }
        col_offsets[col + 1] = values.len();
    }
    Ok(SpMat::from_csc(CscStorage::from_parts_unchecked(
        m,
        n_cols,
        values,
        rows,
        col_offsets,
    )))
}

/// Row-vector times matrix: `out[j] = sum over stored (r, j, v) of in[r]*v`,
/// one pass over the CSC arrays.
pub fn vec_mat_mul(v: &DenseVector, a: &SpMat) -> Result<DenseVector> {
    if v.len() != a.n_rows() {
        return Err(Error::VectorLengthMismatch {
            op: "vec_mat_mul",
            len: v.len(),
            expected: a.n_rows(),
        });
    }
    let csc = a.csc_view();
    let mut out = vec![0.0f64; csc.n_cols()];
    for (col, slot_out) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for slot in csc.col_range(col) {
            acc += v.as_slice()[csc.rows()[slot]] * csc.values()[slot];
        }
        *slot_out = acc;
    }
    Ok(DenseVector::from_vec(out))
}

/// Transpose computed without sorting: count the entries of each input row,
/// prefix-sum the counts into output column offsets, then scatter every
/// element in one pass using a cursor per output column. O(N + rows + cols).
pub fn transpose_csc(a: &SpMat) -> SpMat {
    let csc = a.csc_view();
    let n = csc.n_nonzero();
    let (n_rows, n_cols) = (csc.n_rows(), csc.n_cols());

    let mut col_offsets = vec![0usize; n_rows + 1];
    for &row in csc.rows() {
        col_offsets[row + 1] += 1;
    }
    for r in 1..=n_rows {
        col_offsets[r] += col_offsets[r - 1];
    }

    let mut cursor: Vec<usize> = col_offsets[..n_rows].to_vec();
    let mut values = vec![0.0f64; n];
    let mut rows = vec![0usize; n];
    if n > 0 {
        instrument::record_matrix_alloc();
    }
    for col in 0..n_cols {
        for slot in csc.col_range(col) {
            let row = csc.rows()[slot];
            let pos = cursor[row];
            cursor[row] += 1;
            values[pos] = csc.values()[slot];
            rows[pos] = col;
        }
    }
    SpMat::from_csc(CscStorage::from_parts_unchecked(
        n_cols,
        n_rows,
        values,
        rows,
        col_offsets,
    ))
}

/// The COO-based transpose: swap the row and column arrays, then re-sort
/// into column-major order. Semantically identical to [`transpose_csc`] and
/// kept as its independent verification oracle.
pub fn transpose_coo_oracle(a: &SpMat) -> SpMat {
    let coo = a.coo_view();
    let mut triplets: Vec<(usize, usize, f64)> = coo
        .iter()
        .map(|(row, col, value)| (col, row, value))
        .collect();
    triplets.sort_unstable_by_key(|&(row, col, _)| (col, row));
    let mut values = Vec::with_capacity(triplets.len());
    let mut rows = Vec::with_capacity(triplets.len());
    let mut columns = Vec::with_capacity(triplets.len());
    for (row, col, value) in triplets {
        values.push(value);
        rows.push(row);
        columns.push(col);
    }
    let transposed =
        CooStorage::from_parts_unchecked(coo.n_cols(), coo.n_rows(), values, rows, columns);
    SpMat::from_csc(crate::convert::coo_to_csc(&transposed))
}

/// Sum of the main diagonal; rectangular matrices use the leading square.
pub fn trace(a: &SpMat) -> f64 {
    let csc = a.csc_view();
    let mut acc = 0.0;
    for i in 0..csc.n_rows().min(csc.n_cols()) {
        acc += csc.get(i, i).expect("diagonal position is in bounds");
    }
    acc
}

/// The main diagonal as a dense vector of length `min(n_rows, n_cols)`.
pub fn diag_extract(a: &SpMat) -> DenseVector {
    let csc = a.csc_view();
    let len = csc.n_rows().min(csc.n_cols());
    let mut out = vec![0.0f64; len];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = csc.get(i, i).expect("diagonal position is in bounds");
    }
    DenseVector::from_vec(out)
}

/// trace(Aᵀ·B) as the sum over columns of dot(a_col_j, b_col_j), computed by
/// per-column sorted merges. Neither the transpose nor the product is ever
/// materialized; the kernel performs no matrix-sized allocation at all.
pub fn trace_fused_atb(a: &SpMat, b: &SpMat) -> Result<f64> {
    require_same_shape("trace_fused_atb", a, b)?;
    let ca = a.csc_view();
    let cb = b.csc_view();
    let mut acc = 0.0;
    for col in 0..ca.n_cols() {
        let ra = ca.col_range(col);
        let rb = cb.col_range(col);
        let (a_rows, a_vals) = (&ca.rows()[ra.clone()], &ca.values()[ra]);
        let (b_rows, b_vals) = (&cb.rows()[rb.clone()], &cb.values()[rb]);
        let (mut i, mut j) = (0, 0);
        while i < a_rows.len() && j < b_rows.len() {
            match a_rows[i].cmp(&b_rows[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a_vals[i] * b_vals[j];
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    Ok(acc)
}

/// diagmat(A + B) without the full addition: the result is the square
/// diagonal matrix of size `min(n_rows, n_cols)` whose entry `(i, i)` is
/// `a(i,i) + b(i,i)`, obtained by two element lookups per diagonal position.
pub fn diagmat_fused_add(a: &SpMat, b: &SpMat) -> Result<SpMat> {
    require_same_shape("diagmat_fused_add", a, b)?;
    let ca = a.csc_view();
    let cb = b.csc_view();
    let dim = ca.n_rows().min(ca.n_cols());
    let mut values = Vec::new();
    let mut rows = Vec::new();
    let mut col_offsets = vec![0usize; dim + 1];
    for i in 0..dim {
        let sum = ca.get(i, i).expect("in bounds") + cb.get(i, i).expect("in bounds");
        if sum != 0.0 {
            values.push(sum);
            rows.push(i);
        }
        col_offsets[i + 1] = values.len();
    }
    Ok(SpMat::from_csc(CscStorage::from_parts_unchecked(
        dim,
        dim,
        values,
        rows,
        col_offsets,
    )))
}

/// Flips the matrix along `axis` via the COO representation: map each
/// coordinate, re-sort column-major, and return a COO-state matrix.
pub fn reverse(a: &SpMat, axis: Axis) -> SpMat {
    let coo = a.coo_view();
    let (n_rows, n_cols) = (coo.n_rows(), coo.n_cols());
    let mut triplets: Vec<(usize, usize, f64)> = coo
        .iter()
        .map(|(row, col, value)| match axis {
            Axis::Rows => (n_rows - 1 - row, col, value),
            Axis::Cols => (row, n_cols - 1 - col, value),
        })
        .collect();
    triplets.sort_unstable_by_key(|&(row, col, _)| (col, row));
    let mut values = Vec::with_capacity(triplets.len());
    let mut rows = Vec::with_capacity(triplets.len());
    let mut columns = Vec::with_capacity(triplets.len());
    for (row, col, value) in triplets {
        values.push(value);
        rows.push(row);
        columns.push(col);
    }
    SpMat::from_coo(CooStorage::from_parts_unchecked(
        n_rows, n_cols, values, rows, columns,
    ))
}

/// Per-column sums (`dim == 0`, length `n_cols`) or per-row sums
/// (`dim == 1`, length `n_rows`) in a single CSC pass.
pub fn sum_dim(a: &SpMat, dim: usize) -> Result<DenseVector> {
    let csc = a.csc_view();
    match dim {
        0 => {
            let mut out = vec![0.0f64; csc.n_cols()];
            for (col, slot_out) in out.iter_mut().enumerate() {
                let range = csc.col_range(col);
                *slot_out = csc.values()[range].iter().sum();
            }
            Ok(DenseVector::from_vec(out))
        }
        1 => {
            let mut out = vec![0.0f64; csc.n_rows()];
            for (&row, &value) in csc.rows().iter().zip(csc.values()) {
                out[row] += value;
            }
            Ok(DenseVector::from_vec(out))
        }
        other => Err(Error::InvalidDim(other)),
    }
}
