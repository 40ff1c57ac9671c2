//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by matrix construction, element access and kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A (row, col) pair outside the matrix bounds.
    #[error("element ({row}, {col}) out of bounds for {n_rows}x{n_cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },

    /// A linear (column-major) index outside the matrix bounds.
    #[error("linear index {index} out of bounds for matrix with {n_elem} positions")]
    LinearIndexOutOfBounds { index: u64, n_elem: u64 },

    /// A triplet passed to batch construction lies outside the matrix.
    #[error("triplet ({row}, {col}, {value}) out of bounds for {n_rows}x{n_cols} matrix")]
    TripletOutOfBounds {
        row: usize,
        col: usize,
        value: f64,
        n_rows: usize,
        n_cols: usize,
    },

    /// Two operands whose shapes are incompatible for the requested operation.
    #[error(
        "dimension mismatch in {op}: left is {lhs_rows}x{lhs_cols}, right is {rhs_rows}x{rhs_cols}"
    )]
    DimensionMismatch {
        op: &'static str,
        lhs_rows: usize,
        lhs_cols: usize,
        rhs_rows: usize,
        rhs_cols: usize,
    },

    /// A dense vector whose length does not match the matrix dimension.
    #[error("vector length {len} does not match matrix dimension {expected} in {op}")]
    VectorLengthMismatch {
        op: &'static str,
        len: usize,
        expected: usize,
    },

    /// Shape inconsistency inside an expression tree; `path` locates the node.
    #[error("shape mismatch at expression node {path}: {detail}")]
    ExprShapeMismatch { path: String, detail: String },

    /// An expression whose result is required to be square but is not.
    #[error("trace requires a square result, got {n_rows}x{n_cols}")]
    NonSquareTrace { n_rows: usize, n_cols: usize },

    /// Generator called with a zero dimension.
    #[error("matrix dimensions must be positive, got {n_rows}x{n_cols}")]
    ZeroDimension { n_rows: usize, n_cols: usize },

    /// Density outside the valid `[0, 1]` range.
    #[error("density {0} outside the valid range [0, 1]")]
    InvalidDensity(f64),

    /// Dimension selector other than 0 (columns) or 1 (rows).
    #[error("invalid dimension selector {0}; expected 0 or 1")]
    InvalidDim(usize),

    /// Raw arrays handed to a storage constructor violate a format invariant.
    #[error("invalid storage arrays: {0}")]
    InvalidStorage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
