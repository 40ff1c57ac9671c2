//! Sparse matrix library with hybrid storage.
//!
//! The central type is [`SpMat`], a sparse matrix that transparently
//! switches between three underlying storage formats depending on the
//! operation:
//!
//! - **CSC** (compressed sparse column) for arithmetic kernels and element
//!   reads,
//! - **RBT** (a red-black tree keyed by linear element index) for fast
//!   incremental construction and element writes,
//! - **COO** (coordinate list) for bulk coordinate transforms.
//!
//! On top of the eager kernels sits a small deferred-expression layer
//! ([`expr`]) that recognizes compound patterns such as the trace of a
//! transpose-product and dispatches them to fused kernels that skip the
//! intermediate matrices entirely.
//!
//! ```
//! use spmat::SpMat;
//!
//! let mut x = SpMat::sprandu(100, 100, 0.01, 42).unwrap();
//! x.set(1, 1, 1.23).unwrap();        // routes to the tree format
//! x.set_add(3, 4, 4.56).unwrap();
//! let csc = x.ensure_csc();          // one sync back to CSC
//! assert_eq!(csc.n_nonzero(), x.n_nonzero());
//! ```

pub mod convert;
pub mod error;
pub mod expr;
pub mod hybrid;
pub mod instrument;
pub mod io;
pub mod kernels;
pub mod storage;

pub use error::{Error, Result};
pub use hybrid::{Repr, SpMat, TripletIter};
pub use kernels::DenseVector;
pub use storage::{CooBuilder, CooStorage, CscStorage, RbtStorage};
