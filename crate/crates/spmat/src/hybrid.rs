//! The user-facing sparse matrix type.
//!
//! [`SpMat`] keeps its elements in exactly one of the three storage formats
//! at any time and switches between them on demand: element writes route to
//! the red-black tree, algebra kernels work on CSC, and bulk coordinate
//! transforms go through COO. Stale representations are discarded the moment
//! a transition happens, so the authoritative data is never ambiguous.
//!
//! Element reads never force a transition: every format can answer a lookup
//! directly, and reading a missing element never inserts anything.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convert::{coo_to_csc, csc_to_coo, csc_to_rbt, rbt_to_csc};
use crate::error::{Error, Result};
use crate::storage::{
    decode_index, linear_index, CooIter, CooStorage, CscIter, CscStorage, RbtIter, RbtStorage,
};

/// Which storage format currently holds the matrix data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repr {
    Csc,
    Rbt,
    Coo,
}

#[derive(Debug, Clone)]
enum ReprData {
    Csc(CscStorage),
    Rbt(RbtStorage),
    Coo(CooStorage),
}

/// Sparse matrix with hybrid storage.
#[derive(Debug, Clone)]
pub struct SpMat {
    n_rows: usize,
    n_cols: usize,
    repr: ReprData,
    conversions: u64,
}

impl SpMat {
    /// An empty matrix in the default CSC state.
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            repr: ReprData::Csc(CscStorage::new(n_rows, n_cols)),
            conversions: 0,
        }
    }

    pub fn from_csc(csc: CscStorage) -> Self {
        Self {
            n_rows: csc.n_rows(),
            n_cols: csc.n_cols(),
            repr: ReprData::Csc(csc),
            conversions: 0,
        }
    }

    pub fn from_rbt(rbt: RbtStorage) -> Self {
        Self {
            n_rows: rbt.n_rows(),
            n_cols: rbt.n_cols(),
            repr: ReprData::Rbt(rbt),
            conversions: 0,
        }
    }

    pub fn from_coo(coo: CooStorage) -> Self {
        Self {
            n_rows: coo.n_rows(),
            n_cols: coo.n_cols(),
            repr: ReprData::Coo(coo),
            conversions: 0,
        }
    }

    /// Identity-like matrix: ones on the main diagonal, `min(n_rows, n_cols)`
    /// elements in total.
    pub fn speye(n_rows: usize, n_cols: usize) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::ZeroDimension { n_rows, n_cols });
        }
        let n = n_rows.min(n_cols);
        let values = vec![1.0; n];
        let rows: Vec<usize> = (0..n).collect();
        let mut col_offsets: Vec<usize> = (0..=n).collect();
        col_offsets.resize(n_cols + 1, n);
        Ok(Self::from_csc(CscStorage::from_parts_unchecked(
            n_rows,
            n_cols,
            values,
            rows,
            col_offsets,
        )))
    }

    /// Random matrix with exactly `round(density * n_rows * n_cols)` distinct
    /// positions chosen uniformly without replacement (Floyd's sampling
    /// algorithm, which keeps the count exact even at high densities) and
    /// values uniform on (0, 1]. Fully determined by `seed`.
    pub fn sprandu(n_rows: usize, n_cols: usize, density: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&density) {
            return Err(Error::InvalidDensity(density));
        }
        let total = n_rows as u64 * n_cols as u64;
        let n = (density * total as f64).round() as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut chosen = std::collections::HashSet::with_capacity(n as usize);
        for j in (total - n)..total {
            let t = rng.random_range(0..=j);
            if !chosen.insert(t) {
                chosen.insert(j);
            }
        }
        let mut positions: Vec<u64> = chosen.into_iter().collect();
        positions.sort_unstable();

        let mut values = Vec::with_capacity(positions.len());
        let mut rows = Vec::with_capacity(positions.len());
        let mut col_offsets = vec![0usize; n_cols + 1];
        for &index in &positions {
            let (row, col) = decode_index(index, n_rows);
            values.push(1.0 - rng.random::<f64>());
            rows.push(row);
            col_offsets[col + 1] += 1;
        }
        for col in 1..=n_cols {
            col_offsets[col] += col_offsets[col - 1];
        }
        Ok(Self::from_csc(CscStorage::from_parts_unchecked(
            n_rows,
            n_cols,
            values,
            rows,
            col_offsets,
        )))
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn n_nonzero(&self) -> usize {
        match &self.repr {
            ReprData::Csc(c) => c.n_nonzero(),
            ReprData::Rbt(t) => t.n_nonzero(),
            ReprData::Coo(c) => c.n_nonzero(),
        }
    }

    /// Fraction of positions holding a non-zero value.
    pub fn density(&self) -> f64 {
        let total = self.n_rows as f64 * self.n_cols as f64;
        if total == 0.0 {
            0.0
        } else {
            self.n_nonzero() as f64 / total
        }
    }

    /// The currently authoritative storage format.
    pub fn state(&self) -> Repr {
        match &self.repr {
            ReprData::Csc(_) => Repr::Csc,
            ReprData::Rbt(_) => Repr::Rbt,
            ReprData::Coo(_) => Repr::Coo,
        }
    }

    /// Number of storage-format conversion algorithms this matrix has run.
    /// Test instrumentation, not part of the stable interface.
    #[doc(hidden)]
    pub fn conversion_count(&self) -> u64 {
        self.conversions
    }

    pub fn as_csc(&self) -> Option<&CscStorage> {
        match &self.repr {
            ReprData::Csc(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_rbt(&self) -> Option<&RbtStorage> {
        match &self.repr {
            ReprData::Rbt(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_coo(&self) -> Option<&CooStorage> {
        match &self.repr {
            ReprData::Coo(c) => Some(c),
            _ => None,
        }
    }

    /// Makes CSC the authoritative format (no-op when it already is) and
    /// returns it. Observable element values are unchanged by the sync.
    pub fn ensure_csc(&mut self) -> &CscStorage {
        match &self.repr {
            ReprData::Csc(_) => {}
            ReprData::Rbt(t) => {
                let csc = rbt_to_csc(t);
                self.conversions += 1;
                self.repr = ReprData::Csc(csc);
            }
            ReprData::Coo(c) => {
                let csc = coo_to_csc(c);
                self.conversions += 1;
                self.repr = ReprData::Csc(csc);
            }
        }
        match &self.repr {
            ReprData::Csc(c) => c,
            _ => unreachable!(),
        }
    }

    /// Makes the red-black tree the authoritative format. The transition not
    /// defined by a direct algorithm (COO -> RBT) routes through CSC.
    pub fn ensure_rbt(&mut self) -> &RbtStorage {
        match &self.repr {
            ReprData::Rbt(_) => {}
            ReprData::Csc(c) => {
                let rbt = csc_to_rbt(c);
                self.conversions += 1;
                self.repr = ReprData::Rbt(rbt);
            }
            ReprData::Coo(_) => {
                self.ensure_csc();
                self.ensure_rbt();
            }
        }
        match &self.repr {
            ReprData::Rbt(t) => t,
            _ => unreachable!(),
        }
    }

    /// Makes COO the authoritative format; RBT -> COO routes through CSC.
    pub fn ensure_coo(&mut self) -> &CooStorage {
        match &self.repr {
            ReprData::Coo(_) => {}
            ReprData::Csc(c) => {
                let coo = csc_to_coo(c);
                self.conversions += 1;
                self.repr = ReprData::Coo(coo);
            }
            ReprData::Rbt(_) => {
                self.ensure_csc();
                self.ensure_coo();
            }
        }
        match &self.repr {
            ReprData::Coo(c) => c,
            _ => unreachable!(),
        }
    }

    /// Reads the element at `(row, col)` from whichever format is
    /// authoritative, without changing state and without ever inserting.
    pub fn get(&self, row: usize, col: usize) -> Result<f64> {
        match &self.repr {
            ReprData::Csc(c) => c.get(row, col),
            ReprData::Coo(c) => c.get(row, col),
            ReprData::Rbt(t) => {
                if row >= self.n_rows || col >= self.n_cols {
                    return Err(Error::IndexOutOfBounds {
                        row,
                        col,
                        n_rows: self.n_rows,
                        n_cols: self.n_cols,
                    });
                }
                t.lookup(linear_index(row, col, self.n_rows))
            }
        }
    }

    /// Writes `value` at `(row, col)`, transitioning to the red-black tree
    /// for fast insertion. A zero value removes the element.
    pub fn set(&mut self, row: usize, col: usize, value: f64) -> Result<()> {
        if row >= self.n_rows || col >= self.n_cols {
            return Err(Error::IndexOutOfBounds {
                row,
                col,
                n_rows: self.n_rows,
                n_cols: self.n_cols,
            });
        }
        let index = linear_index(row, col, self.n_rows);
        self.ensure_rbt();
        let ReprData::Rbt(tree) = &mut self.repr else {
            unreachable!()
        };
        if value == 0.0 {
            tree.remove(index)?;
        } else {
            tree.insert(index, value)?;
        }
        Ok(())
    }

    /// Adds `delta` to the element at `(row, col)`; an exact-zero sum removes
    /// the element.
    pub fn set_add(&mut self, row: usize, col: usize, delta: f64) -> Result<()> {
        if row >= self.n_rows || col >= self.n_cols {
            return Err(Error::IndexOutOfBounds {
                row,
                col,
                n_rows: self.n_rows,
                n_cols: self.n_cols,
            });
        }
        let index = linear_index(row, col, self.n_rows);
        self.ensure_rbt();
        let ReprData::Rbt(tree) = &mut self.repr else {
            unreachable!()
        };
        let sum = tree.lookup(index)? + delta;
        if sum == 0.0 {
            tree.remove(index)?;
        } else {
            tree.insert(index, sum)?;
        }
        Ok(())
    }

    /// Ordered column-major triplet stream, independent of the current state.
    pub fn triplet_iter(&self) -> TripletIter<'_> {
        match &self.repr {
            ReprData::Csc(c) => TripletIter::Csc(c.iter()),
            ReprData::Coo(c) => TripletIter::Coo(c.iter()),
            ReprData::Rbt(t) => TripletIter::Rbt {
                inner: t.iter(),
                n_rows: self.n_rows,
            },
        }
    }

    /// Writes the dimensions, element count, density and the ordered triplet
    /// list to `sink`.
    pub fn print<W: Write>(&self, sink: &mut W) -> io::Result<()> {
        writeln!(
            sink,
            "sparse matrix: {} x {}, {} non-zero elements, density {:.6}",
            self.n_rows,
            self.n_cols,
            self.n_nonzero(),
            self.density()
        )?;
        for (row, col, value) in self.triplet_iter() {
            writeln!(sink, "({row}, {col}) {value}")?;
        }
        Ok(())
    }

    /// Borrowed CSC data when the matrix is already in CSC state, otherwise
    /// a freshly converted copy; the matrix itself is left untouched.
    pub(crate) fn csc_view(&self) -> CscRef<'_> {
        match &self.repr {
            ReprData::Csc(c) => CscRef::Borrowed(c),
            ReprData::Rbt(t) => CscRef::Owned(rbt_to_csc(t)),
            ReprData::Coo(c) => CscRef::Owned(coo_to_csc(c)),
        }
    }

    /// COO counterpart of [`SpMat::csc_view`].
    pub(crate) fn coo_view(&self) -> CooRef<'_> {
        match &self.repr {
            ReprData::Coo(c) => CooRef::Borrowed(c),
            ReprData::Csc(c) => CooRef::Owned(csc_to_coo(c)),
            ReprData::Rbt(t) => CooRef::Owned(csc_to_coo(&rbt_to_csc(t))),
        }
    }
}

/// Matrices compare equal when they have the same shape and identical
/// `(row, col, value)` triplet streams, regardless of storage state.
impl PartialEq for SpMat {
    fn eq(&self, other: &Self) -> bool {
        if self.shape() != other.shape() || self.n_nonzero() != other.n_nonzero() {
            return false;
        }
        self.triplet_iter().eq(other.triplet_iter())
    }
}

pub(crate) enum CscRef<'a> {
    Borrowed(&'a CscStorage),
    Owned(CscStorage),
}

impl std::ops::Deref for CscRef<'_> {
    type Target = CscStorage;

    fn deref(&self) -> &CscStorage {
        match self {
            CscRef::Borrowed(c) => c,
            CscRef::Owned(c) => c,
        }
    }
}

pub(crate) enum CooRef<'a> {
    Borrowed(&'a CooStorage),
    Owned(CooStorage),
}

impl std::ops::Deref for CooRef<'_> {
    type Target = CooStorage;

    fn deref(&self) -> &CooStorage {
        match self {
            CooRef::Borrowed(c) => c,
            CooRef::Owned(c) => c,
        }
    }
}

/// State-independent triplet iterator over an [`SpMat`].
pub enum TripletIter<'a> {
    Csc(CscIter<'a>),
    Coo(CooIter<'a>),
    Rbt { inner: RbtIter<'a>, n_rows: usize },
}

impl Iterator for TripletIter<'_> {
    type Item = (usize, usize, f64);

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            TripletIter::Csc(it) => it.next(),
            TripletIter::Coo(it) => it.next(),
            TripletIter::Rbt { inner, n_rows } => inner.next().map(|(index, value)| {
                let (row, col) = decode_index(index, *n_rows);
                (row, col, value)
            }),
        }
    }
}
