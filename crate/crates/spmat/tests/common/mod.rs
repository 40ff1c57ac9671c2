//! Shared test support: a brute-force dense mirror used as the independent
//! oracle for the sparse kernels, plus random matrix generation.
//!
//! The mirror never touches the sparse code paths it is used to verify:
//! every operation here works on a flat column-major `Vec<f64>`.

#![allow(dead_code)]

use rand::Rng;
use spmat::SpMat;

/// Dense column-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub n_rows: usize,
    pub n_cols: usize,
    data: Vec<f64>,
}

impl Dense {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn from_spmat(m: &SpMat) -> Self {
        let mut dense = Self::zeros(m.n_rows(), m.n_cols());
        for (row, col, value) in m.triplet_iter() {
            dense.set(row, col, value);
        }
        dense
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row + col * self.n_rows]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row + col * self.n_rows] = value;
    }

    pub fn add(&self, other: &Dense) -> Dense {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let mut out = Self::zeros(self.n_rows, self.n_cols);
        for i in 0..self.data.len() {
            out.data[i] = self.data[i] + other.data[i];
        }
        out
    }

    pub fn scalar_mul(&self, k: f64) -> Dense {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= k;
        }
        out
    }

    pub fn mul(&self, other: &Dense) -> Dense {
        assert_eq!(self.n_cols, other.n_rows);
        let mut out = Self::zeros(self.n_rows, other.n_cols);
        for j in 0..other.n_cols {
            for k in 0..self.n_cols {
                let scale = other.get(k, j);
                if scale == 0.0 {
                    continue;
                }
                for i in 0..self.n_rows {
                    let acc = out.get(i, j) + self.get(i, k) * scale;
                    out.set(i, j, acc);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Dense {
        let mut out = Self::zeros(self.n_cols, self.n_rows);
        for col in 0..self.n_cols {
            for row in 0..self.n_rows {
                out.set(col, row, self.get(row, col));
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i))
            .sum()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn vec_mul(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n_rows);
        (0..self.n_cols)
            .map(|j| (0..self.n_rows).map(|i| v[i] * self.get(i, j)).sum())
            .collect()
    }

    pub fn reverse_rows(&self) -> Dense {
        let mut out = Self::zeros(self.n_rows, self.n_cols);
        for col in 0..self.n_cols {
            for row in 0..self.n_rows {
                out.set(self.n_rows - 1 - row, col, self.get(row, col));
            }
        }
        out
    }

    pub fn reverse_cols(&self) -> Dense {
        let mut out = Self::zeros(self.n_rows, self.n_cols);
        for col in 0..self.n_cols {
            for row in 0..self.n_rows {
                out.set(row, self.n_cols - 1 - col, self.get(row, col));
            }
        }
        out
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.n_cols)
            .map(|j| (0..self.n_rows).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| (0..self.n_cols).map(|j| self.get(i, j)).sum())
            .collect()
    }

    /// Non-zero entries in column-major order.
    pub fn nonzero_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for col in 0..self.n_cols {
            for row in 0..self.n_rows {
                let v = self.get(row, col);
                if v != 0.0 {
                    out.push((row, col, v));
                }
            }
        }
        out
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Asserts a sparse matrix matches the dense mirror entry by entry at the
/// given relative tolerance (`tol == 0.0` demands exact equality), and that
/// it stores no explicit zeros.
pub fn assert_matches_dense(m: &SpMat, dense: &Dense, tol: f64, what: &str) {
    assert_eq!(
        (m.n_rows(), m.n_cols()),
        (dense.n_rows, dense.n_cols),
        "{what}: shape"
    );
    let mut mirror = Dense::zeros(dense.n_rows, dense.n_cols);
    for (row, col, value) in m.triplet_iter() {
        assert!(
            value != 0.0,
            "{what}: explicit zero stored at ({row}, {col})"
        );
        mirror.set(row, col, value);
    }
    for col in 0..dense.n_cols {
        for row in 0..dense.n_rows {
            let (got, want) = (mirror.get(row, col), dense.get(row, col));
            let ok = if tol == 0.0 {
                got == want
            } else {
                rel_close(got, want, tol)
            };
            assert!(
                ok,
                "{what}: mismatch at ({row}, {col}): got {got}, want {want}"
            );
        }
    }
}

/// Random sparse matrix with roughly `density` fill and values in (0, 1],
/// built through the public construction path, together with its mirror.
pub fn random_pair<R: Rng>(
    rng: &mut R,
    n_rows: usize,
    n_cols: usize,
    density: f64,
) -> (SpMat, Dense) {
    let mut dense = Dense::zeros(n_rows, n_cols);
    let mut triplets = Vec::new();
    for col in 0..n_cols {
        for row in 0..n_rows {
            if rng.random::<f64>() < density {
                let value = 1.0 - rng.random::<f64>();
                triplets.push((row, col, value));
                dense.set(row, col, value);
            }
        }
    }
    let coo = spmat::CooStorage::from_triplets(n_rows, n_cols, &triplets).unwrap();
    (SpMat::from_csc(spmat::convert::coo_to_csc(&coo)), dense)
}

/// The worked 5x4 matrix that recurs throughout the suite.
pub fn example_matrix() -> SpMat {
    SpMat::from_csc(
        spmat::CscStorage::from_parts(
            5,
            4,
            vec![9.0, 8.0, 7.0, 6.0, 5.0, 4.0],
            vec![1, 0, 3, 1, 2, 4],
            vec![0, 1, 3, 5, 6],
        )
        .unwrap(),
    )
}
