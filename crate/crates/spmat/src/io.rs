//! Persistence and interchange: MatrixMarket coordinate files for matrices
//! and CSV emission for benchmark results.
//!
//! On disk, indices are one-based per the MatrixMarket convention and are
//! shifted to the crate's zero-based indexing at this boundary only. Values
//! are written with 17 significant digits, which round-trips doubles
//! exactly, and entries are emitted in canonical column-major order, so
//! save -> load -> save is byte-identical.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::hybrid::SpMat;
use crate::storage::CooStorage;

const MM_HEADER: &str = "%%MatrixMarket matrix coordinate real general";

/// Errors from reading or writing MatrixMarket files. Parse errors carry the
/// one-based line number of the offending input line.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("line {line}: malformed header: {msg}")]
    MalformedHeader { line: usize, msg: String },

    #[error("line {line}: malformed entry: {msg}")]
    MalformedLine { line: usize, msg: String },

    #[error("line {line}: entry ({row}, {col}) out of declared bounds {n_rows}x{n_cols}")]
    EntryOutOfBounds {
        line: usize,
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },

    #[error("line {line}: invalid number `{token}`")]
    InvalidNumber { line: usize, token: String },

    #[error("file ends at line {line}: expected {expected} entries, found {found}")]
    UnexpectedEof {
        line: usize,
        expected: usize,
        found: usize,
    },
}

/// Writes `m` in MatrixMarket coordinate format: the exact header line, a
/// `rows cols nnz` size line, then one `row col value` line per element with
/// one-based indices in column-major order.
pub fn save_matrix_market<W: Write>(m: &SpMat, sink: &mut W) -> Result<(), IoError> {
    writeln!(sink, "{MM_HEADER}")?;
    writeln!(sink, "{} {} {}", m.n_rows(), m.n_cols(), m.n_nonzero())?;
    for (row, col, value) in m.triplet_iter() {
        writeln!(sink, "{} {} {:.16e}", row + 1, col + 1, value)?;
    }
    Ok(())
}

/// Reads a MatrixMarket coordinate `real general` file into a CSC-state
/// matrix. Out-of-order and duplicate entries are tolerated (the last
/// occurrence of a position wins) and explicit zeros are dropped.
pub fn load_matrix_market<R: BufRead>(source: R) -> Result<SpMat, IoError> {
    let mut lines = source.lines();
    let mut line_no = 0usize;

    let header = match lines.next() {
        Some(line) => {
            line_no += 1;
            line?
        }
        None => {
            return Err(IoError::MalformedHeader {
                line: 1,
                msg: "empty input".into(),
            });
        }
    };
    parse_header(&header)?;

    // Size line: the first non-comment, non-blank line after the header.
    let (n_rows, n_cols, declared) = loop {
        let line = match lines.next() {
            Some(line) => {
                line_no += 1;
                line?
            }
            None => {
                return Err(IoError::MalformedLine {
                    line: line_no + 1,
                    msg: "missing size line".into(),
                });
            }
        };
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let n_rows = parse_index(fields.next(), line_no, "rows")?;
        let n_cols = parse_index(fields.next(), line_no, "cols")?;
        let declared = parse_index(fields.next(), line_no, "nnz")?;
        if fields.next().is_some() {
            return Err(IoError::MalformedLine {
                line: line_no,
                msg: "size line has more than three fields".into(),
            });
        }
        break (n_rows, n_cols, declared);
    };

    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(declared);
    let mut found = 0usize;
    for line in lines {
        line_no += 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        if found == declared {
            return Err(IoError::MalformedLine {
                line: line_no,
                msg: format!("more than the declared {declared} entries"),
            });
        }
        let mut fields = trimmed.split_whitespace();
        let row = parse_index(fields.next(), line_no, "row")?;
        let col = parse_index(fields.next(), line_no, "col")?;
        let value_token = fields.next().ok_or_else(|| IoError::MalformedLine {
            line: line_no,
            msg: "missing value field".into(),
        })?;
        if fields.next().is_some() {
            return Err(IoError::MalformedLine {
                line: line_no,
                msg: "entry has more than three fields".into(),
            });
        }
        let value: f64 = value_token.parse().map_err(|_| IoError::InvalidNumber {
            line: line_no,
            token: value_token.to_string(),
        })?;
        if row == 0 || row > n_rows || col == 0 || col > n_cols {
            return Err(IoError::EntryOutOfBounds {
                line: line_no,
                row,
                col,
                n_rows,
                n_cols,
            });
        }
        triplets.push((row - 1, col - 1, value));
        found += 1;
    }
    if found != declared {
        return Err(IoError::UnexpectedEof {
            line: line_no,
            expected: declared,
            found,
        });
    }

    let coo = CooStorage::from_triplets(n_rows, n_cols, &triplets)
        .expect("entries were bounds-checked during parsing");
    Ok(SpMat::from_csc(crate::convert::coo_to_csc(&coo)))
}

fn parse_header(header: &str) -> Result<(), IoError> {
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || !fields[0].eq_ignore_ascii_case("%%MatrixMarket") {
        return Err(IoError::MalformedHeader {
            line: 1,
            msg: format!("expected `{MM_HEADER}`, got `{header}`"),
        });
    }
    let expected = ["matrix", "coordinate", "real", "general"];
    for (field, want) in fields[1..].iter().zip(expected) {
        if !field.eq_ignore_ascii_case(want) {
            return Err(IoError::MalformedHeader {
                line: 1,
                msg: format!("unsupported qualifier `{field}`, expected `{want}`"),
            });
        }
    }
    Ok(())
}

fn parse_index(token: Option<&str>, line: usize, what: &str) -> Result<usize, IoError> {
    let token = token.ok_or_else(|| IoError::MalformedLine {
        line,
        msg: format!("missing {what} field"),
    })?;
    token.parse().map_err(|_| IoError::InvalidNumber {
        line,
        token: token.to_string(),
    })
}

/// One timed measurement emitted by the benchmark harness.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub experiment: String,
    pub format: String,
    pub n_rows: usize,
    pub n_cols: usize,
    pub density: f64,
    pub rep: usize,
    pub seconds: f64,
}

/// Writes benchmark records as CSV with a fixed header and 6-decimal
/// second timings.
pub fn write_csv_results<W: Write>(records: &[BenchRecord], sink: &mut W) -> Result<(), IoError> {
    writeln!(sink, "experiment,format,n_rows,n_cols,density,rep,seconds")?;
    for r in records {
        writeln!(
            sink,
            "{},{},{},{},{},{},{:.6}",
            r.experiment, r.format, r.n_rows, r.n_cols, r.density, r.rep, r.seconds
        )?;
    }
    Ok(())
}
