//! Per-residue embedding matrices and the `PRE1` text format.
//!
//! ```text
//! PRE1 <N> <D>
//! src=<tag>
//! <D space-separated reals>   (N lines)
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbedError {
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error("header declares {expected} rows, found {found}")]
    RowCountMismatch { expected: usize, found: usize },
    #[error("row {row} has {found} columns, header declares {expected}")]
    ColumnCountMismatch { row: usize, expected: usize, found: usize },
    #[error("row {row}, column {col}: value is not finite")]
    NonFiniteValue { row: usize, col: usize },
    #[error("row {row}, column {col}: cannot parse {token:?} as a number")]
    BadValue { row: usize, col: usize, token: String },
    #[error("onehot_index needs dim >= n (n = {n}, dim = {dim})")]
    DimTooSmall { n: usize, dim: usize },
    #[error("embedding must have at least one row and one column")]
    Empty,
    #[error("source tag {0:?} must be non-empty and contain no whitespace")]
    BadSourceTag(String),
}

/// An `N × D` embedding with a provenance tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMatrix<T> {
    data: Matrix<T>,
    source: String,
}

impl<T: Real> EmbeddingMatrix<T> {
    pub fn new(data: Matrix<T>, source: impl Into<String>) -> Result<Self, EmbedError> {
        let source = source.into();
        if data.rows() == 0 || data.cols() == 0 {
            return Err(EmbedError::Empty);
        }
        if source.is_empty() || source.chars().any(char::is_whitespace) {
            return Err(EmbedError::BadSourceTag(source));
        }
        for r in 0..data.rows() {
            if let Some(c) = data.row(r).iter().position(|v| !v.is_finite()) {
                return Err(EmbedError::NonFiniteValue { row: r, col: c });
            }
        }
        Ok(Self { data, source })
    }

    pub fn n_rows(&self) -> usize {
        self.data.rows()
    }

    pub fn dim(&self) -> usize {
        self.data.cols()
    }

    pub fn data(&self) -> &Matrix<T> {
        &self.data
    }

    pub fn into_data(self) -> Matrix<T> {
        self.data
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            data: self.data.select_rows(rows),
            source: self.source.clone(),
        }
    }
}

/// Parses a `PRE1` document.
pub fn read_pre<T: Real>(text: &str) -> Result<EmbeddingMatrix<T>, EmbedError> {
    let mut lines = text.split('\n');
    let header = lines.next().unwrap_or("");
    let fields: Vec<&str> = header.split(' ').collect();
    if fields.len() != 3 || fields[0] != "PRE1" {
        return Err(EmbedError::BadHeader(format!("expected \"PRE1 <N> <D>\", got {header:?}")));
    }
    let parse_dim = |s: &str, what: &str| -> Result<usize, EmbedError> {
        match s.parse::<usize>() {
            Ok(v) if v > 0 && s.bytes().all(|b| b.is_ascii_digit()) => Ok(v),
            _ => Err(EmbedError::BadHeader(format!("{what} {s:?} is not a positive integer"))),
        }
    };
    let n = parse_dim(fields[1], "row count")?;
    let d = parse_dim(fields[2], "column count")?;
    let src_line = lines.next().unwrap_or("");
    let source = src_line
        .strip_prefix("src=")
        .filter(|t| !t.is_empty() && !t.chars().any(char::is_whitespace))
        .ok_or_else(|| EmbedError::BadHeader(format!("expected \"src=<tag>\", got {src_line:?}")))?
        .to_string();

    let mut rows: Vec<&str> = lines.collect();
    while rows.last().is_some_and(|l| l.is_empty()) {
        rows.pop();
    }
    if rows.len() != n {
        return Err(EmbedError::RowCountMismatch {
            expected: n,
            found: rows.len(),
        });
    }
    let mut data = Vec::with_capacity(n * d);
    for (r, line) in rows.iter().enumerate() {
        let tokens: Vec<&str> = line.split(' ').filter(|t| !t.is_empty()).collect();
        if tokens.len() != d {
            return Err(EmbedError::ColumnCountMismatch {
                row: r,
                expected: d,
                found: tokens.len(),
            });
        }
        for (c, tok) in tokens.iter().enumerate() {
            let v: f64 = tok.parse().map_err(|_| EmbedError::BadValue {
                row: r,
                col: c,
                token: (*tok).to_string(),
            })?;
            if !v.is_finite() {
                return Err(EmbedError::NonFiniteValue { row: r, col: c });
            }
            data.push(T::lit(v));
        }
    }
    let m = Matrix::from_vec(n, d, data).expect("shape checked above");
    EmbeddingMatrix::new(m, source)
}

/// Serializes with 17 significant digits per entry.
pub fn write_pre<T: Real>(e: &EmbeddingMatrix<T>) -> String {
    let mut out = String::with_capacity(e.n_rows() * e.dim() * 24 + 32);
    let _ = writeln!(out, "PRE1 {} {}", e.n_rows(), e.dim());
    let _ = writeln!(out, "src={}", e.source());
    for r in 0..e.n_rows() {
        for (c, v) in e.data().row(r).iter().enumerate() {
            if c > 0 {
                out.push(' ');
            }
            let v = v.as_f64();
            if v == 0.0 {
                out.push('0');
            } else {
                let _ = write!(out, "{v:.16e}");
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionalKind {
    /// Interleaved sin/cos at geometric frequencies.
    Sinusoidal,
    /// Row `i` is the `i`-th standard basis vector.
    OnehotIndex,
}

/// Synthetic position-bearing embeddings.
pub fn synth_positional<T: Real>(n: usize, dim: usize, kind: PositionalKind) -> Result<EmbeddingMatrix<T>, EmbedError> {
    if n == 0 || dim == 0 {
        return Err(EmbedError::Empty);
    }
    let m = match kind {
        PositionalKind::OnehotIndex => {
            if dim < n {
                return Err(EmbedError::DimTooSmall { n, dim });
            }
            Matrix::from_fn(n, dim, |r, c| if r == c { T::one() } else { T::zero() })
        }
        PositionalKind::Sinusoidal => Matrix::from_fn(n, dim, |r, c| {
            let pair = (c / 2) as f64;
            let freq = 1.0 / 10_000f64.powf(2.0 * pair / dim as f64);
            let angle = r as f64 * freq;
            T::lit(if c % 2 == 0 { angle.sin() } else { angle.cos() })
        }),
    };
    let tag = match kind {
        PositionalKind::OnehotIndex => "synthetic-onehot-index",
        PositionalKind::Sinusoidal => "synthetic-sinusoidal",
    };
    EmbeddingMatrix::new(m, tag)
}
