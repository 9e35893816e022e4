//! Needleman–Wunsch global alignment with a linear gap penalty, used to map
//! rows of a full-sequence embedding onto the residues present in a structure.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedio::EmbeddingMatrix;
use crate::scalar::Real;
use crate::structio::Sequence;

/// Longest sequence accepted by [`align_global`]; the DP table is quadratic.
pub const MAX_ALIGN_LEN: usize = 20_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlignError {
    #[error("cannot align an empty sequence")]
    EmptyInput,
    #[error("sequence of length {len} exceeds the alignment limit of {MAX_ALIGN_LEN}")]
    SequenceTooLong { len: usize },
    #[error("embedding has {rows} rows but the aligned sequence has {expected} residues")]
    DimensionMismatch { rows: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scoring {
    pub match_score: i64,
    pub mismatch: i64,
    pub gap: i64,
}

impl Default for Scoring {
    fn default() -> Self {
        Self {
            match_score: 1,
            mismatch: -1,
            gap: -1,
        }
    }
}

impl Scoring {
    #[inline]
    pub fn pair(&self, a: u8, b: u8) -> i64 {
        if a == b {
            self.match_score
        } else {
            self.mismatch
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub aligned_a: String,
    pub aligned_b: String,
    pub score: i64,
    /// `(a_index, b_index)` for every column where both sides carry a residue.
    pub index_map: Vec<(usize, usize)>,
}

impl Alignment {
    /// Length of the `a` input (gap-free residues on the `a` side).
    pub fn len_a(&self) -> usize {
        self.aligned_a.bytes().filter(|&c| c != b'-').count()
    }

    pub fn len_b(&self) -> usize {
        self.aligned_b.bytes().filter(|&c| c != b'-').count()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Step {
    Diag,
    Left,
    Up,
}

/// Optimal global alignment of `a` against `b`.
///
/// On traceback ties, a substitution column is preferred, then a gap in `a`,
/// then a gap in `b`.
pub fn align_global(a: &Sequence, b: &Sequence, scoring: Scoring) -> Result<Alignment, AlignError> {
    align_bytes(a.residues.as_bytes(), b.residues.as_bytes(), scoring)
}

pub fn align_bytes(a: &[u8], b: &[u8], scoring: Scoring) -> Result<Alignment, AlignError> {
    if a.is_empty() || b.is_empty() {
        return Err(AlignError::EmptyInput);
    }
    for len in [a.len(), b.len()] {
        if len > MAX_ALIGN_LEN {
            return Err(AlignError::SequenceTooLong { len });
        }
    }
    let (n, m) = (a.len(), b.len());
    let width = m + 1;
    let mut dp = vec![0i64; (n + 1) * width];
    for i in 1..=n {
        dp[i * width] = scoring.gap * i as i64;
    }
    for j in 1..=m {
        dp[j] = scoring.gap * j as i64;
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = dp[(i - 1) * width + j - 1] + scoring.pair(a[i - 1], b[j - 1]);
            let up = dp[(i - 1) * width + j] + scoring.gap;
            let left = dp[i * width + j - 1] + scoring.gap;
            dp[i * width + j] = diag.max(up).max(left);
        }
    }

    let mut steps = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[i * width + j];
        let step = if i > 0 && j > 0 && here == dp[(i - 1) * width + j - 1] + scoring.pair(a[i - 1], b[j - 1]) {
            Step::Diag
        } else if j > 0 && here == dp[i * width + j - 1] + scoring.gap {
            Step::Left
        } else {
            Step::Up
        };
        match step {
            Step::Diag => {
                i -= 1;
                j -= 1;
            }
            Step::Left => j -= 1,
            Step::Up => i -= 1,
        }
        steps.push(step);
    }
    steps.reverse();

    let mut aligned_a = String::with_capacity(steps.len());
    let mut aligned_b = String::with_capacity(steps.len());
    let mut index_map = Vec::new();
    let (mut ia, mut ib) = (0usize, 0usize);
    for step in steps {
        match step {
            Step::Diag => {
                aligned_a.push(a[ia] as char);
                aligned_b.push(b[ib] as char);
                index_map.push((ia, ib));
                ia += 1;
                ib += 1;
            }
            Step::Left => {
                aligned_a.push('-');
                aligned_b.push(b[ib] as char);
                ib += 1;
            }
            Step::Up => {
                aligned_a.push(a[ia] as char);
                aligned_b.push('-');
                ia += 1;
            }
        }
    }
    Ok(Alignment {
        aligned_a,
        aligned_b,
        score: dp[n * width + m],
        index_map,
    })
}

/// Keeps the embedding rows whose `a`-side residue is matched in the alignment.
pub fn restrict_embedding<T: Real>(
    e: &EmbeddingMatrix<T>,
    al: &Alignment,
) -> Result<EmbeddingMatrix<T>, AlignError> {
    let expected = al.len_a();
    if e.n_rows() != expected {
        return Err(AlignError::DimensionMismatch {
            rows: e.n_rows(),
            expected,
        });
    }
    let rows: Vec<usize> = al.index_map.iter().map(|&(ia, _)| ia).collect();
    Ok(e.select_rows(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn seq(s: &str) -> Sequence {
        Sequence {
            id: "t".into(),
            residues: s.into(),
        }
    }

    #[test]
    fn identity_alignment() {
        let al = align_global(&seq("ACD"), &seq("ACD"), Scoring::default()).unwrap();
        assert_eq!(al.score, 3);
        assert_eq!(al.index_map, vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn deletion_alignment() {
        let al = align_global(&seq("ACD"), &seq("AD"), Scoring::default()).unwrap();
        assert_eq!(al.score, 1);
        assert_eq!(al.aligned_a, "ACD");
        assert_eq!(al.aligned_b, "A-D");
        assert_eq!(al.index_map, vec![(0, 0), (2, 1)]);
    }

    #[test]
    fn single_mismatch_beats_double_gap() {
        let al = align_global(&seq("A"), &seq("G"), Scoring::default()).unwrap();
        assert_eq!(al.score, -1);
        assert_eq!((al.aligned_a.as_str(), al.aligned_b.as_str()), ("A", "G"));
    }

    #[test]
    fn tie_prefers_gap_in_a_over_gap_in_b() {
        // "A" vs "G" under mismatch -3: the two double-gap alignments tie at -2.
        let s = Scoring {
            match_score: 1,
            mismatch: -3,
            gap: -1,
        };
        let al = align_global(&seq("A"), &seq("G"), s).unwrap();
        assert_eq!(al.score, -2);
        assert_eq!(al.aligned_a, "A-");
        assert_eq!(al.aligned_b, "-G");
    }

    #[test]
    fn empty_and_oversized_inputs() {
        assert_eq!(align_global(&seq(""), &seq("A"), Scoring::default()), Err(AlignError::EmptyInput));
        let long = "A".repeat(MAX_ALIGN_LEN + 1);
        assert!(matches!(
            align_global(&seq(&long), &seq("A"), Scoring::default()),
            Err(AlignError::SequenceTooLong { .. })
        ));
    }

    #[test]
    fn restrict_selects_matched_rows() {
        let e = EmbeddingMatrix::new(Matrix::from_fn(5, 4, |r, c| (r * 10 + c) as f64), "t").unwrap();
        let al = align_global(&seq("ACDEF"), &seq("ADF"), Scoring::default()).unwrap();
        assert_eq!(al.index_map.iter().map(|p| p.0).collect::<Vec<_>>(), vec![0, 2, 4]);
        let r = restrict_embedding(&e, &al).unwrap();
        assert_eq!(r.n_rows(), 3);
        assert_eq!(r.data().row(1), e.data().row(2));

        let id = align_global(&seq("ACDEF"), &seq("ACDEF"), Scoring::default()).unwrap();
        assert_eq!(restrict_embedding(&e, &id).unwrap(), e);

        let e4 = EmbeddingMatrix::new(Matrix::<f64>::zeros(4, 4), "t").unwrap();
        assert_eq!(
            restrict_embedding(&e4, &id),
            Err(AlignError::DimensionMismatch { rows: 4, expected: 5 })
        );
    }
}
