use std::fmt;

use serde::{Deserialize, Serialize};

use crate::concept::AbstractionLevel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixLabel {
    Level(AbstractionLevel),
    Weighted(WeightedTag),
}

/// Serializes as the string `"weighted"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightedTag {
    Weighted,
}

impl MatrixLabel {
    pub const WEIGHTED: MatrixLabel = MatrixLabel::Weighted(WeightedTag::Weighted);
}

impl fmt::Display for MatrixLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixLabel::Level(level) => write!(f, "{level}"),
            MatrixLabel::Weighted(_) => f.write_str("weighted"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatrixError {
    #[error("row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("entry ({i}, {j}) = {value} is outside [0, 1]")]
    OutOfRange { i: usize, j: usize, value: f64 },
    #[error("diagonal entry {i} is {value}, expected 0")]
    NonZeroDiagonal { i: usize, value: f64 },
    #[error("entries ({i}, {j}) and ({j}, {i}) differ")]
    Asymmetric { i: usize, j: usize },
}

/// Symmetric N×N matrix of pairwise concept distances with zero diagonal and
/// entries in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct DistanceMatrix {
    label: MatrixLabel,
    n: usize,
    entries: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawMatrix {
    level: MatrixLabel,
    entries: Vec<Vec<f64>>,
}

impl TryFrom<RawMatrix> for DistanceMatrix {
    type Error = MatrixError;

    fn try_from(raw: RawMatrix) -> Result<Self, Self::Error> {
        DistanceMatrix::from_rows(raw.level, &raw.entries)
    }
}

impl From<DistanceMatrix> for RawMatrix {
    fn from(m: DistanceMatrix) -> Self {
        RawMatrix {
            level: m.label,
            entries: m.rows().map(<[f64]>::to_vec).collect(),
        }
    }
}

impl DistanceMatrix {
    /// Fills the strict upper triangle from `f(i, j)` (i < j) and mirrors it.
    /// Values are clamped into [0, 1]; NaN is an error.
    pub fn from_upper<F>(label: MatrixLabel, n: usize, mut f: F) -> Result<Self, MatrixError>
    where
        F: FnMut(usize, usize) -> f64,
    {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let value = f(i, j);
                if value.is_nan() {
                    return Err(MatrixError::OutOfRange { i, j, value });
                }
                let d = value.clamp(0.0, 1.0);
                entries[i * n + j] = d;
                entries[j * n + i] = d;
            }
        }
        Ok(Self { label, n, entries })
    }

    /// Validates an explicit matrix. Symmetry and the zero diagonal are exact checks.
    pub fn from_rows(label: MatrixLabel, rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(MatrixError::NotSquare {
                    row,
                    len: r.len(),
                    n,
                });
            }
            entries.extend_from_slice(r);
        }
        for i in 0..n {
            let diag = entries[i * n + i];
            if diag != 0.0 {
                return Err(MatrixError::NonZeroDiagonal { i, value: diag });
            }
            for j in 0..n {
                let value = entries[i * n + j];
                if !(0.0..=1.0).contains(&value) {
                    return Err(MatrixError::OutOfRange { i, j, value });
                }
                if value != entries[j * n + i] {
                    return Err(MatrixError::Asymmetric { i, j });
                }
            }
        }
        Ok(Self { label, n, entries })
    }

    pub fn zeros(label: MatrixLabel, n: usize) -> Self {
        Self {
            label,
            n,
            entries: vec![0.0; n * n],
        }
    }

    pub fn label(&self) -> MatrixLabel {
        self.label
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.n.max(1)).take(self.n)
    }

    /// Sum of all off-diagonal entries.
    pub fn off_diagonal_sum(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// Re-indexes concepts: entry (i, j) of the result is entry (perm[i], perm[j]).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n, "permutation length");
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = self.get(perm[i], perm[j]);
            }
        }
        Self {
            label: self.label,
            n,
            entries,
        }
    }

    pub fn relabeled(mut self, label: MatrixLabel) -> Self {
        self.label = label;
        self
    }
}
