use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WeightError {
    #[error("weight table needs at least one embedding")]
    NoEmbeddings,
    #[error("embedding {sigma} has {got} entries, expected {rank}")]
    RaggedRow { sigma: usize, got: usize, rank: usize },
    #[error("embedding {sigma} is not dominant at index {index}")]
    NotDominant { sigma: usize, index: usize },
}

/// Dominant integral weights `k[sigma][i]` at one place.
///
/// Rows are embeddings, columns are indices `1..=rank`. Storage covers only
/// the positive indices; [`WeightTable::k`] supplies `k[-i] = -k[i]` and
/// `k[0] = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct WeightTable {
    rows: Vec<Vec<i64>>,
}

impl TryFrom<Vec<Vec<i64>>> for WeightTable {
    type Error = WeightError;
    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self, WeightError> {
        WeightTable::new(rows)
    }
}

impl From<WeightTable> for Vec<Vec<i64>> {
    fn from(w: WeightTable) -> Self {
        w.rows
    }
}

impl WeightTable {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self, WeightError> {
        let rank = rows.first().ok_or(WeightError::NoEmbeddings)?.len();
        for (sigma, row) in rows.iter().enumerate() {
            if row.len() != rank {
                return Err(WeightError::RaggedRow { sigma, got: row.len(), rank });
            }
            for i in 0..rank {
                let next = if i + 1 < rank { row[i + 1] } else { 0 };
                if row[i] < next {
                    return Err(WeightError::NotDominant { sigma, index: i + 1 });
                }
            }
        }
        Ok(WeightTable { rows })
    }

    /// The same weight row on every embedding.
    pub fn uniform(row: Vec<i64>, embeddings: usize) -> Result<Self, WeightError> {
        Self::new(vec![row; embeddings])
    }

    pub fn zero(rank: usize, embeddings: usize) -> Self {
        WeightTable { rows: vec![vec![0; rank]; embeddings.max(1)] }
    }

    /// Build from gap coordinates `g[sigma][i] = k[i] - k[i+1]`, `g[sigma][rank] = k[rank]`.
    pub fn from_gaps(gaps: &[Vec<i64>]) -> Result<Self, WeightError> {
        let rows = gaps
            .iter()
            .map(|g| {
                let mut row = vec![0; g.len()];
                let mut acc = 0;
                for i in (0..g.len()).rev() {
                    acc += g[i];
                    row[i] = acc;
                }
                row
            })
            .collect();
        Self::new(rows)
    }

    pub fn rank(&self) -> usize {
        self.rows[0].len()
    }

    pub fn embeddings(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    /// `k[sigma][i]` for `i` in `-rank..=rank`; `sigma` is 0-based.
    pub fn k(&self, sigma: usize, i: isize) -> i64 {
        match i {
            0 => 0,
            i if i > 0 => self.rows[sigma][i as usize - 1],
            i => -self.rows[sigma][(-i) as usize - 1],
        }
    }

    /// `sum_sigma k[sigma][i]`, extended to signed indices.
    pub fn column_sum(&self, i: isize) -> i64 {
        (0..self.embeddings()).map(|s| self.k(s, i)).sum()
    }

    /// Gap coordinates of one embedding: consecutive differences, then `k[rank]`.
    pub fn gaps(&self, sigma: usize) -> Vec<i64> {
        let row = &self.rows[sigma];
        (0..row.len())
            .map(|i| row[i] - row.get(i + 1).copied().unwrap_or(0))
            .collect()
    }

    pub fn min_gap(&self) -> i64 {
        (0..self.embeddings())
            .flat_map(|s| self.gaps(s))
            .min()
            .unwrap_or(0)
    }

    /// Every gap coordinate strictly positive.
    pub fn is_strictly_regular(&self) -> bool {
        self.rank() == 0 || self.min_gap() > 0
    }
}

/// Minimum over all places and embeddings of the gaps and `k[n]` is at least `bound`.
pub fn very_regular<S: Scalar>(weights: &[WeightTable], bound: &S) -> bool {
    weights
        .iter()
        .filter(|w| w.rank() > 0)
        .all(|w| S::from_int(w.min_gap()) >= *bound)
}
