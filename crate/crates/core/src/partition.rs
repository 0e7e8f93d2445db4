//! Integer partitions, viewed as Young diagrams.

use serde::{Deserialize, Serialize};

use crate::error::{BbsError, Result};

/// Integer partition stored by its row lengths.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Partition {
    rows: Vec<usize>,
}

impl Partition {
    pub fn from_rows(rows: Vec<usize>) -> Result<Self> {
        if rows.contains(&0) {
            return Err(BbsError::InvalidArgument("partition rows must be positive".into()));
        }
        if rows.windows(2).any(|w| w[0] < w[1]) {
            return Err(BbsError::InvalidArgument("partition rows must be non-increasing".into()));
        }
        Ok(Self { rows })
    }

    /// Builds the partition whose column lengths are the given values in any order.
    pub fn from_columns(mut columns: Vec<usize>) -> Self {
        columns.retain(|&c| c > 0);
        columns.sort_unstable_by(|a, b| b.cmp(a));
        Self { rows: columns }.conjugate()
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Row `k` (1-based), zero past the last row.
    pub fn row(&self, k: usize) -> usize {
        k.checked_sub(1).and_then(|i| self.rows.get(i)).copied().unwrap_or(0)
    }

    /// Column lengths, non-increasing.
    pub fn columns(&self) -> Vec<usize> {
        self.conjugate().rows
    }

    /// Column `j` (1-based), zero past the last column.
    pub fn column(&self, j: usize) -> usize {
        if j == 0 {
            return 0;
        }
        self.rows.iter().take_while(|&&r| r >= j).count()
    }

    pub fn size(&self) -> usize {
        self.rows.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn conjugate(&self) -> Self {
        let width = self.rows.first().copied().unwrap_or(0);
        let mut cols = vec![0usize; width];
        for &r in &self.rows {
            for c in cols.iter_mut().take(r) {
                *c += 1;
            }
        }
        Self { rows: cols }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugate_of_worked_diagram() {
        let p = Partition::from_rows(vec![8, 5, 2, 1]).unwrap();
        assert_eq!(p.columns(), vec![4, 3, 2, 2, 2, 1, 1, 1]);
        assert_eq!(p.conjugate().conjugate(), p);
        assert_eq!(p.size(), 16);
        assert_eq!(p.column(1), 4);
        assert_eq!(p.column(9), 0);
        assert_eq!(p.row(5), 0);
    }

    #[test]
    fn from_columns_sorts() {
        let p = Partition::from_columns(vec![1, 3, 0, 2]);
        assert_eq!(p.rows(), &[3, 2, 1]);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(Partition::from_rows(vec![1, 2]).is_err());
        assert!(Partition::from_rows(vec![2, 0]).is_err());
        assert!(Partition::empty().conjugate().is_empty());
    }
}
