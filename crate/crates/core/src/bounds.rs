//! Size bounds and the search-node budget shared by every bounded operation.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use thiserror::Error;

use crate::grid::Word;

pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoundsError {
    #[error("bounds must be positive")]
    NotPositive,
    #[error("max cells {cells} exceeds max rows x max cols = {area}")]
    CellsExceedArea { cells: usize, area: usize },
}

/// Bounding-box and cell-count limits applied to every word a bounded
/// operation produces, intermediate results included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bounds {
    pub max_rows: usize,
    pub max_cols: usize,
    pub max_cells: usize,
    pub node_budget: u64,
}

impl Bounds {
    pub fn new(max_rows: usize, max_cols: usize, max_cells: usize) -> Result<Bounds, BoundsError> {
        if max_rows == 0 || max_cols == 0 || max_cells == 0 {
            return Err(BoundsError::NotPositive);
        }
        let area = max_rows.saturating_mul(max_cols);
        if max_cells > area {
            return Err(BoundsError::CellsExceedArea { cells: max_cells, area });
        }
        Ok(Bounds { max_rows, max_cols, max_cells, node_budget: DEFAULT_NODE_BUDGET })
    }

    /// A `rows x cols` box with no separate cell limit.
    pub fn rect(max_rows: usize, max_cols: usize) -> Result<Bounds, BoundsError> {
        Bounds::new(max_rows, max_cols, max_rows.saturating_mul(max_cols))
    }

    /// No size limits and the default node budget.
    pub fn unbounded() -> Bounds {
        Bounds { max_rows: usize::MAX, max_cols: usize::MAX, max_cells: usize::MAX, node_budget: DEFAULT_NODE_BUDGET }
    }

    pub fn with_budget(mut self, node_budget: u64) -> Bounds {
        self.node_budget = node_budget;
        self
    }

    #[inline]
    pub fn fits_dims(&self, rows: usize, cols: usize, cells: usize) -> bool {
        rows <= self.max_rows && cols <= self.max_cols && cells <= self.max_cells
    }

    pub fn fits(&self, w: &Word) -> bool {
        self.fits_dims(w.rows(), w.cols(), w.len())
    }

    /// True when every word within `self` is also within `other`.
    pub fn within(&self, other: &Bounds) -> bool {
        self.max_rows <= other.max_rows && self.max_cols <= other.max_cols && self.max_cells <= other.max_cells
    }
}

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
#[error("node budget of {limit} search nodes exhausted")]
pub struct BudgetExhausted {
    pub limit: u64,
}

/// Thread-safe node counter. Once exhausted it stays exhausted.
#[derive(Debug)]
pub struct Budget {
    used: AtomicU64,
    limit: u64,
    tripped: AtomicBool,
}

impl Budget {
    pub fn new(limit: u64) -> Budget {
        Budget { used: AtomicU64::new(0), limit, tripped: AtomicBool::new(false) }
    }

    pub fn charge(&self, nodes: u64) -> Result<(), BudgetExhausted> {
        if nodes == 0 {
            return self.check();
        }
        let used = self.used.fetch_add(nodes, Ordering::Relaxed) + nodes;
        if used > self.limit {
            self.tripped.store(true, Ordering::Relaxed);
            return Err(BudgetExhausted { limit: self.limit });
        }
        Ok(())
    }

    pub fn check(&self) -> Result<(), BudgetExhausted> {
        if self.tripped.load(Ordering::Relaxed) {
            Err(BudgetExhausted { limit: self.limit })
        } else {
            Ok(())
        }
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_validation() {
        assert_eq!(Bounds::new(0, 1, 1), Err(BoundsError::NotPositive));
        assert_eq!(Bounds::new(2, 2, 5), Err(BoundsError::CellsExceedArea { cells: 5, area: 4 }));
        let b = Bounds::new(3, 4, 12).unwrap();
        assert!(b.fits_dims(3, 4, 12));
        assert!(!b.fits_dims(4, 1, 4));
        assert!(Bounds::rect(2, 2).unwrap().within(&b));
    }

    #[test]
    fn budget_trips_and_stays_tripped() {
        let b = Budget::new(10);
        assert!(b.charge(10).is_ok());
        assert!(b.charge(1).is_err());
        assert!(b.check().is_err());
    }
}
