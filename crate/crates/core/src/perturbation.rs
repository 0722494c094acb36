//! Sparse symmetric edge adjustments and their sparsity accounting.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;

/// Relative support threshold: an entry counts toward the sparsity of a
/// perturbation iff |value| > `SUPPORT_REL_THRESHOLD * scale`, where scale
/// is the largest entry of the matrix being repaired. LP solvers leave
/// tiny nonzero residues; this pins what "numeric zero" means.
pub const SUPPORT_REL_THRESHOLD: f64 = 1e-6;

/// Support threshold for a matrix of the given scale.
pub fn support_threshold(scale: f64) -> f64 {
    SUPPORT_REL_THRESHOLD * scale
}

/// Sparse symmetric matrix of signed edge adjustments, keyed on unordered
/// pairs `(i, j)` with `i < j`. No diagonal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    n: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl Perturbation {
    pub fn new(n: usize) -> Self {
        Perturbation {
            n,
            entries: BTreeMap::new(),
        }
    }

    /// Entrywise difference `repaired - original`, keeping pairs whose
    /// values differ bitwise.
    pub fn diff(repaired: &DistanceMatrix, original: &DistanceMatrix) -> Self {
        debug_assert_eq!(repaired.n(), original.n());
        let mut p = Perturbation::new(original.n());
        for (i, j, v) in original.pairs() {
            let r = repaired.get(i, j);
            if r.to_bits() != v.to_bits() {
                p.set(i, j, r - v);
            }
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i != j && i < self.n && j < self.n);
        let key = if i < j { (i, j) } else { (j, i) };
        if value == 0.0 {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.entries.get(&key).copied().unwrap_or(0.0)
    }

    /// Stored entries in ascending pair order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Stored pairs regardless of magnitude.
    pub fn support(&self) -> Vec<(usize, usize)> {
        self.entries.keys().copied().collect()
    }

    /// ||P||_0 over unordered pairs: entries with |value| > threshold.
    pub fn norm0(&self, threshold: f64) -> usize {
        self.entries.values().filter(|v| v.abs() > threshold).count()
    }

    /// ||P||_1 over unordered pairs.
    pub fn norm1(&self) -> f64 {
        self.entries.values().map(|v| v.abs()).sum()
    }

    pub fn min_value(&self) -> f64 {
        self.entries.values().copied().fold(0.0, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.entries.values().copied().fold(0.0, f64::max)
    }

    /// `d + P`, failing if an adjusted entry would go negative.
    pub fn apply(&self, d: &DistanceMatrix) -> Result<DistanceMatrix> {
        if d.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: d.n(),
            });
        }
        DistanceMatrix::from_fn(self.n, |i, j| d.get(i, j) + self.get(i, j))
    }
}
