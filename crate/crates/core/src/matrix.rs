//! Dense symmetric matrix storage and the validated distance-matrix type.

use crate::error::{Error, Result};

/// Packed symmetric matrix: upper triangle including the diagonal,
/// row-major. Symmetry holds by construction since (i,j) and (j,i)
/// share a slot.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SymMat<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> SymMat<T> {
    pub fn new(n: usize) -> Self {
        SymMat {
            n,
            data: vec![T::default(); n * (n + 1) / 2],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        debug_assert!(b < self.n);
        a * self.n - a * (a + 1) / 2 + b
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[self.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        let k = self.idx(i, j);
        self.data[k] = value;
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Symmetric nonnegative matrix with zero diagonal: the object being
/// validated and repaired. Whether it satisfies the triangle inequalities
/// is a queryable property, not an invariant; equality `d_ij = d_ik + d_jk`
/// is allowed (semi-metric).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    mat: SymMat<f64>,
}

impl DistanceMatrix {
    /// Build from full square rows. Requires exact symmetry, a zero
    /// diagonal and finite nonnegative entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                    row: i,
                });
            }
        }
        let mut mat = SymMat::new(n);
        for (i, row) in rows.iter().enumerate() {
            let d = row[i];
            if d != 0.0 {
                return Err(Error::NonZeroDiagonal { i, value: d });
            }
            for (j, &v) in row.iter().enumerate().skip(i + 1) {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::BadEntry { i, j, value: v });
                }
                if rows[j][i].to_bits() != v.to_bits() {
                    return Err(Error::Asymmetric {
                        i,
                        j,
                        upper: v,
                        lower: rows[j][i],
                    });
                }
                mat.set(i, j, v);
            }
        }
        Ok(DistanceMatrix { mat })
    }

    /// Build from the strict upper triangle in row-major pair order:
    /// (0,1), (0,2), ..., (0,n-1), (1,2), ...
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if upper.len() != n * (n - 1) / 2 {
            return Err(Error::DimensionMismatch {
                expected: n * (n - 1) / 2,
                actual: upper.len(),
            });
        }
        let mut mat = SymMat::new(n);
        let mut t = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = upper[t];
                t += 1;
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::BadEntry { i, j, value: v });
                }
                mat.set(i, j, v);
            }
        }
        Ok(DistanceMatrix { mat })
    }

    /// Symmetric constructor from a pair function; `f(i, j)` is called once
    /// per unordered pair with `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut mat = SymMat::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::BadEntry { i, j, value: v });
                }
                mat.set(i, j, v);
            }
        }
        Ok(DistanceMatrix { mat })
    }

    pub fn n(&self) -> usize {
        self.mat.n()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mat.get(i, j)
    }

    /// Overwrite an off-diagonal entry (both orientations at once).
    /// Internal: repair sweeps rely on it and keep entries nonnegative.
    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i != j);
        self.mat.set(i, j, value);
    }

    /// Largest entry; the scale used by relative tolerances.
    pub fn max_entry(&self) -> f64 {
        let n = self.n();
        let mut m = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                m = m.max(self.get(i, j));
            }
        }
        m
    }

    /// Iterate unordered pairs `(i, j, d_ij)` with `i < j` in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j, self.get(i, j))))
    }

    pub fn pair_count(&self) -> usize {
        let n = self.n();
        n * (n - 1) / 2
    }

    /// Full square rows, for serialization.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { self.get(i, j) }).collect())
            .collect()
    }
}

/// 0/1 symmetric mask with zero diagonal marking suspected-corrupted pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleMask {
    mat: SymMat<u8>,
}

impl OracleMask {
    pub fn new(n: usize) -> Self {
        OracleMask { mat: SymMat::new(n) }
    }

    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut q = OracleMask::new(n);
        for &(i, j) in pairs {
            if i == j || i >= n || j >= n {
                return Err(Error::InvalidTriangle { i, j, k: i, n });
            }
            q.mat.set(i, j, 1);
        }
        Ok(q)
    }

    pub fn n(&self) -> usize {
        self.mat.n()
    }

    #[inline]
    pub fn marked(&self, i: usize, j: usize) -> bool {
        i != j && self.mat.get(i, j) == 1
    }

    pub fn mark(&mut self, i: usize, j: usize) {
        debug_assert!(i != j);
        self.mat.set(i, j, 1);
    }

    /// Marked unordered pairs, ascending.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.marked(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn count(&self) -> usize {
        self.pairs().len()
    }
}
