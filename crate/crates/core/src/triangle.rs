//! Labeled triangle inequalities and the O(n^3) scans over them.

use std::collections::BTreeSet;

use crate::matrix::{DistanceMatrix, SymMat};

/// Default relative tolerance: a triangle counts as broken iff
/// `d_ij - d_ik - d_jk > tol * scale` with scale the largest entry.
/// Strict violation keeps equality-satisfying semi-metrics valid.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A labeled triangle inequality: `d_ij <= d_ik + d_jk`. The left-hand
/// edge is `{i, j}` (canonically `i < j`), the apex is `k`. Triangle
/// `ijk` equals `jik` but differs from `ikj` and `jki`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triangle {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl Triangle {
    /// Canonicalizes the edge endpoints; panics on a degenerate triple.
    pub fn new(a: usize, b: usize, apex: usize) -> Self {
        assert!(a != b && apex != a && apex != b, "degenerate triangle");
        Triangle {
            i: a.min(b),
            j: a.max(b),
            k: apex,
        }
    }

    pub fn is_valid(&self, n: usize) -> bool {
        self.i < self.j && self.j < n && self.k < n && self.k != self.i && self.k != self.j
    }

    /// Signed violation `d_ij - d_ik - d_jk`; positive means broken.
    #[inline]
    pub fn violation(&self, d: &DistanceMatrix) -> f64 {
        d.get(self.i, self.j) - d.get(self.i, self.k) - d.get(self.j, self.k)
    }

    /// Sort key matching the scan output order.
    fn key(&self) -> (usize, usize, usize) {
        (self.k, self.i, self.j)
    }
}

/// Number of labeled triangles on `n` vertices: n(n-1)(n-2)/2.
pub fn triangle_count(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 2
    }
}

/// True iff no triangle is broken: `d_ij > d_ik + d_jk + tol * scale`
/// holds for no labeled triangle. Equalities pass (semi-metric).
pub fn is_metric(d: &DistanceMatrix, tol: f64) -> bool {
    let n = d.n();
    let thr = tol * d.max_entry();
    for k in 0..n {
        for i in 0..n {
            if i == k {
                continue;
            }
            let dik = d.get(i, k);
            for j in (i + 1)..n {
                if j == k {
                    continue;
                }
                if d.get(i, j) - dik - d.get(j, k) > thr {
                    return false;
                }
            }
        }
    }
    true
}

/// All broken triangles, sorted lexicographically by (apex, i, j).
pub fn broken_triangles(d: &DistanceMatrix, tol: f64) -> Vec<Triangle> {
    let n = d.n();
    let thr = tol * d.max_entry();
    let mut out = Vec::new();
    for k in 0..n {
        for i in 0..n {
            if i == k {
                continue;
            }
            let dik = d.get(i, k);
            for j in (i + 1)..n {
                if j == k {
                    continue;
                }
                if d.get(i, j) - dik - d.get(j, k) > thr {
                    out.push(Triangle { i, j, k });
                }
            }
        }
    }
    out
}

/// Per-pair counts of how often an edge appears on the left (`l`) or the
/// right (`r`) of a broken triangle inequality.
#[derive(Debug, Clone)]
pub struct ViolationCounts {
    l: SymMat<u32>,
    r: SymMat<u32>,
}

impl ViolationCounts {
    pub fn n(&self) -> usize {
        self.l.n()
    }

    pub fn left(&self, i: usize, j: usize) -> u32 {
        self.l.get(i, j)
    }

    pub fn right(&self, i: usize, j: usize) -> u32 {
        self.r.get(i, j)
    }

    /// Sum of left counts over unordered pairs; equals |T(D)|.
    pub fn total_left(&self) -> u64 {
        let n = self.n();
        let mut s = 0u64;
        for i in 0..n {
            for j in (i + 1)..n {
                s += self.l.get(i, j) as u64;
            }
        }
        s
    }

    /// Sum of right counts over unordered pairs; equals 2|T(D)|.
    pub fn total_right(&self) -> u64 {
        let n = self.n();
        let mut s = 0u64;
        for i in 0..n {
            for j in (i + 1)..n {
                s += self.r.get(i, j) as u64;
            }
        }
        s
    }
}

/// For each broken triangle (edge ij, apex k): increment `l_ij`, `r_ik`
/// and `r_jk` once.
pub fn violation_counts(d: &DistanceMatrix, tol: f64) -> ViolationCounts {
    let n = d.n();
    let mut counts = ViolationCounts {
        l: SymMat::new(n),
        r: SymMat::new(n),
    };
    for t in broken_triangles(d, tol) {
        counts.l.set(t.i, t.j, counts.l.get(t.i, t.j) + 1);
        counts.r.set(t.i, t.k, counts.r.get(t.i, t.k) + 1);
        counts.r.set(t.j, t.k, counts.r.get(t.j, t.k) + 1);
    }
    counts
}

/// Extend a triangle set with every triangle whose right-hand side uses a
/// left-hand edge of the input: for each left edge {i,j} and each l outside
/// it, add (edge {l,i}, apex j) and (edge {l,j}, apex i). Deduplicated,
/// sorted by (apex, i, j).
pub fn extend_broken(triangles: &[Triangle], n: usize) -> Vec<Triangle> {
    let mut set: BTreeSet<(usize, usize, usize)> = triangles.iter().map(|t| t.key()).collect();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for t in triangles {
        edges.insert((t.i, t.j));
    }
    for &(i, j) in &edges {
        for l in 0..n {
            if l == i || l == j {
                continue;
            }
            set.insert(Triangle::new(l, i, j).key());
            set.insert(Triangle::new(l, j, i).key());
        }
    }
    set.into_iter()
        .map(|(k, i, j)| Triangle { i, j, k })
        .collect()
}

/// The additive-shift constant: `max(0, max over triangles of
/// d_ij - d_ik - d_jk)`. Adding it to every off-diagonal entry yields
/// a metric.
pub fn max_violation(d: &DistanceMatrix) -> f64 {
    let n = d.n();
    let mut worst = 0.0f64;
    for k in 0..n {
        for i in 0..n {
            if i == k {
                continue;
            }
            let dik = d.get(i, k);
            for j in (i + 1)..n {
                if j == k {
                    continue;
                }
                worst = worst.max(d.get(i, j) - dik - d.get(j, k));
            }
        }
    }
    worst
}
