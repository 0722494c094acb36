//! Increase-only repair: the direct raising sweep, oracle construction
//! heuristics, and oracle-guided repair that reduces to a decrease-only
//! problem on an upper-bound matrix.

use crate::domr::fw_domr;
use crate::error::{Error, Result};
use crate::matrix::{DistanceMatrix, OracleMask, SymMat};
use crate::perturbation::Perturbation;
use crate::triangle::{broken_triangles, extend_broken, violation_counts, Triangle, DEFAULT_TOL};

/// Result of an increase-only repair.
#[derive(Debug, Clone)]
pub struct IomrResult {
    pub repaired: DistanceMatrix,
    /// `repaired - input`; all entries >= 0.
    pub perturbation: Perturbation,
    /// Broken triangles left in `repaired`, recomputed by a full scan.
    /// Zero for the full sweep; oracle repair with an inexact oracle may
    /// leave some.
    pub residual_broken: usize,
}

/// Oracle construction heuristics for guessing which pairs were decreased.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStrategy {
    /// Greedy set cover driven by right-hand-side counts, recounted after
    /// each pick; ties go to the lexicographically smallest pair.
    Counting,
    /// Greedy set cover in a single pass over pairs ordered by their
    /// static right-hand-side count.
    Cover,
    /// Mark edges that shortest paths are routed through the most.
    Routing,
}

impl OracleStrategy {
    pub fn name(self) -> &'static str {
        match self {
            OracleStrategy::Counting => "counting",
            OracleStrategy::Cover => "cover",
            OracleStrategy::Routing => "routing",
        }
    }
}

/// Raising sweep: k outer, i, j < i; a broken triangle is fixed by lifting
/// the right-hand edge `{i, k}` to make the inequality tight.
pub fn iomr_repair(input: &DistanceMatrix) -> IomrResult {
    let n = input.n();
    let thr = DEFAULT_TOL * input.max_entry();
    let mut d = input.clone();
    for k in 0..n {
        for i in 0..n {
            for j in 0..i {
                let dkj = d.get(k, j);
                if d.get(i, j) - d.get(i, k) - dkj > thr {
                    let lifted = d.get(i, j) - dkj;
                    d.set(i, k, lifted);
                }
            }
        }
    }
    finish_increase(input, d)
}

/// Raising sweep restricted to the extension of a known broken-triangle
/// set, processed in lexicographic (apex, i, j) order. May leave residual
/// breaks; they are reported, not raised.
pub fn iomr_prior(input: &DistanceMatrix, broken: &[Triangle]) -> Result<IomrResult> {
    let n = input.n();
    for t in broken {
        if !t.is_valid(n) {
            return Err(Error::InvalidTriangle {
                i: t.i,
                j: t.j,
                k: t.k,
                n,
            });
        }
    }
    let thr = DEFAULT_TOL * input.max_entry();
    let mut d = input.clone();
    for t in extend_broken(broken, n) {
        // canonical edge {i, j} with i < j maps to sweep indices
        // (i_loop, j_loop) = (j, i): the lifted edge is {j, k}.
        if d.get(t.i, t.j) - d.get(t.i, t.k) - d.get(t.j, t.k) > thr {
            let lifted = d.get(t.i, t.j) - d.get(t.i, t.k);
            d.set(t.j, t.k, lifted);
        }
    }
    Ok(finish_increase(input, d))
}

fn finish_increase(input: &DistanceMatrix, repaired: DistanceMatrix) -> IomrResult {
    let residual = broken_triangles(&repaired, DEFAULT_TOL).len();
    let perturbation = Perturbation::diff(&repaired, input);
    IomrResult {
        repaired,
        perturbation,
        residual_broken: residual,
    }
}

/// Build an oracle mask of suspected-decreased pairs. Counting and Cover
/// guarantee every broken triangle has at least one right-hand edge marked;
/// Routing carries no coverage guarantee.
pub fn build_oracle(input: &DistanceMatrix, strategy: OracleStrategy) -> OracleMask {
    match strategy {
        OracleStrategy::Counting => counting_oracle(input),
        OracleStrategy::Cover => cover_oracle(input),
        OracleStrategy::Routing => routing_oracle(input),
    }
}

fn counting_oracle(input: &DistanceMatrix) -> OracleMask {
    let n = input.n();
    let mut q = OracleMask::new(n);
    let mut remaining = broken_triangles(input, DEFAULT_TOL);
    while !remaining.is_empty() {
        let mut counts: SymMat<u32> = SymMat::new(n);
        for t in &remaining {
            counts.set(t.i, t.k, counts.get(t.i, t.k) + 1);
            counts.set(t.j, t.k, counts.get(t.j, t.k) + 1);
        }
        let mut best = (0usize, 0usize);
        let mut best_count = 0u32;
        for i in 0..n {
            for j in (i + 1)..n {
                let c = counts.get(i, j);
                if c > best_count {
                    best_count = c;
                    best = (i, j);
                }
            }
        }
        q.mark(best.0, best.1);
        remaining.retain(|t| {
            let rhs = [(t.i.min(t.k), t.i.max(t.k)), (t.j.min(t.k), t.j.max(t.k))];
            !rhs.contains(&best)
        });
    }
    q
}

fn cover_oracle(input: &DistanceMatrix) -> OracleMask {
    let n = input.n();
    let counts = violation_counts(input, DEFAULT_TOL);
    let mut order: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if counts.right(i, j) > 0 {
                order.push((i, j));
            }
        }
    }
    order.sort_by(|a, b| {
        counts
            .right(b.0, b.1)
            .cmp(&counts.right(a.0, a.1))
            .then(a.cmp(b))
    });
    let mut q = OracleMask::new(n);
    let mut remaining = broken_triangles(input, DEFAULT_TOL);
    for pair in order {
        if remaining.is_empty() {
            break;
        }
        let before = remaining.len();
        remaining.retain(|t| {
            let rhs = [(t.i.min(t.k), t.i.max(t.k)), (t.j.min(t.k), t.j.max(t.k))];
            !rhs.contains(&pair)
        });
        if remaining.len() < before {
            q.mark(pair.0, pair.1);
        }
    }
    q
}

fn routing_oracle(input: &DistanceMatrix) -> OracleMask {
    let n = input.n();
    // Floyd-Warshall with witnesses: w(i,j) = last apex that rewrote (i,j).
    let thr = DEFAULT_TOL * input.max_entry();
    let mut d = input.clone();
    let mut witness: SymMat<usize> = SymMat::new(n);
    const DIRECT: usize = usize::MAX;
    for i in 0..n {
        for j in (i + 1)..n {
            witness.set(i, j, DIRECT);
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d.get(i, k);
            for j in 0..i {
                let cand = dik + d.get(k, j);
                if d.get(i, j) - cand > thr {
                    d.set(i, j, cand);
                    witness.set(i, j, k);
                }
            }
        }
    }
    // Count, over all ordered (s, t) pairs, how often each edge appears on
    // the expanded shortest path; direct single-edge paths do not count.
    let mut usage: SymMat<u64> = SymMat::new(n);
    fn expand(witness: &SymMat<usize>, s: usize, t: usize, edges: &mut Vec<(usize, usize)>) {
        let w = witness.get(s, t);
        if w == usize::MAX {
            edges.push((s.min(t), s.max(t)));
        } else {
            expand(witness, s, w, edges);
            expand(witness, w, t, edges);
        }
    }
    let mut edges = Vec::new();
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            edges.clear();
            expand(&witness, s, t, &mut edges);
            if edges.len() > 1 {
                for &(a, b) in &edges {
                    usage.set(a, b, usage.get(a, b) + 1);
                }
            }
        }
    }
    let mut nonzero: Vec<u64> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let u = usage.get(i, j);
            if u > 0 {
                nonzero.push(u);
            }
        }
    }
    let mut q = OracleMask::new(n);
    if nonzero.is_empty() {
        return q;
    }
    nonzero.sort_unstable();
    // nearest-rank 90th percentile of the nonzero usage counts
    let idx = ((nonzero.len() as f64) * 0.9).ceil() as usize;
    let p90 = nonzero[idx.saturating_sub(1).min(nonzero.len() - 1)];
    for i in 0..n {
        for j in (i + 1)..n {
            if usage.get(i, j) > p90 {
                q.mark(i, j);
            }
        }
    }
    q
}

/// True iff every marked pair lies in at least one triangle whose other
/// two edges are unmarked.
pub fn oracle_feasible(input: &DistanceMatrix, oracle: &OracleMask) -> bool {
    first_uncovered(input.n(), oracle).is_none()
}

fn first_uncovered(n: usize, oracle: &OracleMask) -> Option<(usize, usize)> {
    for i in 0..n {
        for j in (i + 1)..n {
            if !oracle.marked(i, j) {
                continue;
            }
            let clean = (0..n)
                .any(|k| k != i && k != j && !oracle.marked(i, k) && !oracle.marked(j, k));
            if !clean {
                return Some((i, j));
            }
        }
    }
    None
}

/// Oracle-guided increase-only repair: replace each marked entry with its
/// cheapest clean-apex upper bound, close with APSP, and keep unmarked
/// entries pinned. The perturbation is nonnegative and supported only on
/// marked pairs; with an exact-support oracle the result is metric.
pub fn oracle_iomr(input: &DistanceMatrix, oracle: &OracleMask) -> Result<IomrResult> {
    let n = input.n();
    if oracle.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: oracle.n(),
        });
    }
    if let Some((i, j)) = first_uncovered(n, oracle) {
        return Err(Error::InfeasibleOracle { i, j });
    }
    let upper = DistanceMatrix::from_fn(n, |i, j| {
        if !oracle.marked(i, j) {
            return input.get(i, j);
        }
        let mut best = f64::INFINITY;
        for k in 0..n {
            if k == i || k == j || oracle.marked(i, k) || oracle.marked(j, k) {
                continue;
            }
            best = best.min(input.get(i, k) + input.get(j, k));
        }
        best
    })
    .expect("clean-apex bounds are finite for a feasible oracle");
    let closed = fw_domr(&upper).repaired;
    // Pin unmarked entries and never go below the input: both are no-ops
    // when the oracle matches the true corruption support.
    let repaired = DistanceMatrix::from_fn(n, |i, j| {
        if oracle.marked(i, j) {
            closed.get(i, j).max(input.get(i, j))
        } else {
            input.get(i, j)
        }
    })
    .expect("entries stay nonnegative");
    Ok(finish_increase(input, repaired))
}
