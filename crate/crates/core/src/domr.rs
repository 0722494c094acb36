//! Decrease-only repair: all-pairs shortest paths over the complete graph.
//!
//! The APSP closure is the unique maximal metric below the input, so its
//! perturbation is simultaneously the sparsest and the minimal-l_p
//! decrease-only repair.

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;
use crate::triangle::{broken_triangles, extend_broken, Triangle, DEFAULT_TOL};
use crate::Perturbation;

/// Result of a decrease-only repair.
#[derive(Debug, Clone)]
pub struct DomrResult {
    /// The APSP closure of the input; always metric.
    pub repaired: DistanceMatrix,
    /// `repaired - input`; all entries <= 0.
    pub perturbation: Perturbation,
    /// Relaxation tests performed.
    pub triangles_touched: usize,
    /// True when the prior-information pass left a broken triangle and the
    /// full Floyd-Warshall sweep was rerun.
    pub fell_back: bool,
}

/// Floyd-Warshall sweep for decrease-only repair. Loop order is k outer,
/// then i, then j < i; an edge is rewritten only on a strict violation
/// beyond the relative tolerance, so equalities survive untouched.
pub fn fw_domr(input: &DistanceMatrix) -> DomrResult {
    let n = input.n();
    let thr = DEFAULT_TOL * input.max_entry();
    let mut d = input.clone();
    let mut touched = 0usize;
    for k in 0..n {
        for i in 0..n {
            let dik = d.get(i, k);
            for j in 0..i {
                touched += 1;
                let cand = dik + d.get(k, j);
                if d.get(i, j) - cand > thr {
                    d.set(i, j, cand);
                }
            }
        }
    }
    let perturbation = Perturbation::diff(&d, input);
    DomrResult {
        repaired: d,
        perturbation,
        triangles_touched: touched,
        fell_back: false,
    }
}

/// Floyd-Warshall restricted to the extension of a known broken-triangle
/// set, one lexicographic pass. The caller supplies
/// `broken_triangles(input)` in its native order. A single pass does not
/// always settle everything (a rewrite can re-break a triangle processed
/// earlier), so after each pass a full scan verifies metricity and any
/// residual broken set seeds another restricted pass; work stays
/// proportional to the extensions actually processed rather than n^3.
/// The pass count is capped, with the full sweep as a last resort, and the
/// result is flagged whenever one pass was not enough.
pub fn fw_prior(input: &DistanceMatrix, broken: &[Triangle]) -> Result<DomrResult> {
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
    let mut touched = 0usize;
    let mut current: Vec<Triangle> = broken.to_vec();
    let passes = n.max(4);
    for pass in 0..passes {
        for t in extend_broken(&current, n) {
            touched += 1;
            let cand = d.get(t.i, t.k) + d.get(t.k, t.j);
            if d.get(t.i, t.j) - cand > thr {
                d.set(t.i, t.j, cand);
            }
        }
        current = broken_triangles(&d, DEFAULT_TOL);
        if current.is_empty() {
            let perturbation = Perturbation::diff(&d, input);
            return Ok(DomrResult {
                repaired: d,
                perturbation,
                triangles_touched: touched,
                fell_back: pass > 0,
            });
        }
    }
    let mut full = fw_domr(input);
    full.triangles_touched += touched;
    full.fell_back = true;
    Ok(full)
}
