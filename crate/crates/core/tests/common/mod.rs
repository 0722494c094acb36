//! Shared test oracles, independent of the implementation paths they check.
#![allow(dead_code)] // each test target uses its own subset

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use metric_repair::instances::{gen_metric, perturb, CorruptionSign, CorruptionSpec, InstanceKind, InstanceSpec};
use metric_repair::l1::{solve_lp, LpConstraint, LpInstance, SolverStatus};
use metric_repair::{fw_domr, DistanceMatrix, Perturbation};

/// Independent APSP: binary-heap Dijkstra from every source over the
/// complete graph. Only shares the input with Floyd-Warshall.
pub fn dijkstra_apsp(d: &DistanceMatrix) -> Vec<Vec<f64>> {
    let n = d.n();
    let mut out = Vec::with_capacity(n);
    for s in 0..n {
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[s] = 0.0;
        // nonnegative floats order like their bit patterns
        let mut heap: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
        heap.push(Reverse((0, s)));
        while let Some(Reverse((bits, v))) = heap.pop() {
            if done[v] {
                continue;
            }
            done[v] = true;
            let dv = f64::from_bits(bits);
            for w in 0..n {
                if w == v || done[w] {
                    continue;
                }
                let cand = dv + d.get(v, w);
                if cand < dist[w] {
                    dist[w] = cand;
                    heap.push(Reverse((cand.to_bits(), w)));
                }
            }
        }
        out.push(dist);
    }
    out
}

/// Grain that keeps unit-scale arithmetic exact through long sums.
pub const DYADIC_GRAIN: f64 = 1048576.0; // 2^20

/// Snap every entry to a multiple of 1/2^20 so that sums and differences
/// of generated values are exact in f64.
pub fn quantize(d: &DistanceMatrix) -> DistanceMatrix {
    DistanceMatrix::from_fn(d.n(), |i, j| (d.get(i, j) * DYADIC_GRAIN).round() / DYADIC_GRAIN)
        .unwrap()
}

/// A dyadic exactly-metric base matrix: quantize a Euclidean cloud, then
/// close it with APSP (quantization can break near-tight triangles; the
/// closure restores metricity without leaving the dyadic grid).
pub fn dyadic_metric(n: usize, seed: u64) -> DistanceMatrix {
    let spec = InstanceSpec {
        kind: InstanceKind::Euclidean { dim: 2 },
        n,
        seed,
    };
    let d = quantize(&gen_metric(&spec).unwrap());
    fw_domr(&d).repaired
}

/// Corrupt a dyadic metric with dyadic values: returns (clean, corrupted,
/// corruption) where every matrix entry and every sum of interest is exact.
pub fn dyadic_corrupted(
    n: usize,
    k: usize,
    sign: CorruptionSign,
    seed: u64,
) -> (DistanceMatrix, DistanceMatrix, Perturbation) {
    let d = dyadic_metric(n, seed);
    let spec = CorruptionSpec {
        k,
        sign,
        scale: 0.125,
        seed,
    };
    let (_, delta_raw) = perturb(&d, &spec).unwrap();
    let mut delta = Perturbation::new(n);
    for (i, j, v) in delta_raw.iter() {
        let q = (v * DYADIC_GRAIN).round() / DYADIC_GRAIN;
        // keep entries nonnegative and the support size exactly k
        let q = if d.get(i, j) + q < 0.0 { -d.get(i, j) } else { q };
        let q = if q == 0.0 { 1.0 / DYADIC_GRAIN } else { q };
        delta.set(i, j, q);
    }
    let dp = delta.apply(&d).unwrap();
    (d, dp, delta)
}

/// LP feasibility oracle: does a decrease-only perturbation supported on
/// `support` exist that makes `dp` metric? Builds an explicit instance
/// over one decrease amount per support pair and asks the solver for any
/// feasible point.
pub fn decrease_support_feasible(dp: &DistanceMatrix, support: &[(usize, usize)]) -> bool {
    let n = dp.n();
    let var_of = |i: usize, j: usize| -> Option<usize> {
        let key = (i.min(j), i.max(j));
        support.iter().position(|&p| p == key)
    };
    let mut constraints = Vec::new();
    for k in 0..n {
        for i in 0..n {
            if i == k {
                continue;
            }
            for j in (i + 1)..n {
                if j == k {
                    continue;
                }
                // (dp_ij - x_ij) <= (dp_ik - x_ik) + (dp_jk - x_jk)
                let mut coeffs = Vec::new();
                if let Some(v) = var_of(i, j) {
                    coeffs.push((v, -1.0));
                }
                if let Some(v) = var_of(i, k) {
                    coeffs.push((v, 1.0));
                }
                if let Some(v) = var_of(j, k) {
                    coeffs.push((v, 1.0));
                }
                let rhs = dp.get(i, k) + dp.get(j, k) - dp.get(i, j);
                if coeffs.is_empty() && rhs < 0.0 {
                    return false; // broken triangle no support pair can fix
                }
                constraints.push(LpConstraint {
                    coeffs,
                    rhs,
                    name: String::new(),
                });
            }
        }
    }
    for (v, &(i, j)) in support.iter().enumerate() {
        constraints.push(LpConstraint {
            coeffs: vec![(v, 1.0)],
            rhs: dp.get(i, j),
            name: String::new(),
        });
    }
    let lp = LpInstance {
        num_vars: support.len(),
        objective: vec![0.0; support.len()],
        constraints,
        fixed_zero: vec![false; support.len()],
        layout: None,
    };
    matches!(solve_lp(&lp), Ok(r) if r.status == SolverStatus::Optimal)
}

/// Brute-force check that some single-pair change repairs `dp`: pair
/// (a, b) works iff the interval
/// `[max(0, max_i |d_ai - d_bi|), min_k (d_ak + d_bk)]` is nonempty and
/// every triangle not involving (a, b) already holds.
pub fn one_sparse_repair_exists(dp: &DistanceMatrix) -> bool {
    let n = dp.n();
    'pairs: for a in 0..n {
        for b in (a + 1)..n {
            for k in 0..n {
                if k == a || k == b {
                    continue;
                }
                for i in 0..n {
                    if i == k || i == a || i == b {
                        continue;
                    }
                    for j in (i + 1)..n {
                        if j == k || (i.min(j), i.max(j)) == (a, b) {
                            continue;
                        }
                        let uses_ab = |x: usize, y: usize| (x.min(y), x.max(y)) == (a, b);
                        if !uses_ab(i, k) && !uses_ab(j, k) && dp.get(i, j) > dp.get(i, k) + dp.get(j, k) {
                            continue 'pairs; // broken triangle untouched by (a, b)
                        }
                    }
                }
            }
            let mut lo = 0.0f64;
            let mut hi = f64::INFINITY;
            for k in 0..n {
                if k == a || k == b {
                    continue;
                }
                lo = lo.max((dp.get(a, k) - dp.get(b, k)).abs());
                hi = hi.min(dp.get(a, k) + dp.get(b, k));
            }
            if lo <= hi {
                return true;
            }
        }
    }
    false
}
