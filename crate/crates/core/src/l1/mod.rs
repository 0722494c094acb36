//! Convex-relaxation baselines: the metric-cone LP, l1-minimal repair in
//! all three modes, and iteratively reweighted l1, backed by an internal
//! dense LP solver.
//!
//! [`build_metric_lp`] materializes the full polyhedron (one constraint per
//! labeled triangle plus one nonnegativity row per pair) and is what
//! [`solve_lp`] and the LP export operate on; it is practical up to
//! n of about 20. [`l1_repair`] and [`irl1_repair`] solve the same problem
//! by lazy row generation (triangle constraints are added only when the
//! current iterate violates them), which keeps the active LP small at
//! desk scale.

mod export;
mod simplex;

pub use export::write_lp;
pub use simplex::SolverStatus;

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// A triangle key in scan order: (apex, i, j) with i < j.
type TriangleKey = (usize, usize, usize);
use crate::matrix::DistanceMatrix;
use crate::perturbation::{support_threshold, Perturbation};
use crate::RepairMode;

/// Default number of reweighting iterations.
pub const IRL1_DEFAULT_ITERS: usize = 10;

/// Default reweighting stabilizer, relative to the matrix scale.
pub fn irl1_default_eps(scale: f64) -> f64 {
    1e-3 * scale
}

/// One `<=` constraint over the split perturbation components.
#[derive(Debug, Clone)]
pub struct LpConstraint {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
    pub name: String,
}

/// Linear program over perturbation components split into nonnegative
/// parts: pair q maps to columns `2q` (positive part) and `2q + 1`
/// (negative part), pairs ordered lexicographically. Mode fixings pin the
/// forbidden part of every pair to zero.
#[derive(Debug, Clone)]
pub struct LpInstance {
    pub num_vars: usize,
    /// Objective weight per component; all weights >= 0.
    pub objective: Vec<f64>,
    pub constraints: Vec<LpConstraint>,
    pub fixed_zero: Vec<bool>,
    /// Present when built from a distance matrix; names components.
    pub layout: Option<PairLayout>,
}

#[derive(Debug, Clone, Copy)]
pub struct PairLayout {
    pub n: usize,
    pub mode: RepairMode,
}

impl LpInstance {
    /// Total constraint count including mode fixings.
    pub fn constraint_count(&self) -> usize {
        self.constraints.len() + self.fixed_zero.iter().filter(|&&f| f).count()
    }
}

/// Strict-upper-triangle pair index: (i, j) with i < j.
#[inline]
pub(crate) fn pair_index(i: usize, j: usize, n: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (n - 1) - i * (i + 1) / 2 + j - 1
}

/// Unit weights for `build_metric_lp`.
pub fn unit_weights(n: usize) -> Vec<f64> {
    vec![1.0; n * (n - 1) / 2]
}

/// Materialize the metric-repair LP: minimize `sum w_ij |P_ij|` subject to
/// every labeled triangle inequality of `dp + P` and `P_ij >= -dp_ij`,
/// with the mode's sign fixings. `weights` is pair-ordered (see
/// [`pair_index`]), one nonnegative weight per unordered pair.
pub fn build_metric_lp(dp: &DistanceMatrix, mode: RepairMode, weights: &[f64]) -> LpInstance {
    let n = dp.n();
    let pairs = n * (n - 1) / 2;
    assert_eq!(weights.len(), pairs, "one weight per unordered pair");
    assert!(weights.iter().all(|&w| w >= 0.0), "weights must be nonnegative");
    let num_vars = 2 * pairs;
    let mut objective = vec![0.0; num_vars];
    for (q, &w) in weights.iter().enumerate() {
        objective[2 * q] = w;
        objective[2 * q + 1] = w;
    }
    let mut constraints = Vec::with_capacity(crate::triangle::triangle_count(n) + pairs);
    for k in 0..n {
        for i in 0..n {
            if i == k {
                continue;
            }
            for j in (i + 1)..n {
                if j == k {
                    continue;
                }
                constraints.push(triangle_constraint(dp, i, j, k));
            }
        }
    }
    for (i, j, v) in dp.pairs() {
        let q = pair_index(i, j, n);
        constraints.push(LpConstraint {
            coeffs: vec![(2 * q, -1.0), (2 * q + 1, 1.0)],
            rhs: v,
            name: format!("nneg_{}_{}", i + 1, j + 1),
        });
    }
    let mut fixed_zero = vec![false; num_vars];
    for q in 0..pairs {
        match mode {
            RepairMode::DecreaseOnly => fixed_zero[2 * q] = true,
            RepairMode::IncreaseOnly => fixed_zero[2 * q + 1] = true,
            RepairMode::General => {}
        }
    }
    LpInstance {
        num_vars,
        objective,
        constraints,
        fixed_zero,
        layout: Some(PairLayout { n, mode }),
    }
}

/// Triangle (edge ij, apex k): `P_ij - P_ik - P_jk <= dp_ik + dp_jk - dp_ij`.
fn triangle_constraint(dp: &DistanceMatrix, i: usize, j: usize, k: usize) -> LpConstraint {
    let n = dp.n();
    let q_ij = pair_index(i, j, n);
    let q_ik = pair_index(i.min(k), i.max(k), n);
    let q_jk = pair_index(j.min(k), j.max(k), n);
    LpConstraint {
        coeffs: vec![
            (2 * q_ij, 1.0),
            (2 * q_ij + 1, -1.0),
            (2 * q_ik, -1.0),
            (2 * q_ik + 1, 1.0),
            (2 * q_jk, -1.0),
            (2 * q_jk + 1, 1.0),
        ],
        rhs: dp.get(i, k) + dp.get(j, k) - dp.get(i, j),
        name: format!("tri_{}_{}_{}", i + 1, j + 1, k + 1),
    }
}

/// Result of an LP solve over an explicit [`LpInstance`].
#[derive(Debug, Clone)]
pub struct LpSolveResult {
    pub status: SolverStatus,
    /// Component values in instance order (empty unless optimal).
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Solve an explicit instance with the internal dual simplex. Fixed
/// components are eliminated before the solve and restored as zeros.
pub fn solve_lp(lp: &LpInstance) -> Result<LpSolveResult> {
    // compress out fixed columns
    let mut map = vec![usize::MAX; lp.num_vars];
    let mut cost = Vec::new();
    for (j, slot) in map.iter_mut().enumerate() {
        if !lp.fixed_zero[j] {
            *slot = cost.len();
            cost.push(lp.objective[j]);
        }
    }
    let rows: Vec<simplex::Row> = lp
        .constraints
        .iter()
        .map(|c| simplex::Row {
            coeffs: c
                .coeffs
                .iter()
                .filter(|(j, _)| map[*j] != usize::MAX)
                .map(|&(j, v)| (map[j], v))
                .collect(),
            rhs: c.rhs,
        })
        .collect();
    let upper = vec![f64::INFINITY; cost.len()];
    let sol = simplex::solve_bounded(&cost, &upper, &rows, 0)?;
    let mut x = vec![0.0; lp.num_vars];
    if sol.status == SolverStatus::Optimal {
        for j in 0..lp.num_vars {
            if map[j] != usize::MAX {
                x[j] = sol.x[map[j]];
            }
        }
    }
    Ok(LpSolveResult {
        status: sol.status,
        x,
        objective: sol.objective,
    })
}

/// Result of an l1 or reweighted-l1 repair.
#[derive(Debug, Clone)]
pub struct L1Result {
    pub perturbation: Perturbation,
    /// Unweighted l1 norm of the returned perturbation.
    pub objective_value: f64,
    /// LP solves performed (1 for plain l1).
    pub iterations: usize,
    pub solver_status: SolverStatus,
}

impl L1Result {
    /// `dp + P`, clamping the sub-roundoff negatives the solver can leave.
    pub fn repaired(&self, dp: &DistanceMatrix) -> DistanceMatrix {
        DistanceMatrix::from_fn(dp.n(), |i, j| {
            (dp.get(i, j) + self.perturbation.get(i, j)).max(0.0)
        })
        .expect("perturbed entries stay nonnegative")
    }
}

/// Minimal-l1 repair in the given mode.
pub fn l1_repair(dp: &DistanceMatrix, mode: RepairMode) -> Result<L1Result> {
    let pairs = dp.pair_count();
    let seed = BTreeSet::new();
    let (p, status, _) = weighted_repair(dp, mode, &vec![1.0; pairs], &seed)?;
    Ok(L1Result {
        objective_value: p.norm1(),
        perturbation: p,
        iterations: 1,
        solver_status: status,
    })
}

/// Iteratively reweighted l1: iteration 1 uses unit weights, after that
/// `w_ij = 1 / (|P_ij| + eps)`. Stops early once the support stabilizes
/// between iterations.
pub fn irl1_repair(
    dp: &DistanceMatrix,
    mode: RepairMode,
    iters: usize,
    eps: f64,
) -> Result<L1Result> {
    assert!(iters >= 1, "at least one iteration");
    assert!(eps > 0.0, "eps must be positive");
    let pairs = dp.pair_count();
    let thr = support_threshold(dp.max_entry());
    let mut weights = vec![1.0; pairs];
    // rows binding at the previous optimum seed the next iteration
    let mut seed = BTreeSet::new();
    let mut prev_support: Option<Vec<(usize, usize)>> = None;
    let mut last: Option<(Perturbation, SolverStatus)> = None;
    let mut performed = 0;
    for _ in 0..iters {
        let (p, status, binding) = weighted_repair(dp, mode, &weights, &seed)?;
        seed = binding;
        performed += 1;
        if status != SolverStatus::Optimal {
            return Ok(L1Result {
                perturbation: Perturbation::new(dp.n()),
                objective_value: 0.0,
                iterations: performed,
                solver_status: status,
            });
        }
        let support: Vec<(usize, usize)> = p
            .iter()
            .filter(|&(_, _, v)| v.abs() > thr)
            .map(|(i, j, _)| (i, j))
            .collect();
        if p.is_empty() {
            // the input was already metric; reweighting cannot move it
            return Ok(L1Result {
                objective_value: 0.0,
                perturbation: p,
                iterations: performed,
                solver_status: status,
            });
        }
        let stable = prev_support.as_deref() == Some(&support[..]);
        for i in 0..dp.n() {
            for j in (i + 1)..dp.n() {
                let q = pair_index(i, j, dp.n());
                weights[q] = 1.0 / (p.get(i, j).abs() + eps);
            }
        }
        prev_support = Some(support);
        last = Some((p, status));
        if stable && performed >= 2 {
            break;
        }
    }
    let (p, status) = last.expect("at least one iteration ran");
    Ok(L1Result {
        objective_value: p.norm1(),
        perturbation: p,
        iterations: performed,
        solver_status: status,
    })
}

/// Column layout used by the row-generation path: per pair, the parts the
/// mode allows. Negative parts are capped by the entry value so distances
/// stay nonnegative without explicit rows.
struct Columns {
    /// (pair, is_negative_part) per solver column.
    meta: Vec<(usize, bool)>,
    /// solver column of the positive / negative part per pair (usize::MAX
    /// when the mode forbids it).
    pos: Vec<usize>,
    neg: Vec<usize>,
}

fn layout_columns(n: usize, mode: RepairMode) -> Columns {
    let pairs = n * (n - 1) / 2;
    let mut meta = Vec::new();
    let mut pos = vec![usize::MAX; pairs];
    let mut neg = vec![usize::MAX; pairs];
    for q in 0..pairs {
        if mode != RepairMode::DecreaseOnly {
            pos[q] = meta.len();
            meta.push((q, false));
        }
        if mode != RepairMode::IncreaseOnly {
            neg[q] = meta.len();
            meta.push((q, true));
        }
    }
    Columns { meta, pos, neg }
}

type WeightedRepairOutcome = (Perturbation, SolverStatus, BTreeSet<TriangleKey>);

/// Solve `min sum w_ij |P_ij|` over the metric polyhedron by lazy row
/// generation: solve over a working set of triangle constraints, add the
/// most violated triangle per offending pair, re-optimize warm, repeat
/// until the repaired matrix scans clean. Returns the perturbation and the
/// triangles binding at the optimum (a good seed for a reweighted solve).
fn weighted_repair(
    dp: &DistanceMatrix,
    mode: RepairMode,
    weights: &[f64],
    seed: &BTreeSet<TriangleKey>,
) -> Result<WeightedRepairOutcome> {
    let n = dp.n();
    let scale = dp.max_entry();
    let add_tol = 5e-9 * scale;
    let cols = layout_columns(n, mode);
    let mut working = seed.clone();
    seed_working_set(dp, &mut working, add_tol);
    let cost: Vec<f64> = cols.meta.iter().map(|&(q, _)| weights[q]).collect();
    let mut upper = vec![f64::INFINITY; cols.meta.len()];
    for (c, &(q, negative)) in cols.meta.iter().enumerate() {
        if negative {
            upper[c] = pair_value(dp, q);
        }
    }
    let make_row = |&(k, i, j): &TriangleKey| {
        let mut coeffs = Vec::with_capacity(6);
        push_pair(&mut coeffs, &cols, pair_index(i, j, n), 1.0);
        push_pair(&mut coeffs, &cols, pair_index(i.min(k), i.max(k), n), -1.0);
        push_pair(&mut coeffs, &cols, pair_index(j.min(k), j.max(k), n), -1.0);
        simplex::Row {
            coeffs,
            rhs: dp.get(i, k) + dp.get(j, k) - dp.get(i, j),
        }
    };
    let mut solver = simplex::DualSimplex::new(cost, upper)?;
    let mut tracked: Vec<TriangleKey> = working.iter().copied().collect();
    solver.add_rows(tracked.iter().map(&make_row));
    const MAX_ROUNDS: usize = 64;
    for _ in 0..MAX_ROUNDS {
        let sol = solver.solve(0)?;
        if sol.status != SolverStatus::Optimal {
            return Ok((Perturbation::new(n), sol.status, BTreeSet::new()));
        }
        let mut p = Perturbation::new(n);
        for (c, &(q, negative)) in cols.meta.iter().enumerate() {
            let v = sol.x[c];
            if v != 0.0 {
                let (i, j) = pair_from_index(q, n);
                let signed = if negative { -v } else { v };
                p.set(i, j, p.get(i, j) + signed);
            }
        }
        let repaired = DistanceMatrix::from_fn(n, |i, j| (dp.get(i, j) + p.get(i, j)).max(0.0))
            .expect("bounded negatives");
        let mut fresh = Vec::new();
        collect_violated(&repaired, &mut working, add_tol, &mut fresh);
        if fresh.is_empty() {
            let binding = tracked
                .iter()
                .copied()
                .filter(|&(k, i, j)| {
                    let slack = repaired.get(i, k) + repaired.get(j, k) - repaired.get(i, j);
                    slack <= 1e-7 * scale
                })
                .collect();
            return Ok((p, SolverStatus::Optimal, binding));
        }
        solver.add_rows(fresh.iter().map(&make_row));
        tracked.extend_from_slice(&fresh);
    }
    Err(Error::SolverStalled { residual: add_tol })
}

fn pair_value(dp: &DistanceMatrix, q: usize) -> f64 {
    let (i, j) = pair_from_index(q, dp.n());
    dp.get(i, j)
}

fn pair_from_index(q: usize, n: usize) -> (usize, usize) {
    // inverse of pair_index; fine at desk scale
    let mut i = 0;
    let mut offset = 0;
    loop {
        let row = n - 1 - i;
        if q < offset + row {
            return (i, q - offset + i + 1);
        }
        offset += row;
        i += 1;
    }
}

fn push_pair(coeffs: &mut Vec<(usize, f64)>, cols: &Columns, q: usize, sign: f64) {
    if cols.pos[q] != usize::MAX {
        coeffs.push((cols.pos[q], sign));
    }
    if cols.neg[q] != usize::MAX {
        coeffs.push((cols.neg[q], -sign));
    }
}

/// Most violated apex per broken pair of the input.
fn seed_working_set(dp: &DistanceMatrix, working: &mut BTreeSet<TriangleKey>, tol: f64) {
    let n = dp.n();
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = dp.get(i, j);
            let mut best: Option<(f64, usize)> = None;
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let viol = dij - dp.get(i, k) - dp.get(j, k);
                if viol > tol && best.is_none_or(|(b, _)| viol > b) {
                    best = Some((viol, k));
                }
            }
            if let Some((_, k)) = best {
                working.insert((k, i, j));
            }
        }
    }
}

/// Collect the most violated apex for every pair still broken in
/// `repaired`, skipping triangles already in the working set.
fn collect_violated(
    repaired: &DistanceMatrix,
    working: &mut BTreeSet<TriangleKey>,
    tol: f64,
    fresh: &mut Vec<TriangleKey>,
) {
    let n = repaired.n();
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = repaired.get(i, j);
            let mut best: Option<(f64, usize)> = None;
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let viol = dij - repaired.get(i, k) - repaired.get(j, k);
                if viol > tol && best.is_none_or(|(b, _)| viol > b) {
                    best = Some((viol, k));
                }
            }
            if let Some((_, k)) = best {
                if working.insert((k, i, j)) {
                    fresh.push((k, i, j));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domr::fw_domr;
    use crate::triangle::is_metric;

    fn d3(d01: f64, d02: f64, d12: f64) -> DistanceMatrix {
        DistanceMatrix::from_upper(3, &[d01, d02, d12]).unwrap()
    }

    #[test]
    fn instance_shape_n3_general() {
        let dp = d3(7.0, 1.0, 2.0);
        let lp = build_metric_lp(&dp, RepairMode::General, &unit_weights(3));
        assert_eq!(lp.num_vars, 6);
        assert_eq!(lp.constraints.len(), 3 + 3);
        assert_eq!(lp.constraint_count(), 6);
    }

    #[test]
    fn instance_shape_n4() {
        let dp = DistanceMatrix::from_upper(4, &[1.0; 6]).unwrap();
        let lp = build_metric_lp(&dp, RepairMode::General, &unit_weights(4));
        assert_eq!(lp.num_vars, 12);
        assert_eq!(lp.constraints.len(), 12 + 6);
        let domr = build_metric_lp(&dp, RepairMode::DecreaseOnly, &unit_weights(4));
        assert_eq!(domr.constraint_count(), 12 + 6 + 6);
    }

    #[test]
    fn zero_weights_accept_any_feasible_point() {
        let dp = d3(7.0, 1.0, 2.0);
        let lp = build_metric_lp(&dp, RepairMode::General, &[0.0, 0.0, 0.0]);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn solve_domr_lp_for_1_2_7() {
        let dp = d3(7.0, 1.0, 2.0);
        let lp = build_metric_lp(&dp, RepairMode::DecreaseOnly, &unit_weights(3));
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert!((sol.objective - 4.0).abs() < 1e-9);
        // P_01 = -4: negative part of pair 0 carries the mass
        assert!((sol.x[1] - 4.0).abs() < 1e-9);
    }

    #[test]
    fn l1_domr_matches_apsp_on_1_2_7() {
        let dp = d3(7.0, 1.0, 2.0);
        let res = l1_repair(&dp, RepairMode::DecreaseOnly).unwrap();
        assert_eq!(res.solver_status, SolverStatus::Optimal);
        assert!((res.objective_value - 4.0).abs() < 1e-9);
        assert_eq!(res.perturbation.support(), vec![(0, 1)]);
        assert!((res.perturbation.get(0, 1) + 4.0).abs() < 1e-9);
        let apsp = fw_domr(&dp);
        assert!((res.objective_value - apsp.perturbation.norm1()).abs() < 1e-9);
    }

    #[test]
    fn l1_general_objective_is_4_support_unpinned() {
        let dp = d3(7.0, 1.0, 2.0);
        let res = l1_repair(&dp, RepairMode::General).unwrap();
        assert!((res.objective_value - 4.0).abs() < 1e-9);
        assert!(is_metric(&res.repaired(&dp), 1e-7));
    }

    #[test]
    fn l1_metric_input_is_zero() {
        let dp = d3(3.0, 4.0, 5.0);
        for mode in [
            RepairMode::DecreaseOnly,
            RepairMode::IncreaseOnly,
            RepairMode::General,
        ] {
            let res = l1_repair(&dp, mode).unwrap();
            assert_eq!(res.objective_value, 0.0);
            assert!(res.perturbation.is_empty());
        }
    }

    #[test]
    fn l1_iomr_mode_is_nonnegative() {
        let dp = d3(7.0, 1.0, 2.0);
        let res = l1_repair(&dp, RepairMode::IncreaseOnly).unwrap();
        assert!(res.perturbation.min_value() >= 0.0);
        assert!((res.objective_value - 4.0).abs() < 1e-9);
        assert!(is_metric(&res.repaired(&dp), 1e-7));
    }

    #[test]
    fn irl1_concentrates_on_one_pair() {
        let dp = d3(7.0, 1.0, 2.0);
        let scale = dp.max_entry();
        let res = irl1_repair(
            &dp,
            RepairMode::General,
            IRL1_DEFAULT_ITERS,
            irl1_default_eps(scale),
        )
        .unwrap();
        assert_eq!(res.perturbation.norm0(support_threshold(scale)), 1);
        assert!(is_metric(&res.repaired(&dp), 1e-7));
    }

    #[test]
    fn irl1_on_metric_converges_at_iteration_one() {
        let dp = d3(3.0, 4.0, 5.0);
        let res = irl1_repair(&dp, RepairMode::General, 10, 1e-3 * 5.0).unwrap();
        assert!(res.perturbation.is_empty());
        assert_eq!(res.iterations, 1);
    }

    #[test]
    fn irl1_spiked_4_finds_1_sparse() {
        let dp = DistanceMatrix::from_upper(4, &[5.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let scale = dp.max_entry();
        let res = irl1_repair(
            &dp,
            RepairMode::General,
            IRL1_DEFAULT_ITERS,
            irl1_default_eps(scale),
        )
        .unwrap();
        assert_eq!(res.perturbation.norm0(support_threshold(scale)), 1);
        assert!(is_metric(&res.repaired(&dp), 1e-7));
    }

    #[test]
    fn pair_index_round_trip() {
        let n = 9;
        let mut q = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                assert_eq!(pair_index(i, j, n), q);
                assert_eq!(pair_from_index(q, n), (i, j));
                q += 1;
            }
        }
    }
}
