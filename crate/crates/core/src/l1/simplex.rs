//! Dense dual simplex over rows `A x <= b` with box-bounded variables
//! `0 <= x_j <= u_j` and nonnegative costs.
//!
//! Nonnegative costs make the all-slack basis dual feasible, so the dual
//! method needs no phase-1. Rows can be appended between solves without
//! losing the basis: new slacks enter the basis at their (possibly
//! infeasible) values, the dual vector extends with zeros, and
//! re-optimization resumes where the previous solve stopped, the natural
//! shape for cutting-plane loops. The basis inverse is kept explicitly and
//! rebuilt on drift. Pivoting is deterministic: most-violated row, then
//! steepest eligible column, with index-order tie breaks and a smallest-
//! index fallback once the iteration stalls.

#![allow(clippy::needless_range_loop)] // dense linear algebra reads clearer with indices

use crate::error::{Error, Result};

/// Outcome reported by the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Optimal,
    Infeasible,
    /// Unreachable for nonnegative costs over box-bounded variables; kept
    /// so callers can match exhaustively.
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: SolverStatus,
    /// Structural variable values (empty unless optimal).
    pub x: Vec<f64>,
    pub objective: f64,
}

/// A sparse `<=` row.
#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

const PIVOT_TOL: f64 = 1e-10;
const STALL_LIMIT: usize = 60;
const REFRESH_INTERVAL: usize = 4096;

#[derive(Clone, Copy, PartialEq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
}

/// Incremental dual simplex. Variables are fixed at construction; rows
/// accumulate via [`DualSimplex::add_rows`].
pub struct DualSimplex {
    nv: usize,
    m: usize,
    cost: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Row>,
    /// structural columns: (row, coefficient) entries
    cols: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    /// states for structural variables then slacks (slack r = nv + r)
    state: Vec<VarState>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    dual: Vec<f64>,
    ptol: f64,
    dtol: f64,
    pivots: usize,
}

/// One-shot convenience: minimize `cost . x` subject to `rows` and
/// `0 <= x_j <= upper_j` (`f64::INFINITY` for a free upper end). All costs
/// must be nonnegative.
pub fn solve_bounded(
    cost: &[f64],
    upper: &[f64],
    rows: &[Row],
    max_pivots: usize,
) -> Result<LpSolution> {
    let mut s = DualSimplex::new(cost.to_vec(), upper.to_vec())?;
    s.add_rows(rows.iter().cloned());
    s.solve(max_pivots)
}

impl DualSimplex {
    pub fn new(cost: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        assert_eq!(upper.len(), cost.len());
        if let Some(j) = cost.iter().position(|&c| c < 0.0) {
            return Err(Error::InvalidSpec(format!(
                "negative objective weight at component {j}"
            )));
        }
        let nv = cost.len();
        let cscale = cost.iter().fold(1.0f64, |a, &c| a.max(c.abs()));
        Ok(DualSimplex {
            nv,
            m: 0,
            dual: cost.clone(),
            cost,
            upper,
            rows: Vec::new(),
            cols: vec![Vec::new(); nv],
            rhs: Vec::new(),
            state: vec![VarState::AtLower; nv],
            basis: Vec::new(),
            binv: Vec::new(),
            xb: Vec::new(),
            ptol: 1e-9,
            dtol: 1e-9 * cscale,
            pivots: 0,
        })
    }

    /// Append rows. The current basis is extended with the new slacks;
    /// duals stay valid, so a following [`DualSimplex::solve`] resumes
    /// instead of starting over.
    pub fn add_rows(&mut self, new_rows: impl IntoIterator<Item = Row>) {
        let new_rows: Vec<Row> = new_rows.into_iter().collect();
        if new_rows.is_empty() {
            return;
        }
        let old_m = self.m;
        let add = new_rows.len();
        let new_m = old_m + add;
        let x = self.current_x();
        // grow the inverse: [[B^-1, 0], [-C B^-1, I]] where C holds the
        // coefficients of currently-basic variables in the new rows
        let mut binv = vec![0.0; new_m * new_m];
        for r in 0..old_m {
            binv[r * new_m..r * new_m + old_m]
                .copy_from_slice(&self.binv[r * old_m..(r + 1) * old_m]);
        }
        for (t, row) in new_rows.iter().enumerate() {
            let r = old_m + t;
            for &(j, v) in &row.coeffs {
                if let VarState::Basic(rj) = self.state[j] {
                    let src = &self.binv[rj * old_m..(rj + 1) * old_m];
                    let dst = &mut binv[r * new_m..r * new_m + old_m];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d -= v * s;
                    }
                }
            }
            binv[r * new_m + r] = 1.0;
        }
        self.binv = binv;
        for (t, row) in new_rows.into_iter().enumerate() {
            let r = old_m + t;
            // slack value at the current point
            let mut slack = row.rhs;
            for &(j, v) in &row.coeffs {
                slack -= v * x[j];
                self.cols[j].push((r, v));
            }
            self.rhs.push(row.rhs);
            self.rows.push(row);
            self.basis.push(self.nv + old_m + t);
            self.xb.push(slack);
            self.state.push(VarState::Basic(r));
            self.dual.push(0.0);
        }
        self.m = new_m;
        let bscale = self.rhs.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
        self.ptol = 1e-9 * bscale;
    }

    #[inline]
    fn upper_of(&self, var: usize) -> f64 {
        if var < self.nv {
            self.upper[var]
        } else {
            f64::INFINITY
        }
    }

    fn total(&self) -> usize {
        self.nv + self.m
    }

    /// alpha_j = (row r of B^-1) . A_j for every nonbasic j.
    fn pivot_row(&self, r: usize, alpha: &mut [f64]) {
        let m = self.m;
        let rho = &self.binv[r * m..(r + 1) * m];
        for j in 0..self.nv {
            if matches!(self.state[j], VarState::Basic(_)) {
                alpha[j] = 0.0;
                continue;
            }
            let mut s = 0.0;
            for &(row, v) in &self.cols[j] {
                s += rho[row] * v;
            }
            alpha[j] = s;
        }
        for r2 in 0..m {
            alpha[self.nv + r2] = if matches!(self.state[self.nv + r2], VarState::Basic(_)) {
                0.0
            } else {
                rho[r2]
            };
        }
    }

    fn column(&self, var: usize, w: &mut [f64]) {
        let m = self.m;
        w.iter_mut().for_each(|v| *v = 0.0);
        if var < self.nv {
            for &(row, v) in &self.cols[var] {
                for r in 0..m {
                    w[r] += self.binv[r * m + row] * v;
                }
            }
        } else {
            let row = var - self.nv;
            for r in 0..m {
                w[r] = self.binv[r * m + row];
            }
        }
    }

    /// Rebuild the inverse, basic values and duals from scratch.
    fn refactorize(&mut self) -> Result<()> {
        let m = self.m;
        let mut aug = vec![0.0; m * 2 * m];
        for (r, &var) in self.basis.iter().enumerate() {
            if var < self.nv {
                for &(row, v) in &self.cols[var] {
                    aug[row * 2 * m + r] = v;
                }
            } else {
                aug[(var - self.nv) * 2 * m + r] = 1.0;
            }
        }
        for r in 0..m {
            aug[r * 2 * m + m + r] = 1.0;
        }
        for col in 0..m {
            let mut piv = col;
            let mut best = aug[col * 2 * m + col].abs();
            for r in (col + 1)..m {
                let v = aug[r * 2 * m + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-12 {
                return Err(Error::SolverStalled { residual: best });
            }
            if piv != col {
                for c in 0..2 * m {
                    aug.swap(col * 2 * m + c, piv * 2 * m + c);
                }
            }
            let inv = 1.0 / aug[col * 2 * m + col];
            for c in 0..2 * m {
                aug[col * 2 * m + c] *= inv;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = aug[r * 2 * m + col];
                if f != 0.0 {
                    for c in 0..2 * m {
                        aug[r * 2 * m + c] -= f * aug[col * 2 * m + c];
                    }
                }
            }
        }
        for r in 0..m {
            for c in 0..m {
                self.binv[r * m + c] = aug[r * 2 * m + m + c];
            }
        }
        self.recompute_primal();
        self.recompute_duals();
        Ok(())
    }

    fn recompute_primal(&mut self) {
        let m = self.m;
        let mut rhs_eff = self.rhs.clone();
        for j in 0..self.total() {
            if self.state[j] == VarState::AtUpper {
                let u = self.upper_of(j);
                if j < self.nv {
                    for &(row, v) in &self.cols[j] {
                        rhs_eff[row] -= v * u;
                    }
                } else {
                    rhs_eff[j - self.nv] -= u;
                }
            }
        }
        for r in 0..m {
            let mut s = 0.0;
            for c in 0..m {
                s += self.binv[r * m + c] * rhs_eff[c];
            }
            self.xb[r] = s;
        }
    }

    fn recompute_duals(&mut self) {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (r, &var) in self.basis.iter().enumerate() {
            let cb = if var < self.nv { self.cost[var] } else { 0.0 };
            if cb != 0.0 {
                for c in 0..m {
                    y[c] += cb * self.binv[r * m + c];
                }
            }
        }
        for j in 0..self.nv {
            if matches!(self.state[j], VarState::Basic(_)) {
                self.dual[j] = 0.0;
                continue;
            }
            let mut s = self.cost[j];
            for &(row, v) in &self.cols[j] {
                s -= y[row] * v;
            }
            self.dual[j] = s;
        }
        for r in 0..m {
            let j = self.nv + r;
            self.dual[j] = if matches!(self.state[j], VarState::Basic(_)) {
                0.0
            } else {
                -y[r]
            };
        }
    }

    fn select_leaving(&self, bland: bool) -> Option<(usize, bool)> {
        let mut pick: Option<(usize, bool)> = None;
        let mut worst = self.ptol;
        let mut lowest_var = usize::MAX;
        for r in 0..self.m {
            let v = self.xb[r];
            let u = self.upper_of(self.basis[r]);
            let (viol, above) = if v < -self.ptol {
                (-v, false)
            } else if v > u + self.ptol {
                (v - u, true)
            } else {
                continue;
            };
            if bland {
                if self.basis[r] < lowest_var {
                    lowest_var = self.basis[r];
                    pick = Some((r, above));
                }
            } else if viol > worst {
                worst = viol;
                pick = Some((r, above));
            }
        }
        pick
    }

    /// Re-optimize from the current basis.
    pub fn solve(&mut self, max_pivots: usize) -> Result<LpSolution> {
        if self.m == 0 {
            return Ok(LpSolution {
                status: SolverStatus::Optimal,
                x: vec![0.0; self.nv],
                objective: 0.0,
            });
        }
        let cap = if max_pivots > 0 {
            max_pivots
        } else {
            20_000 + 50 * (self.m + self.nv)
        };
        let mut alpha = vec![0.0; self.total()];
        let mut w = vec![0.0; self.m];
        let mut prow = vec![0.0; self.m];
        let mut pivots = 0usize;
        let mut stall = 0usize;
        let mut verified = false;
        loop {
            let bland = stall >= STALL_LIMIT;
            let leaving = self.select_leaving(bland);
            let Some((r, above)) = leaving else {
                if verified || self.primal_residual() <= 10.0 * self.ptol.max(1e-12) {
                    return Ok(self.extract());
                }
                self.refactorize()?;
                verified = true;
                continue;
            };
            if pivots >= cap {
                return Err(Error::IterationLimit { cap });
            }
            self.pivot_row(r, &mut alpha);
            let dir = if above { -1.0 } else { 1.0 };
            let mut best: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            let mut best_mag = 0.0f64;
            for j in 0..self.total() {
                let a = alpha[j] * dir;
                let (eligible, ratio) = match self.state[j] {
                    VarState::AtLower if a < -PIVOT_TOL => (true, self.dual[j] / (-a)),
                    VarState::AtUpper if a > PIVOT_TOL => (true, (-self.dual[j]) / a),
                    _ => (false, 0.0),
                };
                if !eligible {
                    continue;
                }
                let ratio = ratio.max(0.0);
                let better = if bland {
                    best.is_none()
                        || ratio < best_ratio - self.dtol
                        || (ratio < best_ratio + self.dtol && j < best.unwrap())
                } else {
                    best.is_none()
                        || ratio < best_ratio - self.dtol
                        || (ratio < best_ratio + self.dtol && a.abs() > best_mag)
                };
                if better {
                    best = Some(j);
                    best_ratio = ratio.min(best_ratio);
                    best_mag = a.abs();
                }
            }
            let Some(q) = best else {
                return Ok(LpSolution {
                    status: SolverStatus::Infeasible,
                    x: Vec::new(),
                    objective: 0.0,
                });
            };
            let alpha_q = alpha[q];
            self.column(q, &mut w);
            if (w[r] - alpha_q).abs() > 1e-6 * (1.0 + alpha_q.abs()) {
                self.refactorize()?;
                stall += 1;
                continue;
            }
            let target = if above { self.upper_of(self.basis[r]) } else { 0.0 };
            let from_upper = self.state[q] == VarState::AtUpper;
            let t_step = if from_upper {
                (target - self.xb[r]) / w[r]
            } else {
                (self.xb[r] - target) / w[r]
            };
            if t_step.abs() <= self.ptol {
                stall += 1;
            } else {
                stall = 0;
            }
            let sgn = if from_upper { 1.0 } else { -1.0 };
            for rr in 0..self.m {
                self.xb[rr] += sgn * t_step * w[rr];
            }
            let entering_value = if from_upper {
                self.upper_of(q) - t_step
            } else {
                t_step
            };
            let theta = self.dual[q] / alpha_q;
            if theta != 0.0 {
                for j in 0..self.total() {
                    if !matches!(self.state[j], VarState::Basic(_)) && alpha[j] != 0.0 {
                        self.dual[j] -= theta * alpha[j];
                    }
                }
            }
            let leaving_var = self.basis[r];
            self.dual[leaving_var] = -theta;
            self.dual[q] = 0.0;
            self.state[leaving_var] = if above { VarState::AtUpper } else { VarState::AtLower };
            self.state[q] = VarState::Basic(r);
            self.basis[r] = q;
            self.xb[r] = entering_value;
            let m = self.m;
            let inv_wr = 1.0 / w[r];
            for c in 0..m {
                self.binv[r * m + c] *= inv_wr;
            }
            prow.copy_from_slice(&self.binv[r * m..r * m + m]);
            for rr in 0..m {
                if rr == r {
                    continue;
                }
                let f = w[rr];
                if f != 0.0 {
                    let dst = &mut self.binv[rr * m..rr * m + m];
                    for (d, p) in dst.iter_mut().zip(&prow) {
                        *d -= f * p;
                    }
                }
            }
            pivots += 1;
            self.pivots += 1;
            verified = false;
            if self.pivots.is_multiple_of(REFRESH_INTERVAL) {
                self.refactorize()?;
            }
        }
    }

    /// Max violation of the original rows and bounds at the current point.
    fn primal_residual(&self) -> f64 {
        let x = self.current_x();
        let mut worst = 0.0f64;
        for row in &self.rows {
            let mut s = 0.0;
            for &(j, v) in &row.coeffs {
                s += v * x[j];
            }
            worst = worst.max(s - row.rhs);
        }
        for (j, &xv) in x.iter().enumerate() {
            worst = worst.max(-xv);
            let u = self.upper_of(j);
            if u.is_finite() {
                worst = worst.max(xv - u);
            }
        }
        worst
    }

    pub fn current_x(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.nv];
        for j in 0..self.nv {
            x[j] = match self.state[j] {
                VarState::Basic(r) => self.xb[r],
                VarState::AtLower => 0.0,
                VarState::AtUpper => self.upper[j],
            };
        }
        x
    }

    fn extract(&self) -> LpSolution {
        let x = self.current_x();
        let objective = x.iter().zip(&self.cost).map(|(xv, c)| xv * c).sum();
        LpSolution {
            status: SolverStatus::Optimal,
            x,
            objective,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coeffs: &[(usize, f64)], rhs: f64) -> Row {
        Row {
            coeffs: coeffs.to_vec(),
            rhs,
        }
    }

    #[test]
    fn min_x_above_two() {
        // min x s.t. x >= 2  (as -x <= -2), x >= 0
        let sol = solve_bounded(&[1.0], &[f64::INFINITY], &[row(&[(0, -1.0)], -2.0)], 0).unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert!((sol.x[0] - 2.0).abs() < 1e-9);
        assert!((sol.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_optimal_face() {
        // min x + y s.t. x + y >= 1: any vertex of the face is fine
        let sol = solve_bounded(
            &[1.0, 1.0],
            &[f64::INFINITY; 2],
            &[row(&[(0, -1.0), (1, -1.0)], -1.0)],
            0,
        )
        .unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
        assert!(sol.x[0] >= -1e-12 && sol.x[1] >= -1e-12);
    }

    #[test]
    fn infeasible_by_bounds() {
        // x <= u = 1 but x >= 2
        let sol = solve_bounded(&[1.0], &[1.0], &[row(&[(0, -1.0)], -2.0)], 0).unwrap();
        assert_eq!(sol.status, SolverStatus::Infeasible);
    }

    #[test]
    fn upper_bound_becomes_binding() {
        // min x + 3y s.t. x + y >= 4, x <= 1.5: forces x to its cap
        let sol = solve_bounded(
            &[1.0, 3.0],
            &[1.5, f64::INFINITY],
            &[row(&[(0, -1.0), (1, -1.0)], -4.0)],
            0,
        )
        .unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert!((sol.x[0] - 1.5).abs() < 1e-9);
        assert!((sol.x[1] - 2.5).abs() < 1e-9);
        assert!((sol.objective - 9.0).abs() < 1e-9);
    }

    #[test]
    fn zero_cost_feasibility_only() {
        let sol = solve_bounded(
            &[0.0, 0.0],
            &[f64::INFINITY; 2],
            &[row(&[(0, -1.0)], -3.0), row(&[(0, 1.0), (1, -1.0)], 1.0)],
            0,
        )
        .unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert_eq!(sol.objective, 0.0);
        assert!(sol.x[0] >= 3.0 - 1e-9);
    }

    #[test]
    fn multiple_rows_vertex() {
        // min 2x + y s.t. x + y >= 3, x >= 1, y <= 4 (as rows)
        let sol = solve_bounded(
            &[2.0, 1.0],
            &[f64::INFINITY; 2],
            &[
                row(&[(0, -1.0), (1, -1.0)], -3.0),
                row(&[(0, -1.0)], -1.0),
                row(&[(1, 1.0)], 4.0),
            ],
            0,
        )
        .unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-9);
        assert!((sol.x[1] - 2.0).abs() < 1e-9);
        assert!((sol.objective - 4.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_negative_cost() {
        assert!(solve_bounded(&[-1.0], &[f64::INFINITY], &[], 0).is_err());
    }

    #[test]
    fn empty_rows_is_trivial() {
        let sol = solve_bounded(&[1.0, 2.0], &[f64::INFINITY; 2], &[], 0).unwrap();
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert_eq!(sol.x, vec![0.0, 0.0]);
    }

    #[test]
    fn incremental_rows_match_one_shot() {
        // solving with rows added in two batches equals the one-shot solve
        let all = vec![
            row(&[(0, -1.0), (1, -1.0)], -3.0),
            row(&[(0, -1.0)], -1.0),
            row(&[(1, 1.0)], 4.0),
            row(&[(0, 1.0), (1, -2.0)], 2.0),
        ];
        let once = solve_bounded(&[2.0, 1.0], &[f64::INFINITY; 2], &all, 0).unwrap();

        let mut s = DualSimplex::new(vec![2.0, 1.0], vec![f64::INFINITY; 2]).unwrap();
        s.add_rows(all[..2].iter().cloned());
        let first = s.solve(0).unwrap();
        assert_eq!(first.status, SolverStatus::Optimal);
        s.add_rows(all[2..].iter().cloned());
        let second = s.solve(0).unwrap();
        assert_eq!(second.status, SolverStatus::Optimal);
        assert!((second.objective - once.objective).abs() < 1e-9);
        for (a, b) in second.x.iter().zip(&once.x) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
