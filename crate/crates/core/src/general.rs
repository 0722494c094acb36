//! Sign-unconstrained repair: the two-pass counting heuristic and the
//! additive-shift baseline.

use crate::error::Result;
use crate::matrix::DistanceMatrix;
use crate::perturbation::Perturbation;
use crate::triangle::{
    broken_triangles, extend_broken, max_violation, triangle_count, violation_counts, Triangle,
    ViolationCounts, DEFAULT_TOL,
};

/// Result of a general (mixed-sign) repair. Full repair is not guaranteed;
/// the residual is recomputed by a final scan, never trusted from the
/// sweep's bookkeeping.
#[derive(Debug, Clone)]
pub struct GeneralResult {
    pub repaired: DistanceMatrix,
    pub perturbation: Perturbation,
    pub residual_broken: usize,
    /// `residual_broken / triangle_count(n)`.
    pub residual_fraction: f64,
}

fn finish(input: &DistanceMatrix, repaired: DistanceMatrix) -> GeneralResult {
    let n = input.n();
    for (i, j, v) in repaired.pairs() {
        assert!(v >= 0.0, "repair produced a negative distance at ({i},{j})");
    }
    let residual = broken_triangles(&repaired, DEFAULT_TOL).len();
    let denom = triangle_count(n).max(1) as f64;
    GeneralResult {
        perturbation: Perturbation::diff(&repaired, input),
        repaired,
        residual_broken: residual,
        residual_fraction: residual as f64 / denom,
    }
}

#[inline]
fn fix_triangle(
    d: &mut DistanceMatrix,
    counts: &ViolationCounts,
    lo: usize,
    hi: usize,
    k: usize,
) {
    // edge {lo, hi} with apex k; in sweep coordinates i = hi, j = lo.
    let l_edge = counts.left(lo, hi);
    let r_hik = counts.right(hi, k);
    let r_lok = counts.right(lo, k);
    if l_edge > r_hik.max(r_lok) {
        let v = d.get(hi, k) + d.get(k, lo);
        d.set(hi, lo, v);
    } else if r_hik > r_lok {
        let v = d.get(hi, lo) - d.get(lo, k);
        d.set(hi, k, v);
    } else {
        let v = d.get(hi, lo) - d.get(hi, k);
        d.set(lo, k, v);
    }
}

/// Two-pass counting heuristic. Pass 1 counts, on the unmodified input,
/// how often each edge sits on the left or the right of a broken triangle.
/// Pass 2 re-sweeps in the same k-outer order and fixes each still-broken
/// triangle: decrease the left edge when it is the most implicated,
/// otherwise raise the less implicated right edge to tightness. Counts are
/// not refreshed during pass 2; they describe the original matrix.
pub fn heuristic_repair(input: &DistanceMatrix) -> GeneralResult {
    let n = input.n();
    let thr = DEFAULT_TOL * input.max_entry();
    let counts = violation_counts(input, DEFAULT_TOL);
    let mut d = input.clone();
    for k in 0..n {
        for i in 0..n {
            for j in 0..i {
                if d.get(i, j) - d.get(i, k) - d.get(k, j) > thr {
                    fix_triangle(&mut d, &counts, j, i, k);
                }
            }
        }
    }
    finish(input, d)
}

/// Heuristic sweep restricted to the extension of a known broken-triangle
/// set, with counts taken from the list itself.
pub fn heuristic_prior(input: &DistanceMatrix, broken: &[Triangle]) -> Result<GeneralResult> {
    let n = input.n();
    for t in broken {
        if !t.is_valid(n) {
            return Err(crate::error::Error::InvalidTriangle {
                i: t.i,
                j: t.j,
                k: t.k,
                n,
            });
        }
    }
    let thr = DEFAULT_TOL * input.max_entry();
    let counts = violation_counts(input, DEFAULT_TOL);
    let mut d = input.clone();
    for t in extend_broken(broken, n) {
        if d.get(t.i, t.j) - d.get(t.i, t.k) - d.get(t.j, t.k) > thr {
            fix_triangle(&mut d, &counts, t.i, t.j, t.k);
        }
    }
    Ok(finish(input, d))
}

/// Additive-shift baseline: add the worst violation to every off-diagonal
/// entry. Always repairs, and touches every pair when anything was broken
/// at all: the anti-sparse extreme.
pub fn shift_repair(input: &DistanceMatrix) -> GeneralResult {
    let c = max_violation(input);
    let repaired = if c > 0.0 {
        DistanceMatrix::from_fn(input.n(), |i, j| input.get(i, j) + c)
            .expect("shifted entries stay nonnegative")
    } else {
        input.clone()
    };
    finish(input, repaired)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangle::is_metric;

    fn d3(d01: f64, d02: f64, d12: f64) -> DistanceMatrix {
        DistanceMatrix::from_upper(3, &[d01, d02, d12]).unwrap()
    }

    #[test]
    fn heuristic_1_2_7_takes_the_tie_branch() {
        // counts: l01=1, r02=1, r12=1; both strict comparisons fail, so
        // the else branch raises d02 to 7 - 2 = 5.
        let res = heuristic_repair(&d3(7.0, 1.0, 2.0));
        assert_eq!(res.repaired, d3(7.0, 5.0, 2.0));
        assert_eq!(res.perturbation.support(), vec![(0, 2)]);
        assert_eq!(res.perturbation.get(0, 2), 4.0);
        assert_eq!(res.residual_broken, 0);
        assert_eq!(res.residual_fraction, 0.0);
    }

    #[test]
    fn heuristic_metric_is_noop() {
        let d = d3(3.0, 4.0, 5.0);
        let res = heuristic_repair(&d);
        assert!(res.perturbation.is_empty());
        assert_eq!(res.residual_broken, 0);
    }

    #[test]
    fn heuristic_decrease_branch_on_spiked_4() {
        // l01 = 2 beats every right count, so d01 drops to 1 + 1 = 2 at the
        // first broken triangle; the second is then already satisfied.
        let d = DistanceMatrix::from_upper(4, &[5.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let res = heuristic_repair(&d);
        assert_eq!(res.repaired.get(0, 1), 2.0);
        assert_eq!(res.perturbation.support(), vec![(0, 1)]);
        assert_eq!(res.perturbation.get(0, 1), -3.0);
        assert_eq!(res.residual_broken, 0);
    }

    #[test]
    fn heuristic_never_negative() {
        let d = DistanceMatrix::from_upper(4, &[9.0, 0.1, 0.2, 0.3, 8.0, 0.05]).unwrap();
        let res = heuristic_repair(&d);
        for (_, _, v) in res.repaired.pairs() {
            assert!(v >= 0.0);
        }
    }

    #[test]
    fn shift_1_2_7() {
        let res = shift_repair(&d3(7.0, 1.0, 2.0));
        assert_eq!(res.repaired, d3(11.0, 5.0, 6.0));
        assert_eq!(res.perturbation.norm0(1e-6 * 7.0), 3);
        assert_eq!(res.residual_broken, 0);
        assert!(is_metric(&res.repaired, DEFAULT_TOL));
    }

    #[test]
    fn shift_metric_is_noop() {
        let d = d3(3.0, 4.0, 5.0);
        let res = shift_repair(&d);
        assert!(res.perturbation.is_empty());
    }

    #[test]
    fn shift_spiked_4() {
        let d = DistanceMatrix::from_upper(4, &[5.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let res = shift_repair(&d);
        assert_eq!(res.repaired.get(0, 1), 8.0);
        for (i, j, v) in res.repaired.pairs() {
            if (i, j) != (0, 1) {
                assert_eq!(v, 4.0);
            }
        }
        assert_eq!(res.perturbation.norm0(1e-6 * 5.0), 6);
        assert_eq!(res.residual_broken, 0);
    }

    #[test]
    fn prior_matches_full_on_examples() {
        for d in [
            d3(7.0, 1.0, 2.0),
            DistanceMatrix::from_upper(4, &[5.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap(),
        ] {
            let broken = broken_triangles(&d, DEFAULT_TOL);
            let full = heuristic_repair(&d);
            let prior = heuristic_prior(&d, &broken).unwrap();
            assert_eq!(prior.repaired, full.repaired);
        }
    }
}
