//! Cross-module invariants, each checked against an independent oracle or
//! an exhaustive alternative route.

mod common;

use common::{dijkstra_apsp, dyadic_corrupted, dyadic_metric, quantize};
use metric_repair::instances::{
    gen_metric, gen_random, perturb, CorruptionSign, CorruptionSpec, InstanceKind, InstanceSpec,
    RandomKind,
};
use metric_repair::l1::{build_metric_lp, l1_repair, unit_weights};
use metric_repair::{
    broken_triangles, build_oracle, extend_broken, fw_domr, fw_prior, heuristic_repair,
    iomr_repair, is_metric, max_violation, oracle_feasible, oracle_iomr, shift_repair,
    triangle_count, violation_counts, DistanceMatrix, OracleStrategy, RepairMode, DEFAULT_TOL,
};
use proptest::prelude::*;

fn arb_matrix(max_n: usize) -> impl Strategy<Value = DistanceMatrix> {
    (3..=max_n)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                Just(n),
                prop::collection::vec(0.0f64..10.0, pairs),
            )
        })
        .prop_map(|(n, upper)| DistanceMatrix::from_upper(n, &upper).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metricity_routes_agree(d in arb_matrix(9), tol in prop::sample::select(vec![0.0, 1e-9, 1e-3])) {
        let broken = broken_triangles(&d, tol);
        let counts = violation_counts(&d, tol);
        prop_assert_eq!(is_metric(&d, tol), broken.is_empty());
        prop_assert_eq!(counts.total_left() == 0, broken.is_empty());
        prop_assert_eq!(counts.total_left(), broken.len() as u64);
        prop_assert_eq!(counts.total_right(), 2 * broken.len() as u64);
    }

    #[test]
    fn broken_output_is_strictly_sorted(d in arb_matrix(9)) {
        let broken = broken_triangles(&d, DEFAULT_TOL);
        let keys: Vec<_> = broken.iter().map(|t| (t.k, t.i, t.j)).collect();
        for w in keys.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn extension_size_bound(d in arb_matrix(9)) {
        let n = d.n();
        let broken = broken_triangles(&d, DEFAULT_TOL);
        let edges: std::collections::BTreeSet<(usize, usize)> =
            broken.iter().map(|t| (t.i, t.j)).collect();
        let ext = extend_broken(&broken, n);
        prop_assert!(ext.len() <= broken.len() + 2 * (n - 2) * edges.len());
    }

    #[test]
    fn shift_always_repairs(d in arb_matrix(9)) {
        let c = max_violation(&d);
        let shifted = DistanceMatrix::from_fn(d.n(), |i, j| d.get(i, j) + c).unwrap();
        prop_assert!(is_metric(&shifted, 4.0 * f64::EPSILON));
    }

    #[test]
    fn domr_is_sound_and_idempotent(d in arb_matrix(9)) {
        let r = fw_domr(&d);
        prop_assert!(is_metric(&r.repaired, DEFAULT_TOL));
        prop_assert!(r.perturbation.max_value() <= 0.0);
        let again = fw_domr(&r.repaired);
        prop_assert!(again.perturbation.is_empty());
    }

    #[test]
    fn iomr_is_sound(d in arb_matrix(8)) {
        let r = iomr_repair(&d);
        prop_assert_eq!(r.residual_broken, 0);
        prop_assert!(r.perturbation.min_value() >= 0.0);
        for (i, j, v) in d.pairs() {
            prop_assert!(r.repaired.get(i, j) >= v);
        }
    }

    #[test]
    fn heuristic_is_nonnegative_and_residual_is_recomputed(d in arb_matrix(8)) {
        let r = heuristic_repair(&d);
        for (_, _, v) in r.repaired.pairs() {
            prop_assert!(v >= 0.0);
        }
        prop_assert_eq!(r.residual_broken, broken_triangles(&r.repaired, DEFAULT_TOL).len());
        let denom = triangle_count(d.n()) as f64;
        prop_assert!((r.residual_fraction - r.residual_broken as f64 / denom).abs() < 1e-15);
    }

    #[test]
    fn coverage_oracles_cover_every_broken_triangle(d in arb_matrix(8)) {
        for strategy in [OracleStrategy::Counting, OracleStrategy::Cover] {
            let q = build_oracle(&d, strategy);
            for t in broken_triangles(&d, DEFAULT_TOL) {
                prop_assert!(
                    q.marked(t.i, t.k) || q.marked(t.j, t.k),
                    "uncovered triangle ({},{};{}) under {:?}", t.i, t.j, t.k, strategy
                );
            }
        }
    }

    #[test]
    fn oracle_repair_guarantees_hold_for_any_feasible_oracle(d in arb_matrix(8)) {
        for strategy in [OracleStrategy::Counting, OracleStrategy::Cover, OracleStrategy::Routing] {
            let q = build_oracle(&d, strategy);
            if !oracle_feasible(&d, &q) {
                continue;
            }
            let r = oracle_iomr(&d, &q).unwrap();
            prop_assert!(r.perturbation.min_value() >= 0.0);
            for (i, j) in r.perturbation.support() {
                prop_assert!(q.marked(i, j));
            }
            for (i, j, v) in d.pairs() {
                if !q.marked(i, j) {
                    prop_assert_eq!(r.repaired.get(i, j), v);
                }
            }
        }
    }
}

#[test]
fn lp_instance_shape_matches_formulas() {
    for n in [3usize, 4, 5, 6] {
        let d = gen_random(RandomKind::Uniform, n, 0.0, n as u64).unwrap();
        let lp = build_metric_lp(&d, RepairMode::General, &unit_weights(n));
        assert_eq!(lp.num_vars, n * (n - 1));
        assert_eq!(
            lp.constraints.len(),
            n * (n - 1) * (n - 2) / 2 + n * (n - 1) / 2
        );
        let fixed = build_metric_lp(&d, RepairMode::IncreaseOnly, &unit_weights(n));
        assert_eq!(fixed.constraint_count(), lp.constraints.len() + n * (n - 1) / 2);
    }
}

#[test]
fn fw_matches_dijkstra_exactly_on_dyadic_instances() {
    for seed in 0..10u64 {
        let n = 12 + (seed as usize % 10);
        let (_, dp, _) = dyadic_corrupted(n, n / 3, CorruptionSign::Positive, seed);
        let fw = fw_domr(&dp);
        let oracle = dijkstra_apsp(&dp);
        for (i, j, _) in dp.pairs() {
            assert_eq!(fw.repaired.get(i, j), oracle[i][j], "entry ({i},{j}), seed {seed}");
        }
    }
}

#[test]
fn prior_equals_full_fw_on_exact_instances() {
    for seed in 0..10u64 {
        let n = 14;
        let (_, dp, _) = dyadic_corrupted(n, 6, CorruptionSign::Mixed, seed);
        let broken = broken_triangles(&dp, DEFAULT_TOL);
        let full = fw_domr(&dp);
        let prior = fw_prior(&dp, &broken).unwrap();
        assert_eq!(prior.repaired, full.repaired, "seed {seed}");
        assert_eq!(prior.perturbation, full.perturbation, "seed {seed}");
    }
}

#[test]
fn domr_dominates_every_smaller_metric() {
    // Lemma-shaped check: any metric below the input is below the closure.
    for seed in 0..8u64 {
        let n = 10;
        let (_, dp, _) = dyadic_corrupted(n, 5, CorruptionSign::Positive, seed);
        let closure = fw_domr(&dp).repaired;
        // sample metrics <= dp: decrease random entries, then close
        for sub_seed in 0..4u64 {
            let spec = CorruptionSpec {
                k: 8,
                sign: CorruptionSign::Negative,
                scale: 0.3,
                seed: seed * 100 + sub_seed,
            };
            let (lowered, _) = perturb(&dp, &spec).unwrap();
            let candidate = fw_domr(&lowered).repaired;
            assert!(is_metric(&candidate, DEFAULT_TOL));
            for (i, j, v) in candidate.pairs() {
                assert!(v <= dp.get(i, j) + 1e-12);
                assert!(v <= closure.get(i, j) + 1e-12, "seed {seed}/{sub_seed} ({i},{j})");
            }
        }
    }
}

#[test]
fn domr_support_is_contained_in_positive_corruption_support() {
    for seed in 0..20u64 {
        let n = 12;
        let k = 1 + (seed as usize % 4);
        let (_, dp, delta) = dyadic_corrupted(n, k, CorruptionSign::Positive, seed);
        let r = fw_domr(&dp);
        let corrupted = delta.support();
        for (i, j) in r.perturbation.support() {
            assert!(
                corrupted.contains(&(i, j)),
                "seed {seed}: repaired clean pair ({i},{j})"
            );
        }
    }
}

#[test]
fn l1_domr_objective_equals_apsp_l1_norm() {
    for seed in 0..10u64 {
        let n = 8 + (seed as usize % 4);
        let spec = InstanceSpec {
            kind: InstanceKind::Euclidean { dim: 2 },
            n,
            seed,
        };
        let d = gen_metric(&spec).unwrap();
        let c = CorruptionSpec::new(3, CorruptionSign::Positive, seed);
        let (dp, _) = perturb(&d, &c).unwrap();
        let apsp = fw_domr(&dp);
        let lp = l1_repair(&dp, RepairMode::DecreaseOnly).unwrap();
        let reference = apsp.perturbation.norm1();
        assert!(
            (lp.objective_value - reference).abs() <= 1e-6 * reference.max(1.0),
            "seed {seed}: l1 {} vs apsp {}",
            lp.objective_value,
            reference
        );
    }
}

#[test]
fn l1_repairs_are_feasible_at_solver_tolerance() {
    for (seed, mode) in [
        (1u64, RepairMode::General),
        (2, RepairMode::IncreaseOnly),
        (3, RepairMode::DecreaseOnly),
        (4, RepairMode::General),
    ] {
        let d = gen_random(RandomKind::Uniform, 10, 0.0, seed).unwrap();
        let r = l1_repair(&d, mode).unwrap();
        let repaired = r.repaired(&d);
        assert!(is_metric(&repaired, 1e-7), "seed {seed} mode {mode:?}");
        match mode {
            RepairMode::DecreaseOnly => assert!(r.perturbation.max_value() <= 0.0),
            RepairMode::IncreaseOnly => assert!(r.perturbation.min_value() >= 0.0),
            RepairMode::General => {}
        }
    }
}

#[test]
fn shift_touches_every_pair_when_broken() {
    let d = gen_random(RandomKind::Uniform, 9, 0.0, 17).unwrap();
    assert!(!is_metric(&d, DEFAULT_TOL));
    let r = shift_repair(&d);
    assert_eq!(r.residual_broken, 0);
    assert_eq!(r.perturbation.len(), d.pair_count());
}

#[test]
fn quantization_helpers_are_exact() {
    let d = dyadic_metric(15, 3);
    assert!(is_metric(&d, 0.0));
    let q = quantize(&d);
    assert_eq!(q, d);
}

#[test]
fn degenerate_sizes_have_no_triangles_to_break() {
    use metric_repair::l1::{irl1_default_eps, irl1_repair};
    use metric_repair::{build_oracle, iomr_repair, oracle_feasible, oracle_iomr, OracleStrategy};

    for n in [1usize, 2] {
        let d = if n == 1 {
            DistanceMatrix::from_upper(1, &[]).unwrap()
        } else {
            DistanceMatrix::from_upper(2, &[0.37]).unwrap()
        };
        assert_eq!(triangle_count(n), 0);
        assert!(is_metric(&d, 0.0));
        assert!(fw_domr(&d).perturbation.is_empty());
        assert_eq!(iomr_repair(&d).residual_broken, 0);
        assert_eq!(heuristic_repair(&d).residual_broken, 0);
        assert!(shift_repair(&d).perturbation.is_empty());
        assert!(l1_repair(&d, RepairMode::General).unwrap().perturbation.is_empty());
        assert!(
            irl1_repair(&d, RepairMode::General, 3, irl1_default_eps(1.0))
                .unwrap()
                .perturbation
                .is_empty()
        );
        for s in [OracleStrategy::Counting, OracleStrategy::Cover, OracleStrategy::Routing] {
            let q = build_oracle(&d, s);
            assert_eq!(q.count(), 0);
            assert!(oracle_feasible(&d, &q));
            assert!(oracle_iomr(&d, &q).unwrap().perturbation.is_empty());
        }
    }
}

#[test]
fn all_zero_matrix_is_a_valid_semi_metric() {
    let z = DistanceMatrix::from_upper(4, &[0.0; 6]).unwrap();
    assert!(is_metric(&z, 0.0));
    assert!(fw_domr(&z).perturbation.is_empty());
    assert_eq!(l1_repair(&z, RepairMode::General).unwrap().objective_value, 0.0);
}

#[test]
fn extreme_scales_stay_accurate() {
    let big = DistanceMatrix::from_upper(3, &[7e12, 1e12, 2e12]).unwrap();
    assert_eq!(fw_domr(&big).repaired.get(0, 1), 3e12);
    let l1 = l1_repair(&big, RepairMode::DecreaseOnly).unwrap();
    assert!((l1.objective_value - 4e12).abs() < 1e-4 * 4e12);

    let tiny = DistanceMatrix::from_upper(3, &[7e-12, 1e-12, 2e-12]).unwrap();
    assert!((fw_domr(&tiny).repaired.get(0, 1) - 3e-12).abs() < 1e-20);
    let l1 = l1_repair(&tiny, RepairMode::General).unwrap();
    assert!((l1.objective_value - 4e-12).abs() < 1e-18);
}
