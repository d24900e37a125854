mod common;

use approx::assert_abs_diff_eq;
use ndarray::{array, Array2, Axis};
use rand::Rng;
use sieveclust::dual::apg_minimize;
use sieveclust::sieve::Certificate;
use sieveclust::{
    as_solve, build_partition, eas_solve, extract_labels, kkt_residual, primal_objective, solve_full,
    solve_path, AdmmConfig, NullSpaceProjector, PathConfig, SolveConfig, SolveMode,
};

fn all_blocks(n: usize) -> Vec<usize> {
    (0..n).collect()
}

#[test]
fn t1_fuses_to_the_mean_for_large_lambda() {
    let inst = common::t1();
    for lambda in [1.5, 2.0, 10.0] {
        for enhanced in [false, true] {
            let cfg = SolveConfig::with_lambda(lambda);
            let (t, s) = if enhanced {
                eas_solve(&inst, &cfg, all_blocks(3)).unwrap()
            } else {
                as_solve(&inst, &cfg, all_blocks(3)).unwrap()
            };
            for v in t.x.iter() {
                assert_abs_diff_eq!(*v, 2.0, epsilon = 1e-9);
            }
            assert!(t.residual_norm <= 1e-6);
            // at λ = 1.5 the dual sits on the ball boundary and may cost a round
            if lambda > 1.5 {
                assert_eq!(s.round, 1);
            }
            assert_ne!(s.certificate, Certificate::Uncertified);
        }
    }
}

#[test]
fn t1_small_lambda_moves_each_point_by_its_degree() {
    let inst = common::t1();
    let lambda = 0.01;
    let (t, s) = as_solve(&inst, &SolveConfig::with_lambda(lambda), all_blocks(3)).unwrap();
    // no fusion: x_i = a_i − λ Σ_j sign(a_i − a_j)
    let expect = [0.02, 1.0, 4.98];
    for (v, e) in t.x.iter().zip(expect) {
        assert_abs_diff_eq!(*v, e, epsilon = 1e-6);
    }
    assert!(s.round >= 2, "the all-fused guess must be sieved out");
    assert!(t.residual_norm <= 1e-6);
    let labels = extract_labels(&inst, t.y.view(), 2e-16, lambda);
    assert_eq!(labels.num_clusters, 3);

    let oracle = common::dual_oracle(&inst, lambda, 20_000);
    for (a, b) in t.x.iter().zip(&oracle) {
        assert_abs_diff_eq!(*a, *b, epsilon = 1e-6);
    }
}

#[test]
fn t1_full_fusion_threshold() {
    // fusing all three needs λ·(w02 + w12) ≥ |5 − 2|, i.e. λ ≥ 1.5
    let inst = common::t1();
    let (t, _) = as_solve(&inst, &SolveConfig::with_lambda(1.4), all_blocks(3)).unwrap();
    assert_eq!(extract_labels(&inst, t.y.view(), 2e-16, 1.4).num_clusters, 2);
    let (t, _) = as_solve(&inst, &SolveConfig::with_lambda(1.5), all_blocks(3)).unwrap();
    assert_eq!(extract_labels(&inst, t.y.view(), 2e-16, 1.5).num_clusters, 1);
}

#[test]
fn two_points_dual_on_the_boundary() {
    let inst = common::two_points();
    let (t, _) = as_solve(&inst, &SolveConfig::with_lambda(1.0), vec![0]).unwrap();
    assert_abs_diff_eq!(t.x[[0, 0]], 1.0, epsilon = 1e-6);
    assert_abs_diff_eq!(t.x[[0, 1]], 3.0, epsilon = 1e-6);
    // x − a + Bᵀz = 0 at node 0: 1 − 0 + z = 0
    assert_abs_diff_eq!(t.z[[0, 0]], -1.0, epsilon = 1e-6);

    let (t, _) = as_solve(&inst, &SolveConfig::with_lambda(2.0), vec![0]).unwrap();
    assert_eq!(t.x, array![[2.0, 2.0]]);
    assert_abs_diff_eq!(t.z[[0, 0]], -2.0, epsilon = 1e-12);
}

#[test]
fn sieving_agrees_with_the_dual_oracle() {
    let mut rng = common::rng(11);
    for case in 0..25 {
        let inst = common::random_knn_instance(&mut rng, 10, 3);
        let lambda = [0.05, 0.3, 1.0, 4.0][case % 4];
        let oracle = common::dual_oracle(&inst, lambda, 60_000);
        let f_star = common::objective(&inst, lambda, oracle.view());
        let cfg = SolveConfig::with_lambda(lambda);
        let i0: Vec<usize> = (0..inst.n_blocks()).filter(|_| rng.random_bool(0.7)).collect();
        for (name, (t, _)) in [
            ("as", as_solve(&inst, &cfg, i0.clone()).unwrap()),
            ("eas", eas_solve(&inst, &cfg, i0.clone()).unwrap()),
        ] {
            let f = common::objective(&inst, lambda, t.x.view());
            assert!(
                (f - f_star).abs() <= 1e-6 * (1.0 + f_star.abs()),
                "case {case} {name}: {f} vs oracle {f_star}"
            );
            let dist = (&t.x - &oracle).iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(dist <= 1e-4, "case {case} {name}: ‖x − x_oracle‖ = {dist}");
            let r = kkt_residual(&inst, lambda, t.x.view(), t.y.view(), t.z.view()).unwrap();
            assert_abs_diff_eq!(r, t.residual_norm, epsilon = 1e-15);
            assert!(r <= 1e-6, "case {case} {name}: residual {r}");
        }
    }
}

#[test]
fn direct_admm_agrees_with_the_dual_oracle() {
    let mut rng = common::rng(5);
    for _ in 0..10 {
        let inst = common::random_knn_instance(&mut rng, 12, 2);
        let lambda = rng.random_range(0.05..3.0);
        let t = solve_full(&inst, lambda, &AdmmConfig::default().with_tol(1e-9)).unwrap();
        let oracle = common::dual_oracle(&inst, lambda, 60_000);
        let f = primal_objective(&inst, lambda, t.x.view()).unwrap();
        let f_star = common::objective(&inst, lambda, oracle.view());
        assert!((f - f_star).abs() <= 1e-7 * (1.0 + f_star.abs()), "{f} vs {f_star}");
    }
}

#[test]
fn recovered_dual_is_exactly_stationary_on_gamma() {
    let mut rng = common::rng(23);
    let mut checked = 0;
    for _ in 0..30 {
        let inst = common::random_knn_instance(&mut rng, 12, 3);
        let lambda = rng.random_range(0.2..4.0);
        let (t, s) = as_solve(&inst, &SolveConfig::with_lambda(lambda), all_blocks(inst.n_blocks())).unwrap();
        let p = s.partition.as_ref().unwrap();
        if p.gamma().is_empty() {
            continue;
        }
        let mut stat = &t.x - &inst.data();
        stat += &inst.incidence().adjoint(t.z.view());
        for &g in p.gamma() {
            for v in stat.column(g) {
                assert!(v.abs() <= 1e-10, "γ node {g}: {v}");
            }
        }
        checked += 1;
    }
    assert!(checked > 5);
}

#[test]
fn apg_iterates_stay_in_the_null_space() {
    let mut rng = common::rng(31);
    for _ in 0..20 {
        let inst = common::random_graph_instance(&mut rng, 14, 2, 0.35);
        let index: Vec<usize> = (0..inst.n_blocks()).filter(|_| rng.random_bool(0.6)).collect();
        let p = build_partition(inst.incidence(), index.clone()).unwrap();
        if p.gamma().is_empty() {
            continue;
        }
        let proj = NullSpaceProjector::new(&inst, &p).unwrap();
        let rhs = common::random_data(&mut rng, 2, p.gamma().len()) * 5.0;
        let u0 = proj.min_norm_solution(rhs.view());
        // u0 solves B_{Iγ}ᵀ u = rhs
        let back = proj.apply_bt(u0.view());
        for (a, b) in back.iter().zip(&rhs) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-9);
        }
        let radii = vec![0.3; index.len()];
        let out = apg_minimize(u0.view(), &radii, &proj, 200, 0.0);
        for v in proj.apply_bt(out.d.view()).iter() {
            assert!(v.abs() <= 1e-10);
        }
        assert!(out.h_history.windows(2).all(|w| w[1].is_finite()));
    }
}

#[test]
fn path_on_t1_certifies_every_lambda() {
    let inst = common::t1();
    let result = solve_path(&inst, &PathConfig::default()).unwrap();
    assert_eq!(result.records.len(), 46);
    assert!(result.all_certified());
    // λ ≥ 1.5 keeps everything fused; below that, point 3 splits off
    for r in &result.records {
        let expect = if r.lambda >= 1.5 - 1e-12 { 1 } else { 2 };
        assert_eq!(r.num_clusters, expect, "λ = {}", r.lambda);
    }
    let direct = solve_path(
        &inst,
        &PathConfig {
            mode: SolveMode::Direct,
            ..PathConfig::default()
        },
    )
    .unwrap();
    for (a, b) in result.records.iter().zip(&direct.records) {
        assert!((a.objective - b.objective).abs() <= 1e-6 * (1.0 + b.objective.abs()));
    }
}

#[test]
fn sequential_and_parallel_agree() {
    let (inst, _) = common::moons(120);
    let mk = |execution| PathConfig {
        lambdas: vec![5.0, 2.0, 1.0],
        solve: SolveConfig {
            execution,
            ..SolveConfig::default()
        },
        ..PathConfig::default()
    };
    let a = solve_path(&inst, &mk(sieveclust::Execution::Sequential)).unwrap();
    let b = solve_path(&inst, &mk(sieveclust::Execution::Parallel)).unwrap();
    for (x, y) in a.solutions.iter().zip(&b.solutions) {
        let (x, y) = (x.as_ref().unwrap(), y.as_ref().unwrap());
        let diff = (&x.x - &y.x).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(diff <= 1e-9, "max |Δx| = {diff}");
    }
    assert_eq!(a.labels, b.labels);
}

#[test]
fn moons_have_the_expected_shape() {
    let (inst, arcs) = common::moons(500);
    assert_eq!(inst.dim(), 2);
    assert_eq!(inst.n_points(), 500);
    assert_eq!(arcs.iter().filter(|&&a| a == 0).count(), 250);
    let a: Array2<f64> = inst.data().to_owned();
    let upper = a.select(Axis(1), &(0..250).collect::<Vec<_>>());
    assert!(upper.row(1).mean().unwrap() > 0.4);
}
