#![allow(dead_code)]

use ndarray::{Array1, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sieveclust::io::moons::gen_two_half_moons_labeled;
use sieveclust::{build_knn_graph, Edge, ProblemInstance};

/// Seed and noise of the half-moon fixtures.
pub const MOONS_SEED: u64 = 1;
pub const MOONS_NOISE: f64 = 0.1;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `A = (0, 1, 5)` on the complete graph with unit weights.
pub fn t1() -> ProblemInstance {
    let a = Array2::from_shape_vec((1, 3), vec![0.0, 1.0, 5.0]).unwrap();
    let edges = vec![Edge::new(0, 1, 1.0), Edge::new(0, 2, 1.0), Edge::new(1, 2, 1.0)];
    ProblemInstance::new(a, edges, 2.0).unwrap()
}

pub fn two_points() -> ProblemInstance {
    let a = Array2::from_shape_vec((1, 2), vec![0.0, 4.0]).unwrap();
    ProblemInstance::new(a, vec![Edge::new(0, 1, 1.0)], 2.0).unwrap()
}

pub fn random_data(rng: &mut ChaCha8Rng, d: usize, n: usize) -> Array2<f64> {
    // a few loose groups so that fusion actually happens
    let groups = rng.random_range(1..=3);
    let centers: Vec<Vec<f64>> = (0..groups)
        .map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect();
    let mut a = Array2::zeros((d, n));
    for j in 0..n {
        let c = &centers[rng.random_range(0..groups)];
        for i in 0..d {
            a[[i, j]] = c[i] + rng.random_range(-0.7..0.7);
        }
    }
    a
}

/// Random k-NN instance with `2 ≤ N ≤ max_n` and `1 ≤ d ≤ max_d`.
pub fn random_knn_instance(rng: &mut ChaCha8Rng, max_n: usize, max_d: usize) -> ProblemInstance {
    let n = rng.random_range(3..=max_n);
    let d = rng.random_range(1..=max_d);
    let k = rng.random_range(1..n);
    build_knn_graph(random_data(rng, d, n).view(), k).unwrap()
}

/// Random graph with arbitrary positive weights.
pub fn random_graph_instance(rng: &mut ChaCha8Rng, n: usize, d: usize, p_edge: f64) -> ProblemInstance {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p_edge) {
                edges.push(Edge::new(i, j, rng.random_range(0.1..2.0)));
            }
        }
    }
    if edges.is_empty() {
        edges.push(Edge::new(0, n - 1, 1.0));
    }
    ProblemInstance::new(random_data(rng, d, n), edges, 2.0).unwrap()
}

pub fn moons(n: usize) -> (ProblemInstance, Vec<usize>) {
    let (a, arcs) = gen_two_half_moons_labeled(n, MOONS_NOISE, MOONS_SEED).unwrap();
    (build_knn_graph(a.view(), 10).unwrap(), arcs)
}

fn edge_list(inst: &ProblemInstance) -> Vec<(usize, usize, f64)> {
    inst.edges().map(|e| (e.i, e.j, e.weight)).collect()
}

/// `½‖X − A‖² + λ Σ w_ij ‖X_i − X_j‖`, written out from the edge list.
pub fn objective(inst: &ProblemInstance, lambda: f64, x: ArrayView2<'_, f64>) -> f64 {
    let a = inst.data();
    let fit: f64 = x.iter().zip(a.iter()).map(|(p, q)| 0.5 * (p - q).powi(2)).sum();
    let pen: f64 = edge_list(inst)
        .into_iter()
        .map(|(i, j, w)| {
            let diff = &x.column(i) - &x.column(j);
            w * diff.dot(&diff).sqrt()
        })
        .sum();
    fit + lambda * pen
}

/// Independent solver: accelerated projected gradient on the dual
/// `min ½‖A − Bᵀz‖² s.t. ‖z_l‖ ≤ λ w_l`, with `x = A − Bᵀz`.
pub fn dual_oracle(inst: &ProblemInstance, lambda: f64, iters: usize) -> Array2<f64> {
    let a = inst.data().to_owned();
    let (d, n) = a.dim();
    let edges = edge_list(inst);
    let mut deg = vec![0usize; n];
    for &(i, j, _) in &edges {
        deg[i] += 1;
        deg[j] += 1;
    }
    let lip = 2.0 * *deg.iter().max().unwrap_or(&1) as f64;
    let step = 1.0 / lip;
    let primal = |z: &Array2<f64>| {
        let mut x = a.clone();
        for (l, &(i, j, _)) in edges.iter().enumerate() {
            for r in 0..d {
                x[[r, i]] -= z[[r, l]];
                x[[r, j]] += z[[r, l]];
            }
        }
        x
    };
    let project = |z: &mut Array2<f64>| {
        for (l, &(_, _, w)) in edges.iter().enumerate() {
            let mut col = z.column_mut(l);
            let nrm = col.dot(&col).sqrt();
            let r = lambda * w;
            if nrm > r {
                col *= r / nrm;
            }
        }
    };
    let m = edges.len();
    let mut z = Array2::<f64>::zeros((d, m));
    let mut zh = z.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let x = primal(&zh);
        // gradient of the dual objective is −Bx
        let mut next = zh.clone();
        for (l, &(i, j, _)) in edges.iter().enumerate() {
            for r in 0..d {
                next[[r, l]] += step * (x[[r, i]] - x[[r, j]]);
            }
        }
        project(&mut next);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        zh = &next + &((&next - &z) * ((t - 1.0) / t_next));
        z = next;
        t = t_next;
    }
    primal(&z)
}

/// Best agreement between two labelings with two classes, over both
/// matchings.
pub fn two_class_agreement(labels: &[usize], truth: &[usize]) -> f64 {
    let same = labels.iter().zip(truth).filter(|(a, b)| a == b).count();
    let n = labels.len() as f64;
    (same as f64 / n).max(1.0 - same as f64 / n)
}

pub fn column_norms(m: ArrayView2<'_, f64>) -> Array1<f64> {
    m.columns().into_iter().map(|c| c.dot(&c).sqrt()).collect()
}
