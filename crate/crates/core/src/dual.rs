//! Recovery of a full dual point from a reduced solution.
//!
//! With multipliers fixed on `I^c`, stationarity on the eliminated nodes `γ`
//! is the linear system `B_{Iγ}ᵀ u_I = −g_γ`. Its minimum-norm solution
//! `(u_I)_0` is corrected by `d ∈ Null(B_{Iγ}ᵀ)` that brings `u_I` as close
//! as possible to the subdifferential balls, found by accelerated projected
//! gradient on `h(d) = ½ dist²((u_I)_0 + d, C)`.

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram_of_rows, SparseCholesky};
use crate::model::ProblemInstance;
use crate::partition::{IndexPartition, NodeRole};
use crate::prox::norm2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ApgConfig {
    pub max_iter: usize,
    /// Stopping tolerance as a fraction of the certification `eps`.
    pub tol_ratio: f64,
}

impl Default for ApgConfig {
    fn default() -> Self {
        ApgConfig {
            max_iter: 10,
            tol_ratio: 0.5,
        }
    }
}

/// `Π_Null(B_{Iγ}ᵀ)` and the minimum-norm solve, sharing one factorization
/// of the grounded Laplacian `B_{Iγ}ᵀ B_{Iγ}`.
#[derive(Debug)]
pub struct NullSpaceProjector {
    n_gamma: usize,
    /// `γ` positions (with sign) touched by each edge of `I`.
    rows: Vec<Vec<(usize, f64)>>,
    chol: SparseCholesky,
}

impl NullSpaceProjector {
    pub fn new(inst: &ProblemInstance, partition: &IndexPartition) -> Result<Self> {
        let edges = inst.incidence().edges();
        let rows: Vec<Vec<(usize, f64)>> = partition
            .index_set()
            .iter()
            .map(|&l| {
                let (i, j) = edges[l];
                let mut row = Vec::with_capacity(2);
                if let NodeRole::Gamma(g) = partition.role(i) {
                    row.push((g, 1.0));
                }
                if let NodeRole::Gamma(g) = partition.role(j) {
                    row.push((g, -1.0));
                }
                row
            })
            .collect();
        let n_gamma = partition.gamma().len();
        let gram = gram_of_rows(n_gamma, rows.iter().map(|r| r.as_slice()));
        let chol = SparseCholesky::factor(&gram).map_err(|e| {
            Error::Partition(format!("B_Iγ does not have full column rank: {e}"))
        })?;
        Ok(NullSpaceProjector {
            n_gamma,
            rows,
            chol,
        })
    }

    pub fn n_gamma(&self) -> usize {
        self.n_gamma
    }

    pub fn n_index(&self) -> usize {
        self.rows.len()
    }

    /// `B_{Iγ}ᵀ u` for `u` over the blocks of `I`.
    pub fn apply_bt(&self, u: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = Array2::zeros((u.nrows(), self.n_gamma));
        for (l, row) in self.rows.iter().enumerate() {
            for &(g, s) in row {
                for k in 0..u.nrows() {
                    out[[k, g]] += s * u[[k, l]];
                }
            }
        }
        out
    }

    /// `B_{Iγ} t` for `t` over `γ`.
    pub fn apply_b(&self, t: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = Array2::zeros((t.nrows(), self.rows.len()));
        for (l, row) in self.rows.iter().enumerate() {
            for &(g, s) in row {
                for k in 0..t.nrows() {
                    out[[k, l]] += s * t[[k, g]];
                }
            }
        }
        out
    }

    fn solve_gram(&self, rhs: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = Array2::zeros(rhs.raw_dim());
        for (k, row) in rhs.axis_iter(Axis(0)).enumerate() {
            let sol = self.chol.solve(&row.to_vec());
            out.row_mut(k).assign(&ndarray::ArrayView1::from(&sol[..]));
        }
        out
    }

    /// Minimum-norm `u` with `B_{Iγ}ᵀ u = rhs`.
    pub fn min_norm_solution(&self, rhs: ArrayView2<'_, f64>) -> Array2<f64> {
        self.apply_b(self.solve_gram(rhs).view())
    }

    /// `a − B_{Iγ}(B_{Iγ}ᵀB_{Iγ})⁻¹B_{Iγ}ᵀ a`.
    pub fn project(&self, a: ArrayView2<'_, f64>) -> Array2<f64> {
        let bt = self.apply_bt(a);
        let corr = self.min_norm_solution(bt.view());
        &a - &corr
    }
}

/// `Σ_l ½ (‖v_l‖ − r_l)₊²`, half the squared distance to the product of balls.
pub fn ball_distance_sq_half(v: ArrayView2<'_, f64>, radii: &[f64]) -> f64 {
    v.axis_iter(Axis(1))
        .zip(radii)
        .map(|(c, r)| {
            let e = (c.dot(&c).sqrt() - r).max(0.0);
            0.5 * e * e
        })
        .sum()
}

/// `v − Π_C(v)` blockwise, which is also `∇h`.
fn ball_residual(v: ArrayView2<'_, f64>, radii: &[f64]) -> Array2<f64> {
    let mut out = v.to_owned();
    for (mut c, &r) in out.axis_iter_mut(Axis(1)).zip(radii) {
        let n = c.dot(&c).sqrt();
        let s = if n > r { 1.0 - r / n } else { 0.0 };
        c *= s;
    }
    out
}

#[derive(Debug, Clone)]
pub struct ApgOutcome {
    pub d: Array2<f64>,
    pub iterations: usize,
    /// `h(d^k)` for `k = 1, 2, …`.
    pub h_history: Vec<f64>,
    pub converged: bool,
}

impl ApgOutcome {
    pub fn h(&self) -> f64 {
        self.h_history.last().copied().unwrap_or(0.0)
    }
}

/// Accelerated projected gradient with `L = 1` on
/// `min h(d) s.t. d ∈ Null(B_{Iγ}ᵀ)`, starting from `d⁰ = 0`.
pub fn apg_minimize(
    u0: ArrayView2<'_, f64>,
    radii: &[f64],
    projector: &NullSpaceProjector,
    max_iter: usize,
    eps: f64,
) -> ApgOutcome {
    let mut d_prev = Array2::<f64>::zeros(u0.raw_dim());
    let mut d_hat = d_prev.clone();
    let mut t = 1.0f64;
    let mut h_history = Vec::new();
    let mut converged = false;
    let mut k = 0;
    while k < max_iter {
        k += 1;
        let grad = ball_residual((&u0 + &d_hat).view(), radii);
        let d_k = projector.project((&d_hat - &grad).view());
        let v = &u0 + &d_k;
        let h = ball_distance_sq_half(v.view(), radii);
        h_history.push(h);
        let step = (&d_k - &d_prev).iter().map(|a| a * a).sum::<f64>().sqrt();
        if step.max((2.0 * h).sqrt()) <= eps {
            d_prev = d_k;
            converged = true;
            break;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        d_hat = &d_k + &((&d_k - &d_prev) * ((t - 1.0) / t_next));
        d_prev = d_k;
        t = t_next;
    }
    ApgOutcome {
        d: d_prev,
        iterations: k,
        h_history,
        converged,
    }
}

/// Recovered dual point: `u` over all blocks, and `w = u_I − Π(u_I)`.
#[derive(Debug, Clone)]
pub struct DualRecovery {
    pub u: Array2<f64>,
    pub w: Array2<f64>,
    pub apg_iters: usize,
    pub apg_obj: f64,
    pub apg_converged: bool,
}

/// Completes a dual point whose `I^c` blocks are fixed to `u_comp` (in
/// `partition.complement()` order): `u_I = (u_I)_0 + d̄`.
pub fn complete_dual(
    inst: &ProblemInstance,
    lambda: f64,
    partition: &IndexPartition,
    projector: &NullSpaceProjector,
    x: ArrayView2<'_, f64>,
    u_comp: ArrayView2<'_, f64>,
    apg: &ApgConfig,
    eps: f64,
) -> Result<DualRecovery> {
    let d = inst.dim();
    let m = inst.n_blocks();
    let comp = partition.complement();
    if u_comp.dim() != (d, comp.len()) {
        return Err(Error::shape("complete_dual u_comp", (d, comp.len()), u_comp.dim()));
    }
    inst.check_primal(x, "complete_dual x")?;
    let mut u = Array2::zeros((d, m));
    for (pos, &l) in comp.iter().enumerate() {
        u.column_mut(l).assign(&u_comp.column(pos));
    }
    let index = partition.index_set();
    if index.is_empty() {
        return Ok(DualRecovery {
            u,
            w: Array2::zeros((d, 0)),
            apg_iters: 0,
            apg_obj: 0.0,
            apg_converged: true,
        });
    }

    // g = ∇f(x) + B_{I^c}ᵀ u_{I^c}, restricted to γ
    let mut g = inst.gradient(x);
    g += &inst.incidence().adjoint(u.view());
    let g_gamma = g.select(Axis(1), partition.gamma());
    let u0 = projector.min_norm_solution((-g_gamma).view());

    let radii: Vec<f64> = index
        .iter()
        .map(|&l| inst.regularizer().radius(l, lambda))
        .collect();
    let out = apg_minimize(u0.view(), &radii, projector, apg.max_iter, apg.tol_ratio * eps);
    let u_index = &u0 + &out.d;
    let w = ball_residual(u_index.view(), &radii);
    for (pos, &l) in index.iter().enumerate() {
        u.column_mut(l).assign(&u_index.column(pos));
    }
    Ok(DualRecovery {
        u,
        w,
        apg_iters: out.iterations,
        apg_obj: out.h(),
        apg_converged: out.converged,
    })
}

/// Dual recovery after a reduced solve: `ū_{I^c} = ξ̂`, then
/// [`complete_dual`] at the recovered `x̄`.
pub fn recover_dual(
    inst: &ProblemInstance,
    lambda: f64,
    partition: &IndexPartition,
    projector: &NullSpaceProjector,
    x_bar: ArrayView2<'_, f64>,
    xi: ArrayView2<'_, f64>,
    apg: &ApgConfig,
    eps: f64,
) -> Result<DualRecovery> {
    complete_dual(inst, lambda, partition, projector, x_bar, xi, apg, eps)
}

/// `J = {j ∈ I : ‖ū_j‖ > λ w_j (1 + slack)}`.
pub fn violation_set(
    inst: &ProblemInstance,
    lambda: f64,
    partition: &IndexPartition,
    u: ArrayView2<'_, f64>,
    slack: f64,
) -> Vec<usize> {
    partition
        .index_set()
        .iter()
        .copied()
        .filter(|&l| {
            let n = norm2(&u.column(l).to_vec());
            n > inst.regularizer().radius(l, lambda) * (1.0 + slack)
        })
        .collect()
}
