//! Two-block ADMM for the reduced problem
//! `min φ(x) + λ q(y)  s.t.  Ĥx = y`, and for the full problem as the
//! special case `I = ∅`.
//!
//! The `x`-step solves `(D + σĤᵀĤ) x = Dā + Ĥᵀ(σy − ξ)` one coordinate row
//! at a time with a cached sparse factorization. After the multiplier step
//! the prox part of the KKT residual vanishes identically, so the running
//! residual is `‖(σĤᵀ(y_k − y_{k+1}), Ĥx − y)‖`.

use ndarray::{Array2, ArrayView2, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kkt::relative_gap;
use crate::linalg::{diag_plus_laplacian, SparseCholesky};
use crate::model::{KktTriple, ProblemInstance};
use crate::par::{self, Execution};
use crate::partition::{
    build_partition, reduce_problem, restrict_blocks, restrict_nodes, IndexPartition,
    ReducedProblem,
};
use crate::prox::shrink_factor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdmmConfig {
    /// Initial penalty parameter.
    pub sigma: f64,
    pub max_iter: usize,
    /// Target for both the reduced KKT residual and the relative gap.
    pub tol: f64,
    /// Residual balancing of `σ`, with a numeric refactorization on change.
    pub adaptive_sigma: bool,
    pub balance_every: usize,
    pub balance_ratio: f64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        AdmmConfig {
            sigma: 1.0,
            max_iter: 50_000,
            tol: 1e-6,
            adaptive_sigma: true,
            balance_every: 20,
            balance_ratio: 10.0,
        }
    }
}

impl AdmmConfig {
    pub fn with_tol(&self, tol: f64) -> Self {
        AdmmConfig {
            tol,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ADMM sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ADMM tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 || self.balance_every == 0 {
            return Err(Error::InvalidParameter(
                "ADMM max_iter and balance_every must be positive".into(),
            ));
        }
        if !(self.balance_ratio > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "ADMM balance_ratio must exceed 1, got {}",
                self.balance_ratio
            )));
        }
        Ok(())
    }
}

/// Starting point for [`solve_reduced_admm`], in reduced coordinates.
#[derive(Debug, Clone)]
pub struct AdmmWarmStart {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    pub xi: Array2<f64>,
    pub sigma: Option<f64>,
}

impl AdmmWarmStart {
    /// Restriction of a full-size `(x, y, z)` onto the variables of
    /// `partition`; `z` on `I^c` becomes the multiplier.
    pub fn from_full(
        partition: &IndexPartition,
        x: ArrayView2<'_, f64>,
        y: ArrayView2<'_, f64>,
        z: ArrayView2<'_, f64>,
        sigma: Option<f64>,
    ) -> Self {
        AdmmWarmStart {
            x: restrict_nodes(partition, x),
            y: restrict_blocks(partition, y),
            xi: restrict_blocks(partition, z),
            sigma,
        }
    }
}

/// Solution of the reduced problem: `x` holds `x_α` then `x_β`.
#[derive(Debug, Clone)]
pub struct SubSolution {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    pub xi: Array2<f64>,
    pub n_alpha: usize,
    /// Reduced KKT residual recomputed from `(x, y, xi)`.
    pub achieved_kkt: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Penalty parameter at exit.
    pub sigma: f64,
}

impl SubSolution {
    pub fn x_alpha(&self) -> ArrayView2<'_, f64> {
        self.x.view().split_at(Axis(1), self.n_alpha).0
    }

    pub fn x_beta(&self) -> ArrayView2<'_, f64> {
        self.x.view().split_at(Axis(1), self.n_alpha).1
    }

    pub fn warm_start(&self) -> AdmmWarmStart {
        AdmmWarmStart {
            x: self.x.clone(),
            y: self.y.clone(),
            xi: self.xi.clone(),
            sigma: Some(self.sigma),
        }
    }
}

/// `‖(D(x − ā) + Ĥᵀξ, y − Prox_{λq}(y + ξ), Ĥx − y)‖`.
pub fn reduced_kkt_residual(
    red: &ReducedProblem,
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    xi: ArrayView2<'_, f64>,
) -> f64 {
    let mut stat = red.constraint_adjoint(xi);
    for (r, &n) in red.hessian_diag().iter().enumerate() {
        for k in 0..stat.nrows() {
            stat[[k, r]] += n * (x[[k, r]] - red.centroid()[[k, r]]);
        }
    }
    let mut total: f64 = stat.iter().map(|v| v * v).sum();
    let hx = red.constraint_apply(x);
    for l in 0..red.n_blocks() {
        let tau = red.lambda() * red.weights()[l];
        let yc = y.column(l);
        let v = &yc + &xi.column(l);
        let s = shrink_factor(v.dot(&v).sqrt(), tau);
        total += yc
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - s * b).powi(2))
            .sum::<f64>();
        total += hx
            .column(l)
            .iter()
            .zip(yc)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>();
    }
    total.sqrt()
}

/// Relative duality gap of the reduced problem at `(x, ξ)`.
pub fn reduced_gap(red: &ReducedProblem, x: ArrayView2<'_, f64>, xi: ArrayView2<'_, f64>) -> f64 {
    relative_gap(red.objective(x), red.dual_value(xi))
}

struct SystemMatrix<'a> {
    red: &'a ReducedProblem,
    chol: SparseCholesky,
}

impl<'a> SystemMatrix<'a> {
    fn new(red: &'a ReducedProblem, sigma: f64) -> Result<Self> {
        let mat = diag_plus_laplacian(red.hessian_diag(), red.edges(), sigma);
        Ok(SystemMatrix {
            red,
            chol: SparseCholesky::factor(&mat)?,
        })
    }

    fn refresh(&mut self, sigma: f64) -> Result<()> {
        let mat = diag_plus_laplacian(self.red.hessian_diag(), self.red.edges(), sigma);
        self.chol.refactor(&mat)
    }
}

pub fn solve_reduced_admm(
    red: &ReducedProblem,
    cfg: &AdmmConfig,
    warm: Option<&AdmmWarmStart>,
    exec: Execution,
) -> Result<SubSolution> {
    cfg.validate()?;
    let d = red.dim();
    let n = red.n_nodes();
    let m = red.n_blocks();
    let lambda = red.lambda();
    let centroid = red.centroid();
    let diag = red.hessian_diag();

    let (mut y, mut xi, mut sigma) = match warm {
        Some(w) => {
            if w.y.dim() != (d, m) || w.xi.dim() != (d, m) {
                return Err(Error::shape("solve_reduced_admm warm start", (d, m), w.y.dim()));
            }
            (w.y.clone(), w.xi.clone(), w.sigma.unwrap_or(cfg.sigma))
        }
        None => (
            red.constraint_apply(centroid),
            Array2::zeros((d, m)),
            cfg.sigma,
        ),
    };
    let mut system = SystemMatrix::new(red, sigma)?;
    // D ā is fixed across iterations
    let mut da = centroid.to_owned();
    for (r, mut col) in da.axis_iter_mut(Axis(1)).enumerate() {
        col *= diag[r];
    }
    let radii: Vec<f64> = red.weights().iter().map(|w| lambda * w).collect();

    let mut x = centroid.to_owned();
    let mut iterations = 0;
    let mut converged = false;
    let mut gap = f64::INFINITY;
    let mut achieved = f64::INFINITY;
    let (mut r_norm, mut s_norm) = (0.0, 0.0);

    while iterations < cfg.max_iter {
        iterations += 1;

        let mut rhs = red.constraint_adjoint((&y * sigma - &xi).view());
        rhs += &da;
        let solve_row = |k: usize| system.chol.solve(rhs.row(k).as_slice().unwrap());
        let rows: Vec<Vec<f64>> = if exec.fan_out(n) {
            par::map_indices(exec, d, solve_row)
        } else {
            (0..d).map(solve_row).collect()
        };
        for (k, row) in rows.into_iter().enumerate() {
            x.row_mut(k).assign(&ndarray::ArrayView1::from(&row[..]));
        }

        let hx = red.constraint_apply(x.view());
        let y_old = y.clone();
        let update = |mut yc: ndarray::ArrayViewMut1<'_, f64>,
                      mut zc: ndarray::ArrayViewMut1<'_, f64>,
                      hc: ndarray::ArrayView1<'_, f64>,
                      &radius: &f64| {
            let mut v = zc.to_owned() / sigma;
            v += &hc;
            let s = shrink_factor(v.dot(&v).sqrt(), radius / sigma);
            yc.assign(&(v * s));
            Zip::from(&mut zc)
                .and(&hc)
                .and(&yc)
                .for_each(|z, &h, &yv| *z += sigma * (h - yv));
        };
        let zip = Zip::from(y.columns_mut())
            .and(xi.columns_mut())
            .and(hx.columns())
            .and(&radii[..]);
        #[cfg(feature = "parallel")]
        {
            if exec.fan_out(m) {
                zip.par_for_each(update);
            } else {
                zip.for_each(update);
            }
        }
        #[cfg(not(feature = "parallel"))]
        zip.for_each(update);

        r_norm = hx
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let dy = &y - &y_old;
        s_norm = sigma
            * red
                .constraint_adjoint(dy.view())
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt();

        if r_norm.hypot(s_norm) <= cfg.tol {
            achieved = reduced_kkt_residual(red, x.view(), y.view(), xi.view());
            if achieved <= cfg.tol {
                gap = reduced_gap(red, x.view(), xi.view());
                if gap <= cfg.tol {
                    converged = true;
                    break;
                }
            }
        }

        if cfg.adaptive_sigma && iterations % cfg.balance_every == 0 && m > 0 {
            let new_sigma = if r_norm > cfg.balance_ratio * s_norm {
                sigma * 2.0
            } else if s_norm > cfg.balance_ratio * r_norm {
                sigma / 2.0
            } else {
                sigma
            };
            if new_sigma != sigma && (1e-8..=1e8).contains(&new_sigma) {
                sigma = new_sigma;
                system.refresh(sigma)?;
            }
        }
    }

    if !converged {
        achieved = reduced_kkt_residual(red, x.view(), y.view(), xi.view());
        gap = reduced_gap(red, x.view(), xi.view());
        log::debug!(
            "ADMM stopped after {iterations} iterations: kkt {achieved:.3e}, gap {gap:.3e}, r {r_norm:.3e}, s {s_norm:.3e}"
        );
    }
    Ok(SubSolution {
        x,
        y,
        xi,
        n_alpha: red.n_alpha(),
        achieved_kkt: achieved,
        gap,
        iterations,
        converged,
        sigma,
    })
}

/// Full-problem ADMM result with solver diagnostics.
#[derive(Debug, Clone)]
pub struct FullSolve {
    pub triple: KktTriple,
    pub iterations: usize,
    pub converged: bool,
    pub sigma: f64,
}

/// ADMM on the unreduced problem, the direct baseline.
pub fn solve_full(inst: &ProblemInstance, lambda: f64, cfg: &AdmmConfig) -> Result<KktTriple> {
    Ok(solve_full_with(inst, lambda, cfg, None, Execution::default())?.triple)
}

/// [`solve_full`] with an optional warm start `(x, y, z, σ)` in full
/// coordinates.
pub fn solve_full_with(
    inst: &ProblemInstance,
    lambda: f64,
    cfg: &AdmmConfig,
    warm: Option<&AdmmWarmStart>,
    exec: Execution,
) -> Result<FullSolve> {
    let partition = build_partition(inst.incidence(), Vec::new())?;
    let red = reduce_problem(inst, &partition, lambda)?;
    let sub = solve_reduced_admm(&red, cfg, warm, exec)?;
    let triple = KktTriple::evaluate(inst, lambda, sub.x, sub.y, sub.xi)?;
    Ok(FullSolve {
        triple,
        iterations: sub.iterations,
        converged: sub.converged,
        sigma: sub.sigma,
    })
}
