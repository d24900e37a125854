//! Problem data for `min ½‖x − A‖²_F + λ Σ_l w_l ‖(Bx)_l‖₂`.

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::admm::AdmmConfig;
use crate::dual::ApgConfig;
use crate::error::{Error, Result};
use crate::graph::IncidenceMap;
use crate::kkt;
use crate::par::Execution;
use crate::prox::{self, norm2};

/// Default certification tolerance on `‖R_λ‖`.
pub const DEFAULT_EPS: f64 = 1e-6;
/// Default threshold under which a block of `Bx` counts as a structured zero.
pub const DEFAULT_EPS_HAT: f64 = 2e-16;

/// Weighted edge `(i, j)` with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(i: usize, j: usize, weight: f64) -> Self {
        Edge { i, j, weight }
    }
}

/// `p(y) = Σ_l w_l ‖y_l‖₂` over `d`-dimensional blocks, stored as the
/// columns of a `d × m` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRegularizer {
    weights: Vec<f64>,
    block_dim: usize,
    norm_exponent: f64,
}

impl BlockRegularizer {
    pub fn new(weights: Vec<f64>, block_dim: usize, norm_exponent: f64) -> Result<Self> {
        if !(norm_exponent >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "norm exponent must be >= 1, got {norm_exponent}"
            )));
        }
        if norm_exponent != 2.0 {
            return Err(Error::UnsupportedNorm(norm_exponent));
        }
        if let Some((l, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidEdges(format!(
                "weight of block {l} must be positive and finite, got {w}"
            )));
        }
        Ok(BlockRegularizer {
            weights,
            block_dim,
            norm_exponent,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn norm_exponent(&self) -> f64 {
        self.norm_exponent
    }

    pub fn n_blocks(&self) -> usize {
        self.weights.len()
    }

    /// Radius `λ w_l` of the dual ball of block `l`.
    #[inline]
    pub fn radius(&self, l: usize, lambda: f64) -> f64 {
        lambda * self.weights[l]
    }

    pub fn value(&self, y: ArrayView2<'_, f64>) -> f64 {
        y.axis_iter(Axis(1))
            .zip(&self.weights)
            .map(|(col, w)| w * col.dot(&col).sqrt())
            .sum()
    }

    /// `Prox_{λp}(y)`, blockwise soft-thresholding.
    pub fn prox(&self, y: ArrayView2<'_, f64>, lambda: f64) -> Array2<f64> {
        let mut out = y.to_owned();
        for (l, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let s = prox::shrink_factor(col.dot(&col).sqrt(), self.radius(l, lambda));
            col *= s;
        }
        out
    }

    /// Projection onto the product of balls `{z : ‖z_l‖ ≤ λ w_l}`, the
    /// domain of `λ p*(·/λ)`.
    pub fn project_dual(&self, z: ArrayView2<'_, f64>, lambda: f64) -> Array2<f64> {
        let mut out = z.to_owned();
        for (l, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let r = self.radius(l, lambda);
            let n = col.dot(&col).sqrt();
            if n > r {
                col *= if n > 0.0 { r / n } else { 0.0 };
            }
        }
        out
    }

    /// Errors with the first block outside its dual ball.
    pub fn check_dual(&self, z: ArrayView2<'_, f64>, lambda: f64) -> Result<()> {
        for (l, col) in z.axis_iter(Axis(1)).enumerate() {
            let r = self.radius(l, lambda);
            let n = col.dot(&col).sqrt();
            if n > r * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::InfeasibleDual {
                    block: l,
                    norm: n,
                    radius: r,
                });
            }
        }
        Ok(())
    }

    /// Blockwise projection of `u` onto `∂(λ p)(y)`.
    pub fn project_subdiff(
        &self,
        u: ArrayView2<'_, f64>,
        y: ArrayView2<'_, f64>,
        lambda: f64,
    ) -> Array2<f64> {
        let mut out = Array2::zeros(u.raw_dim());
        for l in 0..u.ncols() {
            let uc = u.column(l).to_vec();
            let yc = y.column(l).to_vec();
            let p = prox::project_subdiff_block(&uc, &yc, self.radius(l, lambda));
            out.column_mut(l)
                .iter_mut()
                .zip(p)
                .for_each(|(o, v)| *o = v);
        }
        out
    }
}

/// Data matrix (points as columns), weighted edge graph and regularizer.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    data: Array2<f64>,
    incidence: IncidenceMap,
    regularizer: BlockRegularizer,
}

impl ProblemInstance {
    /// Validates and lexicographically sorts `edges`.
    pub fn new(data: Array2<f64>, mut edges: Vec<Edge>, norm_exponent: f64) -> Result<Self> {
        let n = data.ncols();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "data matrix contains non-finite values".into(),
            ));
        }
        for e in &edges {
            if e.i >= e.j {
                return Err(Error::InvalidEdges(format!(
                    "edge ({}, {}) must satisfy i < j",
                    e.i, e.j
                )));
            }
            if e.j >= n {
                return Err(Error::InvalidEdges(format!(
                    "edge ({}, {}) references a node outside 0..{n}",
                    e.i, e.j
                )));
            }
        }
        edges.sort_by_key(|e| (e.i, e.j));
        if let Some(w) = edges.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::InvalidEdges(format!(
                "duplicate edge ({}, {})",
                w[0].i, w[0].j
            )));
        }
        let weights = edges.iter().map(|e| e.weight).collect();
        let regularizer = BlockRegularizer::new(weights, data.nrows(), norm_exponent)?;
        let incidence = IncidenceMap::new(n, edges.iter().map(|e| (e.i, e.j)).collect())?;
        Ok(ProblemInstance {
            data,
            incidence,
            regularizer,
        })
    }

    pub fn data(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn incidence(&self) -> &IncidenceMap {
        &self.incidence
    }

    pub fn regularizer(&self) -> &BlockRegularizer {
        &self.regularizer
    }

    /// Feature dimension `d` (also the block dimension).
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_points(&self) -> usize {
        self.data.ncols()
    }

    pub fn n_blocks(&self) -> usize {
        self.incidence.n_edges()
    }

    pub fn weights(&self) -> &[f64] {
        self.regularizer.weights()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.incidence
            .edges()
            .iter()
            .zip(self.regularizer.weights())
            .map(|(&(i, j), &w)| Edge::new(i, j, w))
    }

    /// `∇f(x) = x − A`.
    pub fn gradient(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        &x - &self.data
    }

    pub(crate) fn check_primal(&self, x: ArrayView2<'_, f64>, context: &'static str) -> Result<()> {
        if x.dim() != self.data.dim() {
            return Err(Error::shape(context, self.data.dim(), x.dim()));
        }
        Ok(())
    }

    pub(crate) fn check_blocks(&self, y: ArrayView2<'_, f64>, context: &'static str) -> Result<()> {
        let expected = (self.dim(), self.n_blocks());
        if y.dim() != expected {
            return Err(Error::shape(context, expected, y.dim()));
        }
        Ok(())
    }
}

/// A primal-dual candidate `(x, y, z)` with its KKT residual and relative
/// duality gap, both computed from the stored fields on construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KktTriple {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    pub z: Array2<f64>,
    pub residual_norm: f64,
    pub gap: f64,
}

impl KktTriple {
    pub fn evaluate(
        inst: &ProblemInstance,
        lambda: f64,
        x: Array2<f64>,
        y: Array2<f64>,
        z: Array2<f64>,
    ) -> Result<Self> {
        let residual_norm = kkt::kkt_residual(inst, lambda, x.view(), y.view(), z.view())?;
        let gap = kkt::duality_gap(inst, lambda, x.view(), z.view())?;
        Ok(KktTriple {
            x,
            y,
            z,
            residual_norm,
            gap,
        })
    }

    pub fn is_certified(&self, eps: f64) -> bool {
        self.residual_norm <= eps
    }

    /// Number of blocks of `y` with norm at most `eps_hat`.
    pub fn zero_blocks(&self, eps_hat: f64) -> usize {
        self.y
            .axis_iter(Axis(1))
            .filter(|c| norm2(&c.to_vec()) <= eps_hat)
            .count()
    }
}

/// Per-λ solve settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub lambda: f64,
    /// Target for `‖R_λ‖`.
    pub eps: f64,
    /// Structured-zero threshold on blocks of `Bx`.
    pub eps_hat: f64,
    pub max_sieve_rounds: usize,
    /// Sub-solver tolerance as a fraction of `eps`.
    pub sub_tol_ratio: f64,
    /// Relative slack of the ball-membership test in the violation set.
    pub violation_slack: f64,
    /// Extra solves at a tighter tolerance when no violation is found but
    /// the residual is still above `eps`.
    pub max_refinements: usize,
    pub admm: AdmmConfig,
    pub apg: ApgConfig,
    pub execution: Execution,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            lambda: 1.0,
            eps: DEFAULT_EPS,
            eps_hat: DEFAULT_EPS_HAT,
            max_sieve_rounds: 10_000,
            sub_tol_ratio: 0.5,
            violation_slack: 1e-8,
            max_refinements: 3,
            admm: AdmmConfig::default(),
            apg: ApgConfig::default(),
            execution: Execution::default(),
        }
    }
}

impl SolveConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        SolveConfig {
            lambda,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.eps_hat > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps_hat must be positive, got {}",
                self.eps_hat
            )));
        }
        if !(self.sub_tol_ratio > 0.0 && self.sub_tol_ratio <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sub_tol_ratio must lie in (0, 1], got {}",
                self.sub_tol_ratio
            )));
        }
        self.admm.validate()
    }
}
