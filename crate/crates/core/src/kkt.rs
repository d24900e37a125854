//! Objectives, relative duality gap and the KKT residual
//! `R_λ(x, y, z) = (∇f(x) + Bᵀz, y − Prox_{λp}(y + z), Bx − y)`.
//!
//! The three parts are stacked and measured in the Euclidean (Frobenius) norm.

use ndarray::ArrayView2;

use crate::error::Result;
use crate::model::ProblemInstance;

/// Squared norms of the three parts of `R_λ`, in order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualParts {
    pub stationarity: f64,
    pub prox: f64,
    pub feasibility: f64,
}

impl ResidualParts {
    pub fn norm(&self) -> f64 {
        (self.stationarity + self.prox + self.feasibility).sqrt()
    }
}

pub fn kkt_residual_parts(
    inst: &ProblemInstance,
    lambda: f64,
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    z: ArrayView2<'_, f64>,
) -> Result<ResidualParts> {
    inst.check_primal(x, "kkt_residual x")?;
    inst.check_blocks(y, "kkt_residual y")?;
    inst.check_blocks(z, "kkt_residual z")?;
    let inc = inst.incidence();

    let mut stat = inst.gradient(x);
    stat += &inc.adjoint(z);
    let stationarity = stat.iter().map(|v| v * v).sum();

    let yz = &y + &z;
    let p = inst.regularizer().prox(yz.view(), lambda);
    let prox = y.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum();

    let bx = inc.apply(x);
    let feasibility = bx.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();

    Ok(ResidualParts {
        stationarity,
        prox,
        feasibility,
    })
}

/// `‖R_λ(x, y, z)‖`.
pub fn kkt_residual(
    inst: &ProblemInstance,
    lambda: f64,
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    z: ArrayView2<'_, f64>,
) -> Result<f64> {
    Ok(kkt_residual_parts(inst, lambda, x, y, z)?.norm())
}

/// `F_λ(x) = ½‖x − A‖² + λ p(Bx)`.
pub fn primal_objective(inst: &ProblemInstance, lambda: f64, x: ArrayView2<'_, f64>) -> Result<f64> {
    inst.check_primal(x, "primal_objective x")?;
    let fit: f64 = x
        .iter()
        .zip(inst.data())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        * 0.5;
    let bx = inst.incidence().apply(x);
    Ok(fit + lambda * inst.regularizer().value(bx.view()))
}

/// `D_λ(z) = −½‖Bᵀz‖² + ⟨Bᵀz, A⟩` for dual-feasible `z`.
pub fn dual_objective(inst: &ProblemInstance, lambda: f64, z: ArrayView2<'_, f64>) -> Result<f64> {
    inst.check_blocks(z, "dual_objective z")?;
    inst.regularizer().check_dual(z, lambda)?;
    Ok(dual_value_unchecked(inst, z))
}

fn dual_value_unchecked(inst: &ProblemInstance, z: ArrayView2<'_, f64>) -> f64 {
    let btz = inst.incidence().adjoint(z);
    btz.iter()
        .zip(inst.data())
        .map(|(s, a)| s * a - 0.5 * s * s)
        .sum()
}

/// `η = (F − D) / (1 + |F| + |D|)` with `z` first projected onto the dual
/// feasible set.
pub fn duality_gap(
    inst: &ProblemInstance,
    lambda: f64,
    x: ArrayView2<'_, f64>,
    z: ArrayView2<'_, f64>,
) -> Result<f64> {
    inst.check_blocks(z, "duality_gap z")?;
    let primal = primal_objective(inst, lambda, x)?;
    let zp = inst.regularizer().project_dual(z, lambda);
    let dual = dual_value_unchecked(inst, zp.view());
    Ok(relative_gap(primal, dual))
}

#[inline]
pub fn relative_gap(primal: f64, dual: f64) -> f64 {
    (primal - dual) / (1.0 + primal.abs() + dual.abs())
}
