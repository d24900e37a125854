//! Adaptive sieving for one `λ`: guess a set `I` of zero blocks, solve the
//! reduced problem, recover a full primal-dual point and drop every guessed
//! block whose dual leaves its ball. The enhanced variant additionally tries
//! to certify the primal point on the enlarged zero set `Ĩ` once the
//! objective has stalled.

use std::time::Instant;

use ndarray::{Array2, ArrayView2, Axis};

use crate::admm::{solve_reduced_admm, AdmmWarmStart, SubSolution};
use crate::dual::{complete_dual, recover_dual, violation_set, DualRecovery, NullSpaceProjector};
use crate::error::{Error, Result};
use crate::model::{KktTriple, ProblemInstance, SolveConfig};
use crate::partition::{build_partition, normalize_index_set, recover_primal, reduce_problem, IndexPartition};
use crate::prox::norm2;

/// How the returned triple was accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Certificate {
    /// `‖R_λ(x̄, ȳ, ū)‖ ≤ ε` on the sieved dual.
    Kkt,
    /// Certified on `Ĩ` by the enhanced check.
    Enhanced,
    /// No violation left, but the residual stayed above `ε`.
    Uncertified,
}

#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub index_len: usize,
    pub reduced_nodes: usize,
    pub reduced_blocks: usize,
    pub admm_iterations: usize,
    pub sub_kkt: f64,
    pub residual: f64,
    pub objective: f64,
    pub violations: usize,
    pub apg_iters: usize,
    pub refinement: bool,
    pub eas_attempted: bool,
}

/// Loop state of one sieving run.
#[derive(Debug, Clone)]
pub struct SieveState {
    /// Number of sieving rounds (distinct index sets) used.
    pub round: usize,
    /// Index set of the last round.
    pub index_set: Vec<usize>,
    pub initial_index_len: usize,
    pub partition: Option<IndexPartition>,
    pub last_sub: Option<SubSolution>,
    pub last_dual: Option<DualRecovery>,
    /// `F_λ(x̄^i)` after every reduced solve, refinements included.
    pub objective_history: Vec<f64>,
    /// `J` of the last round.
    pub violations: Vec<usize>,
    pub certificate: Certificate,
    pub refinements: usize,
    pub admm_iterations: usize,
    pub rounds: Vec<RoundRecord>,
    pub seconds: f64,
}

impl SieveState {
    fn new(index_set: &[usize]) -> Self {
        SieveState {
            round: 0,
            index_set: index_set.to_vec(),
            initial_index_len: index_set.len(),
            partition: None,
            last_sub: None,
            last_dual: None,
            objective_history: Vec::new(),
            violations: Vec::new(),
            certificate: Certificate::Uncertified,
            refinements: 0,
            admm_iterations: 0,
            rounds: Vec::new(),
            seconds: 0.0,
        }
    }

    pub fn certified(&self) -> bool {
        self.certificate != Certificate::Uncertified
    }

    /// `|α| + |β|` of the last round.
    pub fn reduced_nodes(&self) -> usize {
        self.rounds.last().map_or(0, |r| r.reduced_nodes)
    }

    /// `|I^c|` of the last round.
    pub fn reduced_blocks(&self) -> usize {
        self.rounds.last().map_or(0, |r| r.reduced_blocks)
    }
}

/// A full-size primal-dual point used to warm-start the first reduced solve.
#[derive(Debug, Clone)]
pub struct WarmPoint {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    pub z: Array2<f64>,
    pub sigma: Option<f64>,
}

impl WarmPoint {
    pub fn from_triple(t: &KktTriple, sigma: Option<f64>) -> Self {
        WarmPoint {
            x: t.x.clone(),
            y: t.y.clone(),
            z: t.z.clone(),
            sigma,
        }
    }

    fn restrict(&self, partition: &IndexPartition) -> AdmmWarmStart {
        AdmmWarmStart::from_full(partition, self.x.view(), self.y.view(), self.z.view(), self.sigma)
    }
}

/// Adaptive sieving from the initial guess `i0`.
pub fn as_solve(
    inst: &ProblemInstance,
    cfg: &SolveConfig,
    i0: Vec<usize>,
) -> Result<(KktTriple, SieveState)> {
    sieve_solve(inst, cfg, i0, false, None)
}

/// Adaptive sieving with the enhanced certification step.
pub fn eas_solve(
    inst: &ProblemInstance,
    cfg: &SolveConfig,
    i0: Vec<usize>,
) -> Result<(KktTriple, SieveState)> {
    sieve_solve(inst, cfg, i0, true, None)
}

/// Shared driver behind [`as_solve`] and [`eas_solve`], with an optional
/// warm start for the sub-solver.
pub fn sieve_solve(
    inst: &ProblemInstance,
    cfg: &SolveConfig,
    i0: Vec<usize>,
    enhanced: bool,
    warm: Option<&WarmPoint>,
) -> Result<(KktTriple, SieveState)> {
    cfg.validate()?;
    let start = Instant::now();
    let lambda = cfg.lambda;
    let eps = cfg.eps;
    let mut index = normalize_index_set(i0, inst.n_blocks())?;
    let mut state = SieveState::new(&index);
    let mut warm = warm.cloned();

    loop {
        if state.round >= cfg.max_sieve_rounds {
            state.seconds = start.elapsed().as_secs_f64();
            return Err(Error::SieveRoundsExceeded(Box::new(state)));
        }
        state.round += 1;
        state.index_set = index.clone();
        let partition = build_partition(inst.incidence(), index.clone())?;
        let red = reduce_problem(inst, &partition, lambda)?;
        let projector = NullSpaceProjector::new(inst, &partition)?;
        let mut tol = cfg.sub_tol_ratio * eps;
        let mut refinement = false;

        loop {
            let admm_warm = warm.as_ref().map(|w| w.restrict(&partition));
            let sub = solve_reduced_admm(&red, &cfg.admm.with_tol(tol), admm_warm.as_ref(), cfg.execution)?;
            state.admm_iterations += sub.iterations;
            let (x_bar, y_bar) = recover_primal(&partition, sub.x.view(), sub.y.view())?;
            let objective = red.objective(sub.x.view());
            state.objective_history.push(objective);

            let mut record = RoundRecord {
                index_len: index.len(),
                reduced_nodes: red.n_nodes(),
                reduced_blocks: red.n_blocks(),
                admm_iterations: sub.iterations,
                sub_kkt: sub.achieved_kkt,
                residual: f64::NAN,
                objective,
                violations: 0,
                apg_iters: 0,
                refinement,
                eas_attempted: false,
            };

            // enhanced trigger: from the second solve onward, on a stalled objective
            let hist = &state.objective_history;
            if enhanced && hist.len() >= 2 && (hist[hist.len() - 1] - hist[hist.len() - 2]).abs() <= eps {
                record.eas_attempted = true;
                if let Some((triple, dual)) =
                    eas_certify(inst, lambda, x_bar.view(), y_bar.view(), cfg)?
                {
                    record.residual = triple.residual_norm;
                    record.apg_iters = dual.apg_iters;
                    state.rounds.push(record);
                    state.certificate = Certificate::Enhanced;
                    state.partition = Some(partition);
                    state.last_sub = Some(sub);
                    state.last_dual = Some(dual);
                    state.seconds = start.elapsed().as_secs_f64();
                    return Ok((triple, state));
                }
            }

            let dual = recover_dual(
                inst,
                lambda,
                &partition,
                &projector,
                x_bar.view(),
                sub.xi.view(),
                &cfg.apg,
                eps,
            )?;
            let triple = KktTriple::evaluate(inst, lambda, x_bar, y_bar, dual.u.clone())?;
            record.residual = triple.residual_norm;
            record.apg_iters = dual.apg_iters;

            let mut violations = Vec::new();
            if !triple.is_certified(eps) {
                violations = violation_set(inst, lambda, &partition, dual.u.view(), cfg.violation_slack);
                if violations.is_empty() {
                    violations = violation_set(inst, lambda, &partition, dual.u.view(), 0.0);
                }
            }
            record.violations = violations.len();
            state.rounds.push(record);
            let sigma = Some(sub.sigma);
            state.last_sub = Some(sub);

            if triple.is_certified(eps) || violations.is_empty() {
                if triple.is_certified(eps) {
                    state.certificate = Certificate::Kkt;
                } else if state.refinements < cfg.max_refinements {
                    // the guess is consistent; the sub-solve was too loose
                    state.refinements += 1;
                    tol *= 0.1;
                    refinement = true;
                    warm = Some(WarmPoint::from_triple(&triple, sigma));
                    state.last_dual = Some(dual);
                    continue;
                } else {
                    log::warn!(
                        "λ = {lambda}: residual {:.3e} above ε = {eps:.1e} with no violated block",
                        triple.residual_norm
                    );
                }
                state.partition = Some(partition);
                state.last_dual = Some(dual);
                state.violations = violations;
                state.seconds = start.elapsed().as_secs_f64();
                return Ok((triple, state));
            }

            log::debug!(
                "λ = {lambda}: round {} drops {} of {} guessed blocks (residual {:.3e})",
                state.round,
                violations.len(),
                index.len(),
                triple.residual_norm
            );
            index = difference(&index, &violations);
            warm = Some(WarmPoint::from_triple(&triple, sigma));
            state.violations = violations;
            state.last_dual = Some(dual);
            break;
        }
    }
}

/// `a \ b` for sorted `a` and `b`.
fn difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len().saturating_sub(b.len()));
    let mut j = 0;
    for &v in a {
        while j < b.len() && b[j] < v {
            j += 1;
        }
        if j < b.len() && b[j] == v {
            continue;
        }
        out.push(v);
    }
    out
}

/// Enhanced certification of `x̄` on `Ĩ = {l : ‖ȳ_l‖ ≤ ε̂}`.
///
/// `ṽ` is the singleton subgradient off `Ĩ` and is completed on `Ĩ` by
/// the same projection machinery as the sieving dual. Returns the triple
/// `(x̄, ỹ, ṽ)` when its residual is at most `ε`.
pub fn eas_certify(
    inst: &ProblemInstance,
    lambda: f64,
    x_bar: ArrayView2<'_, f64>,
    y_bar: ArrayView2<'_, f64>,
    cfg: &SolveConfig,
) -> Result<Option<(KktTriple, DualRecovery)>> {
    inst.check_blocks(y_bar, "eas_certify y")?;
    let mut y = y_bar.to_owned();
    let mut zero = Vec::new();
    for (l, mut col) in y.axis_iter_mut(Axis(1)).enumerate() {
        if norm2(&col.to_vec()) <= cfg.eps_hat {
            col.fill(0.0);
            zero.push(l);
        }
    }
    let partition = build_partition(inst.incidence(), zero)?;
    let comp = partition.complement();
    let mut v_comp = Array2::zeros((inst.dim(), comp.len()));
    for (pos, &l) in comp.iter().enumerate() {
        let col = y.column(l);
        let n = norm2(&col.to_vec());
        let r = inst.regularizer().radius(l, lambda);
        v_comp.column_mut(pos).assign(&(&col * (r / n)));
    }
    let projector = NullSpaceProjector::new(inst, &partition)?;
    let dual = complete_dual(
        inst,
        lambda,
        &partition,
        &projector,
        x_bar,
        v_comp.view(),
        &cfg.apg,
        cfg.eps,
    )?;
    if !dual.apg_converged && dual.apg_obj > 0.5 * cfg.eps * cfg.eps {
        return Ok(None);
    }
    let triple = KktTriple::evaluate(inst, lambda, x_bar.to_owned(), y, dual.u.clone())?;
    Ok(triple.is_certified(cfg.eps).then_some((triple, dual)))
}
