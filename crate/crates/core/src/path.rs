//! Solution path over a decreasing `λ` grid. Each `λ` is warm-started with
//! the blocks of `Bx*` found zero at the previous one.

use std::time::Instant;

use ndarray::Axis;
use serde::{Deserialize, Serialize};

use crate::admm::{solve_full_with, AdmmWarmStart};
use crate::error::{Error, Result};
use crate::io::labels::{extract_labels, ClusterLabels};
use crate::model::{KktTriple, ProblemInstance, SolveConfig};
use crate::partition::build_partition;
use crate::prox::norm2;
use crate::sieve::{sieve_solve, SieveState, WarmPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    #[default]
    As,
    Eas,
    /// Plain ADMM on the full problem at every `λ`.
    Direct,
}

impl std::str::FromStr for SolveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "as" => Ok(SolveMode::As),
            "eas" => Ok(SolveMode::Eas),
            "direct" => Ok(SolveMode::Direct),
            other => Err(Error::InvalidParameter(format!(
                "unknown mode {other:?}; expected as, eas or direct"
            ))),
        }
    }
}

impl std::fmt::Display for SolveMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveMode::As => "as",
            SolveMode::Eas => "eas",
            SolveMode::Direct => "direct",
        })
    }
}

/// Guess for the zero blocks at the first `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialIndex {
    /// Every block, i.e. everything fused.
    #[default]
    All,
    Empty,
}

/// `λ = 10, 9.8, …, 1`.
pub fn default_lambda_grid() -> Vec<f64> {
    lambda_grid(10.0, 1.0, 0.2).expect("valid default grid")
}

/// `start, start − step, …` down to `stop` inclusive (within rounding).
pub fn lambda_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && stop > 0.0 && start >= stop && start.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "invalid λ grid {start}:{step}:{stop}"
        )));
    }
    let count = ((start - stop) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start - k as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathConfig {
    pub lambdas: Vec<f64>,
    pub mode: SolveMode,
    pub initial: InitialIndex,
    /// Per-λ settings; its `lambda` field is ignored.
    pub solve: SolveConfig,
    /// Keep the full `(x, y, z)` of every grid point.
    pub keep_solutions: bool,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig {
            lambdas: default_lambda_grid(),
            mode: SolveMode::As,
            initial: InitialIndex::All,
            solve: SolveConfig::default(),
            keep_solutions: true,
        }
    }
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.lambdas.windows(2).find(|w| !(w[0] > w[1])) {
            return Err(Error::InvalidParameter(format!(
                "λ sequence must be strictly decreasing: {} then {}",
                w[0], w[1]
            )));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidParameter(format!("λ must be positive, got {l}")));
        }
        self.solve.validate()
    }
}

/// JSON has no NaN; failed grid points round-trip through `null`.
fn f64_or_nan<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Diagnostics for one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaRecord {
    pub lambda: f64,
    pub rounds: usize,
    /// `|α| + |β|` of the final reduced problem.
    pub reduced_n: usize,
    /// `|I^c|` of the final reduced problem.
    pub reduced_m: usize,
    #[serde(deserialize_with = "f64_or_nan")]
    pub residual: f64,
    #[serde(deserialize_with = "f64_or_nan")]
    pub gap: f64,
    pub seconds: f64,
    pub num_clusters: usize,
    pub certified: bool,
    #[serde(deserialize_with = "f64_or_nan")]
    pub objective: f64,
    pub initial_index_len: usize,
    pub fused_blocks: usize,
    pub refinements: usize,
    pub admm_iterations: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PathResult {
    pub mode: SolveMode,
    pub n_points: usize,
    pub n_blocks: usize,
    pub eps: f64,
    pub records: Vec<LambdaRecord>,
    pub labels: Vec<ClusterLabels>,
    /// Present when `keep_solutions` was set; aligned with `records`
    /// (failed grid points hold `None`).
    pub solutions: Vec<Option<KktTriple>>,
}

impl PathResult {
    pub fn all_certified(&self) -> bool {
        self.records.iter().all(|r| r.certified)
    }

    pub fn total_seconds(&self) -> f64 {
        self.records.iter().map(|r| r.seconds).sum()
    }

    pub fn total_rounds(&self) -> usize {
        self.records.iter().map(|r| r.rounds).sum()
    }

    /// Mean of the per-λ reduced node counts.
    pub fn average_reduced_n(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(|r| r.reduced_n as f64).sum::<f64>() / self.records.len() as f64
    }
}

struct GridSolve {
    triple: KktTriple,
    rounds: usize,
    reduced_n: usize,
    reduced_m: usize,
    refinements: usize,
    admm_iterations: usize,
    sigma: Option<f64>,
}

/// `{l : ‖(Bx)_l‖ < ε̂}`.
pub fn zero_blocks_of(inst: &ProblemInstance, x: ndarray::ArrayView2<'_, f64>, eps_hat: f64) -> Vec<usize> {
    let bx = inst.incidence().apply(x);
    bx.axis_iter(Axis(1))
        .enumerate()
        .filter(|(_, c)| norm2(&c.to_vec()) < eps_hat)
        .map(|(l, _)| l)
        .collect()
}

/// Solves at every `λ` in order, by sieving or by the direct baseline.
/// A failing grid point is recorded and skipped.
pub fn solve_path(inst: &ProblemInstance, pcfg: &PathConfig) -> Result<PathResult> {
    pcfg.validate()?;
    let eps = pcfg.solve.eps;
    let eps_hat = pcfg.solve.eps_hat;
    let mut result = PathResult {
        mode: pcfg.mode,
        n_points: inst.n_points(),
        n_blocks: inst.n_blocks(),
        eps,
        ..Default::default()
    };
    let mut index: Vec<usize> = match pcfg.initial {
        InitialIndex::All => (0..inst.n_blocks()).collect(),
        InitialIndex::Empty => Vec::new(),
    };
    let mut warm: Option<WarmPoint> = None;
    let empty = build_partition(inst.incidence(), Vec::new())?;

    for &lambda in &pcfg.lambdas {
        let cfg = SolveConfig {
            lambda,
            ..pcfg.solve.clone()
        };
        let start = Instant::now();
        let initial_index_len = index.len();
        let outcome: Result<GridSolve> = match pcfg.mode {
            SolveMode::Direct => {
                let admm_warm = warm.as_ref().map(|w| {
                    AdmmWarmStart::from_full(&empty, w.x.view(), w.y.view(), w.z.view(), w.sigma)
                });
                solve_full_with(
                    inst,
                    lambda,
                    &cfg.admm.with_tol(cfg.sub_tol_ratio * eps),
                    admm_warm.as_ref(),
                    cfg.execution,
                )
                .map(|s| GridSolve {
                    triple: s.triple,
                    rounds: 1,
                    reduced_n: inst.n_points(),
                    reduced_m: inst.n_blocks(),
                    refinements: 0,
                    admm_iterations: s.iterations,
                    sigma: Some(s.sigma),
                })
            }
            SolveMode::As | SolveMode::Eas => sieve_solve(
                inst,
                &cfg,
                index.clone(),
                pcfg.mode == SolveMode::Eas,
                warm.as_ref(),
            )
            .map(|(triple, s): (KktTriple, SieveState)| GridSolve {
                triple,
                rounds: s.round,
                reduced_n: s.reduced_nodes(),
                reduced_m: s.reduced_blocks(),
                refinements: s.refinements,
                admm_iterations: s.admm_iterations,
                sigma: s.last_sub.as_ref().map(|sub| sub.sigma),
            }),
        };
        let seconds = start.elapsed().as_secs_f64();

        match outcome {
            Ok(GridSolve {
                triple,
                rounds,
                reduced_n,
                reduced_m,
                refinements,
                admm_iterations,
                sigma,
            }) => {
                let labels = extract_labels(inst, triple.y.view(), eps_hat, lambda);
                let objective = crate::kkt::primal_objective(inst, lambda, triple.x.view())?;
                let record = LambdaRecord {
                    lambda,
                    rounds,
                    reduced_n,
                    reduced_m,
                    residual: triple.residual_norm,
                    gap: triple.gap,
                    seconds,
                    num_clusters: labels.num_clusters,
                    certified: triple.is_certified(eps),
                    objective,
                    initial_index_len,
                    fused_blocks: triple.zero_blocks(eps_hat),
                    refinements,
                    admm_iterations,
                    error: None,
                };
                log::info!(
                    "λ = {lambda:.4}: rounds {rounds}, reduced {reduced_n}/{reduced_m}, residual {:.2e}, clusters {}, {seconds:.3}s",
                    triple.residual_norm,
                    labels.num_clusters
                );
                index = zero_blocks_of(inst, triple.x.view(), eps_hat);
                warm = Some(WarmPoint::from_triple(&triple, sigma));
                result.records.push(record);
                result.labels.push(labels);
                if pcfg.keep_solutions {
                    result.solutions.push(Some(triple));
                }
            }
            Err(e) => {
                log::error!("λ = {lambda}: {e}");
                result.records.push(LambdaRecord {
                    lambda,
                    rounds: 0,
                    reduced_n: 0,
                    reduced_m: 0,
                    residual: f64::NAN,
                    gap: f64::NAN,
                    seconds,
                    num_clusters: 0,
                    certified: false,
                    objective: f64::NAN,
                    initial_index_len,
                    fused_blocks: 0,
                    refinements: 0,
                    admm_iterations: 0,
                    error: Some(e.to_string()),
                });
                result.labels.push(ClusterLabels::singletons(inst.n_points(), lambda));
                if pcfg.keep_solutions {
                    result.solutions.push(None);
                }
            }
        }
    }
    Ok(result)
}
