use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::admm::AdmmConfig;
use crate::dual::ApgConfig;
use crate::error::{Error, Result};
use crate::graph::DEFAULT_K;
use crate::model::{SolveConfig, DEFAULT_EPS, DEFAULT_EPS_HAT};
use crate::par::Execution;
use crate::path::{lambda_grid, InitialIndex, PathConfig, SolveMode};

/// `λ` grid as `start:−step:stop`, or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaSpec {
    Range { start: f64, stop: f64, step: f64 },
    List(Vec<f64>),
}

impl Default for LambdaSpec {
    fn default() -> Self {
        LambdaSpec::Range {
            start: 10.0,
            stop: 1.0,
            step: 0.2,
        }
    }
}

impl LambdaSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            LambdaSpec::Range { start, stop, step } => lambda_grid(*start, *stop, *step),
            LambdaSpec::List(v) => Ok(v.clone()),
        }
    }
}

/// Synthetic two-half-moons input, used when no input file is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoonsSpec {
    pub n: usize,
    pub noise: f64,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunManifest {
    pub input: Option<PathBuf>,
    pub moons: Option<MoonsSpec>,
    pub k: usize,
    pub lambdas: LambdaSpec,
    pub eps: f64,
    pub eps_hat: f64,
    pub mode: SolveMode,
    pub initial: InitialIndex,
    pub max_sieve_rounds: usize,
    pub sub_tol_ratio: f64,
    pub admm: AdmmConfig,
    pub apg: ApgConfig,
    pub execution: Execution,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunManifest {
    fn default() -> Self {
        let solve = SolveConfig::default();
        RunManifest {
            input: None,
            moons: None,
            k: DEFAULT_K,
            lambdas: LambdaSpec::default(),
            eps: DEFAULT_EPS,
            eps_hat: DEFAULT_EPS_HAT,
            mode: SolveMode::As,
            initial: InitialIndex::All,
            max_sieve_rounds: solve.max_sieve_rounds,
            sub_tol_ratio: solve.sub_tol_ratio,
            admm: solve.admm,
            apg: solve.apg,
            execution: solve.execution,
            output_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl RunManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn solve_config(&self, lambda: f64) -> SolveConfig {
        SolveConfig {
            lambda,
            eps: self.eps,
            eps_hat: self.eps_hat,
            max_sieve_rounds: self.max_sieve_rounds,
            sub_tol_ratio: self.sub_tol_ratio,
            admm: self.admm.clone(),
            apg: self.apg.clone(),
            execution: self.execution,
            ..SolveConfig::default()
        }
    }

    pub fn path_config(&self) -> Result<PathConfig> {
        let cfg = PathConfig {
            lambdas: self.lambdas.values()?,
            mode: self.mode,
            initial: self.initial,
            solve: self.solve_config(1.0),
            keep_solutions: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
