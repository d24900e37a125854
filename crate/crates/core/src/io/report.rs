use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{PathResult, SolveMode};

pub const PATH_CSV: &str = "path.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const STATE_JSON: &str = "state.json";
pub const LABELS_DIR: &str = "labels";
pub const PLOT_TIME_CSV: &str = "plot_time.csv";
pub const PLOT_DIMENSION_CSV: &str = "plot_dimension.csv";

/// Path-level totals: rounds, average reduced dimension and time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub mode: SolveMode,
    pub n_points: usize,
    pub n_blocks: usize,
    pub eps: f64,
    pub num_lambdas: usize,
    pub total_rounds: usize,
    /// Mean over `λ` of `|α| + |β|` in the final reduced problem.
    pub average_problem_dimension: f64,
    pub average_reduced_blocks: f64,
    pub total_seconds: f64,
    pub certified: usize,
    pub all_certified: bool,
    pub failed_lambdas: Vec<f64>,
}

impl ReportSummary {
    pub fn from_result(r: &PathResult) -> Self {
        let n = r.records.len();
        let mean = |f: &dyn Fn(&crate::path::LambdaRecord) -> f64| {
            if n == 0 {
                0.0
            } else {
                r.records.iter().map(f).sum::<f64>() / n as f64
            }
        };
        ReportSummary {
            mode: r.mode,
            n_points: r.n_points,
            n_blocks: r.n_blocks,
            eps: r.eps,
            num_lambdas: n,
            total_rounds: r.total_rounds(),
            average_problem_dimension: r.average_reduced_n(),
            average_reduced_blocks: mean(&|rec| rec.reduced_m as f64),
            total_seconds: r.total_seconds(),
            certified: r.records.iter().filter(|rec| rec.certified).count(),
            all_certified: r.all_certified(),
            failed_lambdas: r
                .records
                .iter()
                .filter(|rec| !rec.certified)
                .map(|rec| rec.lambda)
                .collect(),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the per-λ table, the summary, per-λ label files, plot data and a
/// `state.json` from which the report can be re-emitted. Returns the paths
/// written.
pub fn emit_report(result: &PathResult, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let table = dir.join(PATH_CSV);
    {
        let mut w = csv::Writer::from_path(&table).map_err(|e| csv_err(&table, e))?;
        w.write_record([
            "lambda",
            "rounds",
            "reduced_n",
            "reduced_m",
            "residual",
            "gap",
            "seconds",
            "num_clusters",
            "certified",
            "objective",
            "fused_blocks",
            "admm_iterations",
        ])
        .map_err(|e| csv_err(&table, e))?;
        for r in &result.records {
            w.write_record([
                r.lambda.to_string(),
                r.rounds.to_string(),
                r.reduced_n.to_string(),
                r.reduced_m.to_string(),
                r.residual.to_string(),
                r.gap.to_string(),
                r.seconds.to_string(),
                r.num_clusters.to_string(),
                r.certified.to_string(),
                r.objective.to_string(),
                r.fused_blocks.to_string(),
                r.admm_iterations.to_string(),
            ])
            .map_err(|e| csv_err(&table, e))?;
        }
        w.flush().map_err(|e| Error::io(&table, e))?;
    }
    written.push(table);

    let summary = dir.join(SUMMARY_JSON);
    write_json(&summary, &ReportSummary::from_result(result))?;
    written.push(summary);

    let plot_time = dir.join(PLOT_TIME_CSV);
    let plot_dim = dir.join(PLOT_DIMENSION_CSV);
    {
        let mut t = create(&plot_time)?;
        let mut d = create(&plot_dim)?;
        writeln!(t, "lambda,seconds").map_err(io_err(&plot_time))?;
        writeln!(d, "lambda,reduced_n,reduced_m").map_err(io_err(&plot_dim))?;
        for r in &result.records {
            writeln!(t, "{},{}", r.lambda, r.seconds).map_err(io_err(&plot_time))?;
            writeln!(d, "{},{},{}", r.lambda, r.reduced_n, r.reduced_m).map_err(io_err(&plot_dim))?;
        }
        t.flush().map_err(io_err(&plot_time))?;
        d.flush().map_err(io_err(&plot_dim))?;
    }
    written.push(plot_time);
    written.push(plot_dim);

    if !result.labels.is_empty() {
        let ldir = dir.join(LABELS_DIR);
        fs::create_dir_all(&ldir).map_err(|e| Error::io(&ldir, e))?;
        for (k, lab) in result.labels.iter().enumerate() {
            let p = ldir.join(format!("labels_{k:03}_lambda_{:.4}.csv", lab.lambda));
            let mut w = create(&p)?;
            writeln!(w, "point,label").map_err(|e| Error::io(&p, e))?;
            for (i, l) in lab.labels.iter().enumerate() {
                writeln!(w, "{i},{l}").map_err(|e| Error::io(&p, e))?;
            }
            w.flush().map_err(|e| Error::io(&p, e))?;
            written.push(p);
        }
    }

    let state = dir.join(STATE_JSON);
    let slim = PathResult {
        solutions: Vec::new(),
        ..result.clone()
    };
    write_json(&state, &slim)?;
    written.push(state);
    Ok(written)
}

/// Reads a `state.json` written by [`emit_report`].
pub fn load_state(path: impl AsRef<Path>) -> Result<PathResult> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}
