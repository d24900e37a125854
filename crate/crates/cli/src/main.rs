use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sieveclust::io::manifest::{LambdaSpec, MoonsSpec};
use sieveclust::io::matrix::write_matrix;
use sieveclust::io::moons::gen_two_half_moons_labeled;
use sieveclust::io::report::{load_state, ReportSummary};
use sieveclust::path::InitialIndex;
use sieveclust::{
    build_knn_graph_with, emit_report, gen_two_half_moons, load_matrix, solve_path, Execution,
    PathResult, RunManifest, SolveMode,
};

const LOG_ENV: &str = "SIEVECLUST_LOG";

/// Convex clustering paths by adaptive sieving.
///
/// Set SIEVECLUST_LOG (error, warn, info, debug, trace) for progress output.
#[derive(Parser, Debug)]
#[command(name = "sieveclust", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve along a decreasing λ grid and write the report.
    Path(RunArgs),
    /// Solve at a single λ and write the report.
    Solve {
        #[arg(long)]
        lambda: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write a two-half-moons data set as CSV (rows = features).
    Gen {
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the arc of each point, one per line.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Re-emit the report from a saved state.json.
    Report {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON manifest; when given, it replaces every other run flag.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Numeric CSV, one row per feature and one column per point.
    #[arg(long, conflicts_with = "moons")]
    input: Option<PathBuf>,
    /// Generate this many two-half-moons points instead of reading a file.
    #[arg(long)]
    moons: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Neighbors per point in the weight graph.
    #[arg(long, default_value_t = sieveclust::DEFAULT_K)]
    k: usize,
    /// as, eas or direct.
    #[arg(long, default_value = "as")]
    mode: SolveMode,
    #[arg(long, default_value_t = 10.0)]
    lambda_start: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_stop: f64,
    #[arg(long, default_value_t = 0.2)]
    lambda_step: f64,
    /// Explicit decreasing λ values; overrides the range flags.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    #[arg(long, default_value_t = sieveclust::DEFAULT_EPS)]
    eps: f64,
    #[arg(long, default_value_t = sieveclust::DEFAULT_EPS_HAT)]
    eps_hat: f64,
    /// Start the first λ from an empty guess instead of full fusion.
    #[arg(long)]
    empty_start: bool,
    #[arg(long)]
    max_rounds: Option<usize>,
    /// Run every kernel on one thread.
    #[arg(long)]
    sequential: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl RunArgs {
    fn manifest(&self) -> Result<RunManifest> {
        if let Some(path) = &self.manifest {
            return RunManifest::load(path).with_context(|| format!("reading {}", path.display()));
        }
        let mut m = RunManifest {
            input: self.input.clone(),
            moons: self.moons.map(|n| MoonsSpec {
                n,
                noise: self.noise,
            }),
            k: self.k,
            lambdas: match &self.lambdas {
                Some(v) => LambdaSpec::List(v.clone()),
                None => LambdaSpec::Range {
                    start: self.lambda_start,
                    stop: self.lambda_stop,
                    step: self.lambda_step,
                },
            },
            eps: self.eps,
            eps_hat: self.eps_hat,
            mode: self.mode,
            initial: if self.empty_start {
                InitialIndex::Empty
            } else {
                InitialIndex::All
            },
            output_dir: self.out.clone(),
            seed: self.seed,
            ..RunManifest::default()
        };
        if let Some(r) = self.max_rounds {
            m.max_sieve_rounds = r;
        }
        if self.sequential {
            m.execution = Execution::Sequential;
        }
        Ok(m)
    }
}

fn load_data(m: &RunManifest) -> Result<ndarray::Array2<f64>> {
    match (&m.input, &m.moons) {
        (Some(p), _) => load_matrix(p).with_context(|| format!("loading {}", p.display())),
        (None, Some(s)) => Ok(gen_two_half_moons(s.n, s.noise, m.seed)?),
        (None, None) => bail!("no data: pass --input FILE or --moons N"),
    }
}

fn run(m: RunManifest) -> Result<PathResult> {
    let data = load_data(&m)?;
    let pcfg = m.path_config()?;
    let n = data.ncols();
    let k = if n >= 2 && m.k >= n {
        log::warn!("k = {} is not below N = {n}; using k = {}", m.k, n - 1);
        n - 1
    } else {
        m.k
    };
    let inst = build_knn_graph_with(data.view(), k, m.execution)?;
    log::info!(
        "{} points in {} dimensions, {} edges, {} λ values, mode {}",
        inst.n_points(),
        inst.dim(),
        inst.n_blocks(),
        pcfg.lambdas.len(),
        pcfg.mode
    );
    let result = solve_path(&inst, &pcfg)?;
    std::fs::create_dir_all(&m.output_dir)
        .with_context(|| format!("creating {}", m.output_dir.display()))?;
    m.save(m.output_dir.join("manifest.json"))?;
    write_report(&result, &m.output_dir)?;
    Ok(result)
}

fn write_report(result: &PathResult, dir: &Path) -> Result<()> {
    let files = emit_report(result, dir)?;
    let s = ReportSummary::from_result(result);
    println!(
        "{} λ values, {} certified, {} rounds, average dimension {:.1}, {:.3}s",
        s.num_lambdas, s.certified, s.total_rounds, s.average_problem_dimension, s.total_seconds
    );
    if !s.failed_lambdas.is_empty() {
        println!("not certified at λ = {:?}", s.failed_lambdas);
    }
    println!("wrote {} files to {}", files.len(), dir.display());
    Ok(())
}

fn status(result: &PathResult) -> ExitCode {
    if result.all_certified() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Path(args) => Ok(status(&run(args.manifest()?)?)),
        Command::Solve { lambda, run: args } => {
            let mut m = args.manifest()?;
            m.lambdas = LambdaSpec::List(vec![lambda]);
            Ok(status(&run(m)?))
        }
        Command::Gen {
            n,
            noise,
            seed,
            out,
            labels,
        } => {
            let (a, arcs) = gen_two_half_moons_labeled(n, noise, seed)?;
            write_matrix(&out, a.view())?;
            if let Some(p) = labels {
                let text: String = arcs.iter().map(|l| format!("{l}\n")).collect();
                std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
            }
            println!("wrote {} points to {}", a.ncols(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { state, out } => {
            let result = load_state(&state)?;
            write_report(&result, &out)?;
            Ok(status(&result))
        }
    }
}
