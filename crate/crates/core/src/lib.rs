//! Adaptive sieving for convex clustering.
//!
//! Solves `min ½‖X − A‖²_F + λ Σ_{i<j} w_ij ‖X_i − X_j‖₂` along a decreasing
//! `λ` path by repeatedly guessing which pairwise differences vanish,
//! solving the much smaller problem in which the guessed points are merged,
//! and certifying the result through a recovered dual point. Guesses whose
//! dual block falls outside its ball are dropped until the KKT residual is
//! below tolerance.
//!
//! ```no_run
//! use sieveclust::{build_knn_graph, gen_two_half_moons, solve_path, PathConfig};
//!
//! let a = gen_two_half_moons(200, 0.1, 1).unwrap();
//! let inst = build_knn_graph(a.view(), 10).unwrap();
//! let path = solve_path(&inst, &PathConfig::default()).unwrap();
//! for rec in &path.records {
//!     println!("{} {} {}", rec.lambda, rec.rounds, rec.num_clusters);
//! }
//! ```

pub mod admm;
pub mod dual;
pub mod error;
pub mod graph;
pub mod io;
pub mod kkt;
pub mod linalg;
pub mod model;
pub mod par;
pub mod partition;
pub mod path;
pub mod prox;
pub mod sieve;
pub mod union_find;

pub use admm::{solve_full, solve_full_with, solve_reduced_admm, AdmmConfig, AdmmWarmStart, SubSolution};
pub use dual::{apg_minimize, recover_dual, violation_set, ApgConfig, DualRecovery, NullSpaceProjector};
pub use error::{Error, Result};
pub use graph::{build_knn_graph, build_knn_graph_with, IncidenceMap, DEFAULT_K};
pub use io::{emit_report, extract_labels, gen_two_half_moons, load_matrix, ClusterLabels, RunManifest};
pub use kkt::{duality_gap, dual_objective, kkt_residual, primal_objective};
pub use model::{BlockRegularizer, Edge, KktTriple, ProblemInstance, SolveConfig, DEFAULT_EPS, DEFAULT_EPS_HAT};
pub use par::Execution;
pub use partition::{build_partition, recover_primal, reduce_problem, IndexPartition, ReducedProblem};
pub use path::{default_lambda_grid, solve_path, LambdaRecord, PathConfig, PathResult, SolveMode};
pub use prox::{project_subdiff_block, prox_block};
pub use sieve::{as_solve, eas_certify, eas_solve, Certificate, SieveState};
