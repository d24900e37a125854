//! Dataset ingestion, synthetic data, cluster labels and report emission.

pub mod labels;
pub mod manifest;
pub mod matrix;
pub mod moons;
pub mod report;

pub use self::matrix::{load_matrix, write_matrix};
pub use self::labels::{extract_labels, ClusterLabels};
pub use self::manifest::RunManifest;
pub use self::moons::{gen_two_half_moons, gen_two_half_moons_labeled};
pub use self::report::{emit_report, load_state, ReportSummary};
