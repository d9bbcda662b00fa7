//! Panel regressions of trade quantities on import-cost shocks: sample
//! construction, fixed-effect demeaning, OLS and two-way clustering.

mod hdfe;
mod ols;
mod panel;
mod run;
mod spec;
mod vcov;

pub use hdfe::{demean_hdfe, dense_labels, drop_singletons, Demeaned};
pub use ols::{design, ols, OlsFit};
pub use panel::{build_panel, Covariates, PanelDrops, RegPanel, RowKey};
pub use run::{run_spec, RegressionResult};
pub use spec::{
    partition, ClassSet, ClusterDims, CompiledRule, Outcome, PartitionOutcome, PartitionRule, RegressionSpec, SizeSide,
    Verdict,
};
pub use vcov::{cluster2_vcov, cluster_vcov, hc1_vcov, Vcov};

use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum EconError {
    #[error("invalid specification: {0}")]
    Spec(String),
    #[error("demeaning did not converge after {iterations} sweeps (last change {max_change:e})")]
    NoConvergence { iterations: usize, max_change: f64 },
    #[error("regressors are collinear: {columns:?}")]
    RankDeficient { columns: Vec<String> },
    #[error("need at least two clusters, found {groups}")]
    DegenerateClusters { groups: usize },
    #[error("missing lookup table: {0}")]
    MissingLookup(String),
    #[error("empty sample: {0}")]
    EmptySample(String),
    #[error("{path}:{line}: {message}")]
    Input { path: String, line: u64, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
}
