//! The evaluation protocol: stratified non-overlapping rounds, optional class
//! balancing, the baseline / masking / separate-training techniques, metrics
//! and report rendering.

mod config;
mod metrics;
mod protocol;
mod report;
pub(crate) mod run;

pub use config::{ExperimentConfig, Technique};
pub use metrics::{compute_metrics, Metrics};
pub use protocol::{balance_classes, stratified_rounds, Split};
pub use report::{
    render_report, DatasetSummary, ExperimentReport, MeanMetrics, ReportFormat, ReportRow, RoundResult, RowKind,
};
pub use run::{fit_model, run_experiment, run_experiment_parallel, RowSpec};
