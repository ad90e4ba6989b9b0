//! Benchmark harness: toy and CSV datasets, planted perturbations, quality
//! metrics, the repeated-experiment runner and its reports.

mod data;
mod metrics;
mod perturb;
mod report;
mod runner;

pub use data::{gen_toy, kmeans, load_csv, load_csv_reader, TOY_KMEANS_ITERATIONS};
pub use metrics::{metric_cf_dist, metric_cf_div, metric_cf_sparse, metric_recall, Metric};
pub use perturb::{perturb, PerturbationKind, PerturbationSpec};
pub use report::{render_report, Report};
pub use runner::{
    mean_std, run_experiment, run_experiment_with, DatasetSource, ExperimentConfig, FailureRecord, LabelRule,
    Method, MethodSummary, MetricSummary, Ranking, ResultsTable, RunRecord,
};
