//! Training, evaluation, cross-validation, paired t-tests, ablations, and
//! report generation.

mod ablation;
mod cv;
mod metrics;
mod report;
mod train;
mod ttest;

pub use ablation::{ablation_suite, compare_variant, AblationRow, AblationTable};
pub use cv::{cross_validate, cross_validate_with_plan, prepare_samples, CvReport, ExperimentConfig, FoldResult};
pub use metrics::{evaluate_metrics, Confusion, MeanMetrics, Metrics, METRIC_NAMES};
pub use report::{
    ablation_table_text, cv_table_text, file_sha256, format_percent, read_ablation_csv, read_cv_csv,
    summarize_ablation, write_ablation_csv, write_cv_csv, write_manifest, write_run, write_ttests_csv, AblationSummary,
    RunManifest, ABLATION_FILE, CV_FILE, MANIFEST_FILE, TTEST_FILE,
};
pub use train::{train, TrainConfig, TrainReport};
pub use ttest::{paired_ttest, TTestResult};
