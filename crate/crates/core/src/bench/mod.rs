//! Experiment configuration, the evaluation grid and its reports.

mod config;
mod pipeline;
mod report;

pub use config::{
    ClassifierKind, ClassifierSettings, DatasetSource, ExperimentConfig, SolverSettings,
    DEFAULT_DIMS,
};
pub use pipeline::{
    extract_for_dataset, load_dataset, loadings_rows, method_config, method_seed, run_pipeline,
    run_pipeline_on, Extraction, Prepared,
};
pub use report::{
    parse_report_csv, CellStatus, EvaluationReport, ReportFormat, ReportRow, REPORT_COLUMNS,
};
