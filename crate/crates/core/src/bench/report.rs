//! Evaluation reports: one row per (method, d, classifier) grid cell,
//! rendered as CSV or as one markdown accuracy table per classifier.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::ClassifierKind;
use crate::classify::KernelKind;
use crate::error::{Error, Result};
use crate::solvers::Method;

/// CSV header, in column order.
pub const REPORT_COLUMNS: [&str; 15] = [
    "method",
    "d",
    "classifier",
    "lambda",
    "delta",
    "dt",
    "damping",
    "k_neighbors",
    "kernel",
    "bandwidth",
    "ridge",
    "seed",
    "accuracy",
    "seconds",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Failed,
}

/// One grid cell. Hyperparameters that do not apply to the cell's method
/// or classifier are left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: Method,
    pub d: usize,
    pub classifier: ClassifierKind,
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    pub dt: Option<f64>,
    pub damping: Option<f64>,
    pub k_neighbors: Option<usize>,
    pub kernel: Option<KernelKind>,
    pub bandwidth: Option<f64>,
    pub ridge: Option<f64>,
    pub seed: u64,
    pub accuracy: Option<f64>,
    pub seconds: Option<f64>,
    pub status: CellStatus,
    /// Failure message; not part of the CSV.
    #[serde(skip)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvaluationReport {
    pub rows: Vec<ReportRow>,
    /// Resolved configuration (TOML) that produced the rows, if known.
    pub config: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            other => Err(Error::InvalidConfig(format!(
                "unknown report format {other:?} (expected csv or markdown)"
            ))),
        }
    }
}

fn method_title(m: Method) -> &'static str {
    match m {
        Method::Pca => "PCA",
        Method::Ista => "ISTA sparse PCA",
        Method::Leapfrog => "Leapfrog sparse PCA",
    }
}

fn classifier_title(c: ClassifierKind) -> &'static str {
    match c {
        ClassifierKind::Knn => "k nearest neighbor method",
        ClassifierKind::Krr => "kernel ridge regression method",
    }
}

impl EvaluationReport {
    pub fn render(&self, format: ReportFormat) -> Result<String> {
        if self.rows.is_empty() {
            return Err(Error::EmptyInput("report has no rows"));
        }
        match format {
            ReportFormat::Csv => self.render_csv(),
            ReportFormat::Markdown => Ok(self.render_markdown()),
        }
    }

    fn render_csv(&self) -> Result<String> {
        let mut writer = ::csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            writer
                .serialize(row)
                .map_err(|e| Error::MalformedReport(e.to_string()))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::MalformedReport(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("CSV writer emits UTF-8"))
    }

    fn render_markdown(&self) -> String {
        let mut out = String::from("# Sparse PCA evaluation\n");
        let mut classifiers: Vec<ClassifierKind> = Vec::new();
        for row in &self.rows {
            if !classifiers.contains(&row.classifier) {
                classifiers.push(row.classifier);
            }
        }
        for c in classifiers {
            let title = classifier_title(c);
            let _ = write!(
                out,
                "\n## Accuracies with the {title}\n\n| Configuration | Accuracy |\n|---|---|\n"
            );
            for row in self.rows.iter().filter(|r| r.classifier == c) {
                let acc = match (row.status, row.accuracy) {
                    (CellStatus::Ok, Some(q)) => format!("{q:.2}"),
                    _ => "failed".to_owned(),
                };
                let _ = writeln!(
                    out,
                    "| {} (d={}) + {title} | {acc} |",
                    method_title(row.method),
                    row.d
                );
            }
        }
        let failures: Vec<&ReportRow> = self.rows.iter().filter(|r| r.error.is_some()).collect();
        if !failures.is_empty() {
            out.push_str("\n## Failed cells\n\n");
            for r in failures {
                let _ = writeln!(
                    out,
                    "- {} d={} {}: {}",
                    r.method,
                    r.d,
                    r.classifier,
                    r.error.as_deref().unwrap_or_default()
                );
            }
        }
        if let Some(config) = &self.config {
            let _ = write!(out, "\n## Configuration\n\n```toml\n{}", config);
            if !config.ends_with('\n') {
                out.push('\n');
            }
            out.push_str("```\n");
        }
        out
    }

    pub fn emit(&self, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = self.render(format)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Parses a report previously written as CSV.
pub fn parse_report_csv(text: &str) -> Result<EvaluationReport> {
    let mut reader = ::csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::MalformedReport(e.to_string()))?
        .clone();
    if headers.iter().ne(REPORT_COLUMNS.iter().copied()) {
        return Err(Error::MalformedReport(format!(
            "unexpected header {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.deserialize::<ReportRow>().enumerate() {
        let row = record.map_err(|e| Error::MalformedReport(format!("row {}: {e}", i + 1)))?;
        match (row.status, row.accuracy) {
            (CellStatus::Ok, Some(q)) if (0.0..=1.0).contains(&q) => {}
            (CellStatus::Failed, None) => {}
            _ => {
                return Err(Error::MalformedReport(format!(
                    "row {}: status and accuracy disagree",
                    i + 1
                )))
            }
        }
        rows.push(row);
    }
    Ok(EvaluationReport { rows, config: None })
}
