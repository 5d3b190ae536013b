//! CSV and aligned-text renderings of cross-validation and ablation results,
//! plus the run manifest written next to them.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiment::ablation::AblationTable;
use crate::experiment::cv::{CvReport, ExperimentConfig, FoldResult};
use crate::experiment::metrics::{Confusion, Metrics, METRIC_NAMES};

pub const CV_FILE: &str = "cv.csv";
pub const ABLATION_FILE: &str = "ablation.csv";
pub const TTEST_FILE: &str = "ttests.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// `0.740740 → "74.07%"`
pub fn format_percent(x: f64) -> String {
    format!("{:.2}%", x * 100.0)
}

#[derive(Debug, Serialize, Deserialize)]
struct FoldRow {
    fold: usize,
    accuracy: f64,
    precision: f64,
    recall: f64,
    f1: f64,
    tp: usize,
    fp: usize,
    #[serde(rename = "fn")]
    fn_: usize,
    tn: usize,
    final_loss: f64,
}

pub fn write_cv_csv<W: Write>(report: &CvReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for f in &report.folds {
        let c = f.metrics.confusion;
        w.serialize(FoldRow {
            fold: f.fold,
            accuracy: f.metrics.accuracy,
            precision: f.metrics.precision,
            recall: f.metrics.recall,
            f1: f.metrics.f1,
            tp: c.tp,
            fp: c.fp,
            fn_: c.fn_,
            tn: c.tn,
            final_loss: f.final_loss,
        })?;
    }
    w.flush().map_err(|e| Error::io(CV_FILE, e))
}

/// Rebuilds a report from [`write_cv_csv`] output; flags and means are recomputed.
pub fn read_cv_csv<R: Read>(input: R) -> Result<CvReport> {
    let mut r = csv::Reader::from_reader(input);
    let mut folds = Vec::new();
    for row in r.deserialize() {
        let row: FoldRow = row?;
        let confusion = Confusion {
            tp: row.tp,
            fp: row.fp,
            fn_: row.fn_,
            tn: row.tn,
        };
        let metrics = Metrics {
            accuracy: row.accuracy,
            precision: row.precision,
            recall: row.recall,
            f1: row.f1,
            ..Metrics::from_confusion(confusion)
        };
        folds.push(FoldResult {
            fold: row.fold,
            metrics,
            final_loss: row.final_loss,
        });
    }
    Ok(CvReport::from_folds(folds))
}

/// One rendered line of the ablation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationSummary {
    pub ablated: String,
    pub d_accuracy: f64,
    pub t_accuracy: f64,
    pub d_precision: f64,
    pub t_precision: f64,
    pub d_recall: f64,
    pub t_recall: f64,
    pub d_f1: f64,
    pub t_f1: f64,
    pub df: usize,
}

impl AblationSummary {
    pub fn diffs(&self) -> [f64; 4] {
        [self.d_accuracy, self.d_precision, self.d_recall, self.d_f1]
    }

    pub fn t_values(&self) -> [f64; 4] {
        [self.t_accuracy, self.t_precision, self.t_recall, self.t_f1]
    }
}

pub fn summarize_ablation(table: &AblationTable) -> Vec<AblationSummary> {
    table
        .rows
        .iter()
        .map(|r| AblationSummary {
            ablated: r.label(),
            d_accuracy: r.mean_diff[0],
            t_accuracy: r.tests[0].t,
            d_precision: r.mean_diff[1],
            t_precision: r.tests[1].t,
            d_recall: r.mean_diff[2],
            t_recall: r.tests[2].t,
            d_f1: r.mean_diff[3],
            t_f1: r.tests[3].t,
            df: r.tests[0].df,
        })
        .collect()
}

pub fn write_ablation_csv<W: Write>(rows: &[AblationSummary], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record([
        "ablated",
        "d_accuracy",
        "t_accuracy",
        "d_precision",
        "t_precision",
        "d_recall",
        "t_recall",
        "d_f1",
        "t_f1",
        "df",
    ])?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(ABLATION_FILE, e))
}

pub fn read_ablation_csv<R: Read>(input: R) -> Result<Vec<AblationSummary>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Debug, Serialize)]
struct TTestRow<'a> {
    comparison: String,
    metric: &'a str,
    mean_diff: f64,
    sd_diff: f64,
    t: f64,
    df: usize,
    degenerate: bool,
}

/// One line per (ablated variant, measure): full model vs variant, paired by fold.
pub fn write_ttests_csv<W: Write>(table: &AblationTable, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["comparison", "metric", "mean_diff", "sd_diff", "t", "df", "degenerate"])?;
    for row in &table.rows {
        for (m, t) in row.tests.iter().enumerate() {
            w.serialize(TTestRow {
                comparison: format!("full vs -{}", row.label()),
                metric: METRIC_NAMES[m],
                mean_diff: t.mean_diff,
                sd_diff: t.sd_diff,
                t: t.t,
                df: t.df,
                degenerate: t.degenerate,
            })?;
        }
    }
    w.flush().map_err(|e| Error::io(TTEST_FILE, e))
}

fn render(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |cells: &[String], out: &mut String| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(header, &mut out);
    let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    for r in rows {
        line(r, &mut out);
    }
    out
}

/// Per-fold metrics and their mean, as percentages.
pub fn cv_table_text(report: &CvReport) -> String {
    let header: Vec<String> = ["Fold", "Accuracy", "Precision", "Recall", "F1"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows: Vec<Vec<String>> = report
        .folds
        .iter()
        .map(|f| {
            std::iter::once(f.fold.to_string())
                .chain(f.metrics.values().iter().map(|&v| format_percent(v)))
                .collect()
        })
        .collect();
    if !report.folds.is_empty() {
        rows.push(
            std::iter::once("Mean".to_string())
                .chain(report.mean.values().iter().map(|&v| format_percent(v)))
                .collect(),
        );
    }
    render(&header, &rows)
}

/// Mean differences (full − ablated) with paired t statistics in parentheses.
pub fn ablation_table_text(rows: &[AblationSummary]) -> String {
    let header: Vec<String> = ["Ablated", "Accuracy", "Precision", "Recall", "F1"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            std::iter::once(r.ablated.clone())
                .chain(
                    r.diffs()
                        .iter()
                        .zip(r.t_values())
                        .map(|(d, t)| format!("{d:.3} (t={t:.2})")),
                )
                .collect()
        })
        .collect();
    render(&header, &body)
}

/// Everything needed to replay a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub dataset: String,
    pub dataset_sha256: String,
    /// Records used after optional under-sampling.
    pub records: usize,
    pub balanced: bool,
    pub config: ExperimentConfig,
    pub ablations: Vec<String>,
}

pub fn file_sha256(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn create(dir: &Path, name: &str) -> Result<fs::File> {
    let p = dir.join(name);
    fs::File::create(&p).map_err(|e| Error::io(p, e))
}

/// Writes `cv.csv`, and for ablation runs `ablation.csv` and `ttests.csv`,
/// plus `manifest.json` into `dir`.
pub fn write_run(
    dir: &Path,
    manifest: &RunManifest,
    cv: &CvReport,
    ablation: Option<&AblationTable>,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_cv_csv(cv, create(dir, CV_FILE)?)?;
    if let Some(table) = ablation {
        write_ablation_csv(&summarize_ablation(table), create(dir, ABLATION_FILE)?)?;
        write_ttests_csv(table, create(dir, TTEST_FILE)?)?;
    }
    write_manifest(dir, manifest)
}

/// Writes `manifest.json` into `dir`.
pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut f = create(dir, MANIFEST_FILE)?;
    serde_json::to_writer_pretty(&mut f, manifest)?;
    f.write_all(b"\n").map_err(|e| Error::io(dir.join(MANIFEST_FILE), e))
}
