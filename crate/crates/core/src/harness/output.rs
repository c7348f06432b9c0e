//! Result files: `result.json` holds the full [`ExperimentResult`];
//! `rates.csv` has one row per measured rate.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::OutputFormat;
use super::runner::{ExperimentResult, Rate};
use crate::error::{Error, Result};

pub const JSON_FILE: &str = "result.json";
pub const CSV_FILE: &str = "rates.csv";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsvRow {
    pub metric: String,
    pub hits: u64,
    pub samples: u64,
    pub rate: f64,
    pub std_error: f64,
    /// Analytic counterpart, where one exists.
    pub analytic: Option<f64>,
}

impl CsvRow {
    fn new(metric: impl Into<String>, r: &Rate, analytic: Option<f64>) -> Self {
        CsvRow {
            metric: metric.into(),
            hits: r.hits,
            samples: r.samples,
            rate: r.rate,
            std_error: r.std_error,
            analytic,
        }
    }
}

pub fn csv_rows(result: &ExperimentResult) -> Vec<CsvRow> {
    let a = &result.aggregate;
    let an = &result.analytic;
    let mut rows = vec![
        CsvRow::new("buggy", &a.buggy, None),
        CsvRow::new("all_accept", &a.all_accept, an.predicted_all_accept),
        CsvRow::new("false_buggy", &a.false_buggy, Some(0.0)),
        CsvRow::new("detection", &a.detection, Some(1.0 - an.lemma1_bound)),
        CsvRow::new("correctness", &a.correctness, None),
        CsvRow::new("honest_correctness", &a.honest_correctness, Some(1.0)),
    ];
    for (i, r) in a.per_verification.iter().enumerate() {
        let predicted = an
            .predicted_per_verification
            .as_ref()
            .and_then(|p| p.get(i).copied());
        rows.push(CsvRow::new(format!("verification_{i}"), r, predicted));
    }
    rows
}

pub fn to_json(result: &ExperimentResult) -> Result<String> {
    serde_json::to_string_pretty(result).map_err(|e| Error::Io(e.to_string()))
}

pub fn to_csv(result: &ExperimentResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in csv_rows(result) {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Writes the requested formats (both when `format` is `None`) into `dir`.
pub fn write_outputs(
    result: &ExperimentResult,
    dir: &Path,
    format: Option<OutputFormat>,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let mut emit = |name: &str, body: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        written.push(path);
        Ok(())
    };
    if format != Some(OutputFormat::Csv) {
        emit(JSON_FILE, to_json(result)?)?;
    }
    if format != Some(OutputFormat::Json) {
        emit(CSV_FILE, to_csv(result)?)?;
    }
    Ok(written)
}
