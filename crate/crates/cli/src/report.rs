//! `report`: merges CSV artifacts into one table of per-column summaries.
//!
//! Long tables with `statistic` and `value` columns are summarized per
//! statistic; other tables per numeric column. Non-numeric columns are skipped.

use std::path::PathBuf;

use lampwalk_core::walks::Estimate;
use serde::Serialize;

use crate::commands::{out_dir, write_file, write_json};
use crate::config::RunConfig;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColumnSummary {
    pub source: String,
    pub column: String,
    pub count: usize,
    pub mean: f64,
    pub se: f64,
    pub min: f64,
    pub max: f64,
}

fn summarize(source: &str, column: String, xs: &[f64]) -> ColumnSummary {
    let e = Estimate::of(xs);
    ColumnSummary {
        source: source.to_string(),
        column,
        count: xs.len(),
        mean: e.mean,
        se: e.se,
        min: xs.iter().copied().fold(f64::INFINITY, f64::min),
        max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Named numeric series of one CSV file, in first-appearance order.
fn series(text: &str) -> Result<Vec<(String, Vec<f64>)>, CliError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let records = reader.records().collect::<Result<Vec<_>, _>>()?;
    let stat = headers.iter().position(|h| h == "statistic");
    let value = headers.iter().position(|h| h == "value");
    if let (Some(s), Some(v)) = (stat, value) {
        let mut out: Vec<(String, Vec<f64>)> = Vec::new();
        for r in &records {
            let (Some(name), Some(x)) = (r.get(s), r.get(v).and_then(|t| t.parse::<f64>().ok())) else {
                continue;
            };
            match out.iter_mut().find(|(n, _)| n == name) {
                Some((_, xs)) => xs.push(x),
                None => out.push((name.to_string(), vec![x])),
            }
        }
        return Ok(out);
    }
    let mut out = Vec::new();
    for (k, h) in headers.iter().enumerate() {
        let cells: Vec<&str> = records
            .iter()
            .filter_map(|r| r.get(k))
            .filter(|c| !c.is_empty())
            .collect();
        let xs: Option<Vec<f64>> = cells.iter().map(|c| c.parse::<f64>().ok()).collect();
        if let Some(xs) = xs.filter(|xs| !xs.is_empty()) {
            out.push((h.clone(), xs));
        }
    }
    Ok(out)
}

pub fn summaries(inputs: &[(String, String)]) -> Result<Vec<ColumnSummary>, CliError> {
    let mut out = Vec::new();
    for (source, text) in inputs {
        for (column, xs) in series(text)? {
            out.push(summarize(source, column, &xs));
        }
    }
    Ok(out)
}

pub fn run(cfg: &RunConfig, files: &[PathBuf]) -> Result<(), CliError> {
    let inputs = files
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(p.clone(), e))?;
            Ok((p.display().to_string(), text))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let rows = summaries(&inputs)?;
    let dir = out_dir(cfg)?;
    if cfg.output.format.csv() {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(dir.join("report.csv"), e.into_error()))?;
        write_file(&dir.join("report.csv"), &bytes)?;
    }
    if cfg.output.format.json() {
        write_json(&dir.join("report.json"), &rows)?;
    }
    Ok(())
}
