//! Plot-ready CSV tables and their parsers.
//!
//! Floats are written in shortest round-trip form, so every table reads
//! back to exactly the values that were written.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Per-length means printed and saved by `simulate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub m: u32,
    pub mean_up: f64,
    pub mean_down: f64,
    pub tilde: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamseyRow {
    pub delay_us: f64,
    pub coherence: f64,
}

/// One pair of fits on the same series; `relative_likelihood` is how many
/// times more probable `model_b` is than `model_a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model_a: String,
    pub model_b: String,
    pub aic_a: f64,
    pub aic_b: f64,
    pub relative_likelihood: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub bin_low: f64,
    pub bin_high: f64,
    pub up: u64,
    pub down: u64,
}

pub fn rows_to_string<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

pub fn rows_from_str<T: DeserializeOwned>(text: &str) -> CliResult<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(CliError::from)
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    fs::write(path, rows_to_string(rows)?).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn read_rows<T: DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    rows_from_str(&text)
}

/// Decay series with one column per model curve.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayTable {
    /// Names of the curve columns, in order.
    pub curves: Vec<String>,
    pub rows: Vec<DecayRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub m: u32,
    pub value: f64,
    pub variance: f64,
    /// 95% confidence half-width, `1.96 √variance`.
    pub ci95: f64,
    pub curves: Vec<f64>,
}

const DECAY_FIXED: [&str; 4] = ["m", "value", "variance", "ci95"];

impl DecayTable {
    pub fn to_csv_string(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = DECAY_FIXED
            .iter()
            .copied()
            .chain(self.curves.iter().map(String::as_str))
            .collect();
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![
                r.m.to_string(),
                format!("{:?}", r.value),
                format!("{:?}", r.variance),
                format!("{:?}", r.ci95),
            ];
            rec.extend(r.curves.iter().map(|v| format!("{v:?}")));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn from_csv_str(text: &str) -> CliResult<Self> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let header = rdr.headers()?.clone();
        if header.len() < DECAY_FIXED.len() || header.iter().take(4).ne(DECAY_FIXED) {
            return Err(CliError::Io(format!("unexpected decay table header `{}`", header.as_slice())));
        }
        let curves: Vec<String> = header.iter().skip(4).map(str::to_string).collect();
        let bad = |line: usize| CliError::Io(format!("decay table row {line}: bad number"));
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let num = |k: usize| rec.get(k).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| bad(i + 2));
            rows.push(DecayRow {
                m: rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| bad(i + 2))?,
                value: num(1)?,
                variance: num(2)?,
                ci95: num(3)?,
                curves: (4..header.len()).map(num).collect::<CliResult<_>>()?,
            });
        }
        Ok(DecayTable { curves, rows })
    }
}
