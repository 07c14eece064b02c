//! Benchmarking datasets and their on-disk form.
//!
//! A dataset is a CSV file with header `m,direction,sequence_index,survival,n_shots`
//! plus a JSON sidecar (`<stem>.meta.json`) echoing the plan that produced it.
//! Floats are written in shortest round-trip form, so read-after-write is
//! bit-exact.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clifford::Direction;
use crate::error::{Error, Result};
use crate::simulator::SimulationPlan;

pub const CSV_HEADER: [&str; 5] = ["m", "direction", "sequence_index", "survival", "n_shots"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRecord {
    pub m: u32,
    pub direction: Direction,
    pub sequence_index: u32,
    /// Fraction of the `n_shots` repetitions giving the expected outcome.
    pub survival: f64,
    pub n_shots: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMetadata {
    pub toolkit_version: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub plan: Option<SimulationPlan>,
}

impl DatasetMetadata {
    pub fn for_plan(plan: SimulationPlan) -> Self {
        DatasetMetadata {
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: Some(plan.seed),
            plan: Some(plan),
        }
    }

    /// Metadata for data that did not come from the simulator.
    pub fn external() -> Self {
        DatasetMetadata {
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            plan: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkDataset {
    records: Vec<SurvivalRecord>,
    metadata: DatasetMetadata,
}

impl BenchmarkDataset {
    /// Records are stored sorted by `(m, sequence_index, direction)`.
    pub fn new(mut records: Vec<SurvivalRecord>, metadata: DatasetMetadata) -> Self {
        records.sort_by(|a, b| {
            (a.m, a.sequence_index, a.direction).cmp(&(b.m, b.sequence_index, b.direction))
        });
        BenchmarkDataset { records, metadata }
    }

    pub fn records(&self) -> &[SurvivalRecord] {
        &self.records
    }

    pub fn metadata(&self) -> &DatasetMetadata {
        &self.metadata
    }

    pub fn lengths(&self) -> Vec<u32> {
        self.records
            .iter()
            .map(|r| r.m)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn estimates(&self, m: u32, direction: Direction) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.m == m && r.direction == direction)
            .map(|r| r.survival)
            .collect()
    }

    /// Largest shot count in the dataset (used for variance floors).
    pub fn max_shots(&self) -> u32 {
        self.records.iter().map(|r| r.n_shots).max().unwrap_or(1)
    }

    /// Checks that estimates are shot fractions in `[0, 1]` and that every
    /// length has both directions.
    pub fn validate(&self) -> Result<()> {
        if self.records.is_empty() {
            return Err(Error::Dataset("no records".into()));
        }
        for r in &self.records {
            if r.n_shots == 0 {
                return Err(Error::Dataset(format!("m={} has n_shots = 0", r.m)));
            }
            if !(0.0..=1.0).contains(&r.survival) {
                return Err(Error::Dataset(format!(
                    "survival {} at m={} outside [0, 1]",
                    r.survival, r.m
                )));
            }
            let k = r.survival * r.n_shots as f64;
            if (k - k.round()).abs() > 1e-6 {
                return Err(Error::Dataset(format!(
                    "survival {} at m={} is not a multiple of 1/{}",
                    r.survival, r.m, r.n_shots
                )));
            }
        }
        for m in self.lengths() {
            for d in [Direction::Up, Direction::Down] {
                if !self.records.iter().any(|r| r.m == m && r.direction == d) {
                    return Err(Error::MissingDirection {
                        m,
                        direction: d.label(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            w.write_record([
                r.m.to_string(),
                r.direction.label().to_string(),
                r.sequence_index.to_string(),
                format!("{:?}", r.survival),
                r.n_shots.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("ascii csv"))
    }

    pub fn from_csv_str(text: &str, metadata: DatasetMetadata) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let header = rdr.headers()?.clone();
        if header.iter().map(str::trim).ne(CSV_HEADER) {
            return Err(Error::Dataset(format!(
                "expected header `{}`, found `{}`",
                CSV_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut records = Vec::new();
        for (line, row) in rdr.records().enumerate() {
            let row = row?;
            let field = |i: usize| row.get(i).map(str::trim).unwrap_or("");
            let bad = |what: &str| Error::Dataset(format!("row {}: bad {what}", line + 2));
            records.push(SurvivalRecord {
                m: field(0).parse().map_err(|_| bad("m"))?,
                direction: Direction::parse(field(1)).ok_or_else(|| bad("direction"))?,
                sequence_index: field(2).parse().map_err(|_| bad("sequence_index"))?,
                survival: field(3).parse().map_err(|_| bad("survival"))?,
                n_shots: field(4).parse().map_err(|_| bad("n_shots"))?,
            });
        }
        let ds = BenchmarkDataset::new(records, metadata);
        ds.validate()?;
        Ok(ds)
    }

    /// SHA-256 of the canonical CSV text; identifies the dataset in fit files.
    pub fn content_id(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_csv_string()?.as_bytes())))
    }

    /// Writes `path` and its metadata sidecar.
    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string()?)?;
        fs::write(sidecar_path(path), serde_json::to_string_pretty(&self.metadata)? + "\n")?;
        Ok(())
    }

    /// Reads `path`; the sidecar is optional for externally produced data.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let side = sidecar_path(path);
        let metadata = if side.exists() {
            serde_json::from_str(&fs::read_to_string(side)?)?
        } else {
            DatasetMetadata::external()
        };
        Self::from_csv_str(&text, metadata)
    }
}

/// `runs/dataset.csv` → `runs/dataset.meta.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}
