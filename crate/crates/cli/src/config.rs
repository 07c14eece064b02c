//! Run configuration files.

use std::fs;
use std::path::{Path, PathBuf};

use rbdrift::noise::DetuningSpec;
use rbdrift::simulator::{REFERENCE_LENGTHS, REFERENCE_SEQUENCES, REFERENCE_SHOTS};
use rbdrift::{Clifford, QubitConfig, SimulationPlan, SpamParams, DEFAULT_PULSES_PER_CLIFFORD};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamseyConfig {
    pub n_samples: usize,
    /// Free-evolution delays; defaults to 41 points over `[0, 4 T₂*]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delays_us: Option<Vec<f64>>,
}

impl Default for RamseyConfig {
    fn default() -> Self {
        RamseyConfig {
            n_samples: 100_000,
            delays_us: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    pub histogram_lengths: Vec<u32>,
    pub histogram_bins: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            histogram_lengths: vec![2, 150],
            histogram_bins: 20,
        }
    }
}

/// Everything a pipeline run needs. Unknown keys are rejected and every
/// omitted key falls back to the reference experiment's value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub qubit: QubitConfig,
    pub detuning: DetuningSpec,
    pub lengths: Vec<u32>,
    pub n_sequences: u32,
    pub n_shots: u32,
    /// Gate name such as `"X"` or `"-Y/2"`; `null` for a reference run.
    pub interleaved_gate: Option<String>,
    pub spam: SpamParams,
    pub gate_depolarizing: Option<f64>,
    pub random_directions: bool,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; `null` lets the thread pool decide.
    pub workers: Option<usize>,
    /// Average pulses per Clifford used in fidelity conversions.
    pub n_g: f64,
    pub ramsey: RamseyConfig,
    pub report: ReportConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            qubit: QubitConfig::default(),
            detuning: DetuningSpec::default(),
            lengths: REFERENCE_LENGTHS.to_vec(),
            n_sequences: REFERENCE_SEQUENCES,
            n_shots: REFERENCE_SHOTS,
            interleaved_gate: None,
            spam: SpamParams::default(),
            gate_depolarizing: None,
            random_directions: false,
            seed: 1,
            output_dir: PathBuf::from("out"),
            workers: None,
            n_g: DEFAULT_PULSES_PER_CLIFFORD,
            ramsey: RamseyConfig::default(),
            report: ReportConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks every component before any work starts.
    pub fn validate(&self) -> CliResult<()> {
        self.plan()?.validate()?;
        if !(self.n_g > 0.0 && self.n_g.is_finite()) {
            return Err(CliError::Config(format!("n_g must be positive, got {}", self.n_g)));
        }
        if self.workers == Some(0) {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        if self.ramsey.n_samples == 0 {
            return Err(CliError::Config("ramsey.n_samples must be at least 1".into()));
        }
        if let Some(d) = &self.ramsey.delays_us {
            if d.is_empty() || d.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                return Err(CliError::Config(
                    "ramsey.delays_us must be a non-empty list of non-negative delays".into(),
                ));
            }
        }
        if self.report.histogram_bins == 0 {
            return Err(CliError::Config("report.histogram_bins must be at least 1".into()));
        }
        Ok(())
    }

    pub fn interleaved(&self) -> CliResult<Option<Clifford>> {
        Ok(self
            .interleaved_gate
            .as_deref()
            .map(Clifford::from_name)
            .transpose()?)
    }

    pub fn plan(&self) -> CliResult<SimulationPlan> {
        Ok(SimulationPlan {
            lengths: self.lengths.clone(),
            n_sequences: self.n_sequences,
            n_shots: self.n_shots,
            interleaved_gate: self.interleaved()?,
            spam: self.spam,
            detuning: self.detuning.resolve(&self.qubit)?,
            qubit: self.qubit,
            seed: self.seed,
            gate_depolarizing: self.gate_depolarizing,
            random_directions: self.random_directions,
        })
    }

    pub fn ramsey_delays(&self) -> Vec<f64> {
        self.ramsey.delays_us.clone().unwrap_or_else(|| {
            (0..=40)
                .map(|i| i as f64 * 0.1 * self.qubit.t2_star_us)
                .collect()
        })
    }
}
