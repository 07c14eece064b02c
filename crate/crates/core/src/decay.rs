//! Parametric fidelity-decay models and the series they are fitted to.
//!
//! The up/down construction `F̃_m = F̄↑_m − (1 − F̄↓_m)` cancels the constant
//! offset of the zero-order model for a qubit, leaving `F̃_m = Ã pᵐ` when
//! the standard assumptions hold.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clifford::Direction;
use crate::dataset::BenchmarkDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// `A pᵐ + B`
    ZeroOrder,
    /// `Ã pᵐ`
    NoConstant,
    /// `Ã pᵐ + B̃`
    ResidualSpam,
    /// `Ã pᵐ + Ã qᵐ`
    TwoFidelity,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::ZeroOrder,
        ModelKind::NoConstant,
        ModelKind::ResidualSpam,
        ModelKind::TwoFidelity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::ZeroOrder => "zero-order",
            ModelKind::NoConstant => "no-constant",
            ModelKind::ResidualSpam => "residual-spam",
            ModelKind::TwoFidelity => "two-fidelity",
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            ModelKind::NoConstant => 2,
            _ => 3,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::ZeroOrder => &["A", "p", "B"],
            ModelKind::NoConstant => &["A", "p"],
            ModelKind::ResidualSpam => &["A", "p", "B"],
            ModelKind::TwoFidelity => &["A", "p", "q"],
        }
    }

    /// Which parameters are polarizations (constrained to `(0, 1]`).
    pub fn is_rate(self, index: usize) -> bool {
        match self {
            ModelKind::TwoFidelity => index >= 1,
            _ => index == 1,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown model `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DecayModel {
    ZeroOrder { a: f64, p: f64, b: f64 },
    NoConstant { a: f64, p: f64 },
    ResidualSpam { a: f64, p: f64, b: f64 },
    TwoFidelity { a: f64, p: f64, q: f64 },
}

impl DecayModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            DecayModel::ZeroOrder { .. } => ModelKind::ZeroOrder,
            DecayModel::NoConstant { .. } => ModelKind::NoConstant,
            DecayModel::ResidualSpam { .. } => ModelKind::ResidualSpam,
            DecayModel::TwoFidelity { .. } => ModelKind::TwoFidelity,
        }
    }

    /// Parameters in the order of [`ModelKind::param_names`].
    pub fn params(&self) -> Vec<f64> {
        match *self {
            DecayModel::ZeroOrder { a, p, b } | DecayModel::ResidualSpam { a, p, b } => {
                vec![a, p, b]
            }
            DecayModel::NoConstant { a, p } => vec![a, p],
            DecayModel::TwoFidelity { a, p, q } => vec![a, p, q],
        }
    }

    pub fn from_params(kind: ModelKind, v: &[f64]) -> DecayModel {
        assert_eq!(v.len(), kind.param_count(), "parameter count for {kind}");
        match kind {
            ModelKind::ZeroOrder => DecayModel::ZeroOrder {
                a: v[0],
                p: v[1],
                b: v[2],
            },
            ModelKind::NoConstant => DecayModel::NoConstant { a: v[0], p: v[1] },
            ModelKind::ResidualSpam => DecayModel::ResidualSpam {
                a: v[0],
                p: v[1],
                b: v[2],
            },
            ModelKind::TwoFidelity => DecayModel::TwoFidelity {
                a: v[0],
                p: v[1],
                q: v[2],
            },
        }
    }

    pub fn evaluate(&self, m: f64) -> f64 {
        match *self {
            DecayModel::ZeroOrder { a, p, b } | DecayModel::ResidualSpam { a, p, b } => {
                a * p.powf(m) + b
            }
            DecayModel::NoConstant { a, p } => a * p.powf(m),
            DecayModel::TwoFidelity { a, p, q } => a * (p.powf(m) + q.powf(m)),
        }
    }

    /// `∂ evaluate / ∂ params` at `m`.
    pub fn gradient(&self, m: f64) -> Vec<f64> {
        let dpow = |r: f64| if m == 0.0 { 0.0 } else { m * r.powf(m - 1.0) };
        match *self {
            DecayModel::ZeroOrder { a, p, .. } | DecayModel::ResidualSpam { a, p, .. } => {
                vec![p.powf(m), a * dpow(p), 1.0]
            }
            DecayModel::NoConstant { a, p } => vec![p.powf(m), a * dpow(p)],
            DecayModel::TwoFidelity { a, p, q } => {
                vec![p.powf(m) + q.powf(m), a * dpow(p), a * dpow(q)]
            }
        }
    }

    /// The model's polarization `p`.
    pub fn p(&self) -> f64 {
        self.params()[1]
    }

    /// The second polarization of the two-fidelity model.
    pub fn q(&self) -> Option<f64> {
        match *self {
            DecayModel::TwoFidelity { q, .. } => Some(q),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    /// `F̄↑ − (1 − F̄↓)`
    Tilde,
    Up,
    Down,
}

impl SeriesKind {
    pub fn name(self) -> &'static str {
        match self {
            SeriesKind::Tilde => "tilde",
            SeriesKind::Up => "up",
            SeriesKind::Down => "down",
        }
    }
}

impl FromStr for SeriesKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "tilde" => Ok(SeriesKind::Tilde),
            "up" => Ok(SeriesKind::Up),
            "down" => Ok(SeriesKind::Down),
            other => Err(Error::Config(format!("unknown series `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub m: u32,
    pub value: f64,
    /// Variance of `value` (always positive).
    pub variance: f64,
    pub n_up: usize,
    pub n_down: usize,
}

/// Per-length means with variance estimates, ready for weighted fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySeries {
    pub kind: SeriesKind,
    pub points: Vec<SeriesPoint>,
}

impl DecaySeries {
    pub fn new(kind: SeriesKind, mut points: Vec<SeriesPoint>) -> Result<Self> {
        if let Some(bad) = points.iter().find(|p| !(p.variance > 0.0 && p.variance.is_finite())) {
            return Err(Error::Dataset(format!(
                "variance at m={} must be positive, got {}",
                bad.m, bad.variance
            )));
        }
        points.sort_by(|a, b| {
            a.m.cmp(&b.m)
                .then(a.value.total_cmp(&b.value))
                .then(a.variance.total_cmp(&b.variance))
        });
        Ok(DecaySeries { kind, points })
    }

    /// Series from bare `(m, value, variance)` triples.
    pub fn from_values(kind: SeriesKind, values: &[(u32, f64, f64)]) -> Result<Self> {
        Self::new(
            kind,
            values
                .iter()
                .map(|&(m, value, variance)| SeriesPoint {
                    m,
                    value,
                    variance,
                    n_up: 0,
                    n_down: 0,
                })
                .collect(),
        )
    }

    pub fn lengths(&self) -> Vec<u32> {
        self.points.iter().map(|p| p.m).collect()
    }

    pub fn distinct_lengths(&self) -> usize {
        let mut ms = self.lengths();
        ms.dedup();
        ms.len()
    }

    /// Stable identifier of the series contents.
    pub fn id(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.kind.name().as_bytes());
        for p in &self.points {
            h.update(p.m.to_le_bytes());
            h.update(p.value.to_bits().to_le_bytes());
            h.update(p.variance.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

fn mean_and_var_of_mean(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let s2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, s2 / n)
}

/// Binomial floor `1 / (4 · n_shots · n_sequences)` for saturated points.
fn variance_floor(n_shots: u32, n_sequences: usize) -> f64 {
    1.0 / (4.0 * n_shots as f64 * n_sequences as f64)
}

fn direction_estimates(ds: &BenchmarkDataset, m: u32, d: Direction) -> Result<Vec<f64>> {
    let xs = ds.estimates(m, d);
    if xs.is_empty() {
        return Err(Error::MissingDirection {
            m,
            direction: d.label(),
        });
    }
    Ok(xs)
}

/// `F̃_m` with variance `Var(mean↑) + Var(mean↓)` from the observed spread.
pub fn tilde_series(dataset: &BenchmarkDataset) -> Result<DecaySeries> {
    let shots = dataset.max_shots();
    let points = dataset
        .lengths()
        .into_iter()
        .map(|m| {
            let up = direction_estimates(dataset, m, Direction::Up)?;
            let down = direction_estimates(dataset, m, Direction::Down)?;
            let (mu, vu) = mean_and_var_of_mean(&up);
            let (md, vd) = mean_and_var_of_mean(&down);
            Ok(SeriesPoint {
                m,
                value: mu - (1.0 - md),
                variance: (vu + vd).max(variance_floor(shots, up.len() + down.len())),
                n_up: up.len(),
                n_down: down.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DecaySeries::new(SeriesKind::Tilde, points)
}

/// Mean survival of one direction per length.
pub fn direction_series(dataset: &BenchmarkDataset, direction: Direction) -> Result<DecaySeries> {
    let shots = dataset.max_shots();
    let points = dataset
        .lengths()
        .into_iter()
        .map(|m| {
            let xs = direction_estimates(dataset, m, direction)?;
            let (mean, var) = mean_and_var_of_mean(&xs);
            let (n_up, n_down) = match direction {
                Direction::Up => (xs.len(), 0),
                Direction::Down => (0, xs.len()),
            };
            Ok(SeriesPoint {
                m,
                value: mean,
                variance: var.max(variance_floor(shots, xs.len())),
                n_up,
                n_down,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let kind = match direction {
        Direction::Up => SeriesKind::Up,
        Direction::Down => SeriesKind::Down,
    };
    DecaySeries::new(kind, points)
}

pub fn build_series(dataset: &BenchmarkDataset, kind: SeriesKind) -> Result<DecaySeries> {
    match kind {
        SeriesKind::Tilde => tilde_series(dataset),
        SeriesKind::Up => direction_series(dataset, Direction::Up),
        SeriesKind::Down => direction_series(dataset, Direction::Down),
    }
}
