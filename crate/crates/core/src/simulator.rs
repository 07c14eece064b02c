//! Monte Carlo randomized-benchmarking experiments under quasi-static
//! detuning.
//!
//! Each sequence gets one detuning draw that holds for all of its shots.
//! Work is split per `(length index, sequence index)` and every item owns a
//! random stream derived from that pair, so datasets are identical for any
//! worker count.

use rand::Rng;
use rand::seq::SliceRandom;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{recovery_gate, Clifford, Direction, GROUP_ORDER};
use crate::dataset::{BenchmarkDataset, DatasetMetadata, SurvivalRecord};
use crate::error::{Error, Result};
use crate::noise::{noisy_clifford, noisy_clifford_table, DetuningModel, QubitConfig};
use crate::rng::{self, StreamRng};
use crate::unitary::Unitary2;

/// Lengths used in the reference experiment.
pub const REFERENCE_LENGTHS: [u32; 12] = [2, 3, 5, 8, 13, 21, 30, 40, 50, 70, 100, 150];
pub const REFERENCE_SEQUENCES: u32 = 500;
pub const REFERENCE_SHOTS: u32 = 50;

/// State preparation and readout imperfections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpamParams {
    /// Probability of starting in `|↓⟩` instead of `|↑⟩`.
    pub prep_error: f64,
    /// `P(read ↑ | ↑)`.
    pub readout_fidelity_up: f64,
    /// `P(read ↓ | ↓)`.
    pub readout_fidelity_down: f64,
}

impl Default for SpamParams {
    fn default() -> Self {
        SpamParams {
            prep_error: 0.0,
            readout_fidelity_up: 1.0,
            readout_fidelity_down: 1.0,
        }
    }
}

impl SpamParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("prep_error", self.prep_error),
            ("readout_fidelity_up", self.readout_fidelity_up),
            ("readout_fidelity_down", self.readout_fidelity_down),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    /// Reported probability of the expected outcome given the true one.
    pub fn readout(&self, direction: Direction, p_true: f64) -> f64 {
        let (correct, other) = match direction {
            Direction::Up => (self.readout_fidelity_up, self.readout_fidelity_down),
            Direction::Down => (self.readout_fidelity_down, self.readout_fidelity_up),
        };
        correct * p_true + (1.0 - other) * (1.0 - p_true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationPlan {
    pub lengths: Vec<u32>,
    /// Sequences per length, split evenly between up and down targets.
    pub n_sequences: u32,
    pub n_shots: u32,
    #[serde(default)]
    pub interleaved_gate: Option<Clifford>,
    #[serde(default)]
    pub spam: SpamParams,
    pub detuning: DetuningModel,
    pub qubit: QubitConfig,
    pub seed: u64,
    /// Extra depolarizing channel (polarization) after every Clifford.
    #[serde(default)]
    pub gate_depolarizing: Option<f64>,
    /// Shuffle the up/down assignment instead of alternating.
    #[serde(default)]
    pub random_directions: bool,
}

impl SimulationPlan {
    /// The reference experiment: reference lengths, 500 sequences, 50 shots,
    /// Gaussian detuning matched to the qubit's Ramsey `T₂*`.
    pub fn reference_experiment(seed: u64) -> Self {
        let qubit = QubitConfig::default();
        SimulationPlan {
            lengths: REFERENCE_LENGTHS.to_vec(),
            n_sequences: REFERENCE_SEQUENCES,
            n_shots: REFERENCE_SHOTS,
            interleaved_gate: None,
            spam: SpamParams::default(),
            detuning: DetuningModel::Gaussian {
                sigma: crate::noise::ramsey_sigma(&qubit),
            },
            qubit,
            seed,
            gate_depolarizing: None,
            random_directions: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() {
            return Err(Error::Config("lengths must not be empty".into()));
        }
        if self.lengths[0] < 1 || self.lengths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "lengths must be strictly increasing and at least 1".into(),
            ));
        }
        if self.lengths.len() >= 1 << 24 {
            return Err(Error::Config("too many lengths".into()));
        }
        if self.n_sequences < 2 || !self.n_sequences.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "n_sequences must be even and at least 2, got {}",
                self.n_sequences
            )));
        }
        if self.n_shots < 1 {
            return Err(Error::Config("n_shots must be at least 1".into()));
        }
        if let Some(p) = self.gate_depolarizing {
            if !(-1.0 / 3.0..=1.0).contains(&p) {
                return Err(Error::Config(format!(
                    "gate_depolarizing must lie in [-1/3, 1], got {p}"
                )));
            }
        }
        self.spam.validate()?;
        self.detuning.validate()?;
        self.qubit.validate()
    }
}

/// `m` uniform random Cliffords and the recovery gate for `direction`.
pub fn generate_sequence<R: Rng + ?Sized>(
    m: usize,
    direction: Direction,
    rng: &mut R,
) -> (Vec<Clifford>, Clifford) {
    let seq = draw_cliffords(m, rng);
    let recovery = recovery_gate(&seq, direction);
    (seq, recovery)
}

fn draw_cliffords<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<Clifford> {
    (0..m)
        .map(|_| Clifford::from_index(rng.random_range(0..GROUP_ORDER)).expect("in range"))
        .collect()
}

/// `c₁, g, c₂, g, …, c_m, g`.
pub fn interleave(sequence: &[Clifford], gate: Clifford) -> Vec<Clifford> {
    sequence.iter().flat_map(|&c| [c, gate]).collect()
}

/// Survival probability of one sequence (recovery included) at fixed detuning,
/// as reported through the readout model.
pub fn run_sequence_exact(
    sequence: &[Clifford],
    recovery: Clifford,
    detuning: f64,
    spam: &SpamParams,
    config: &QubitConfig,
    direction: Direction,
) -> f64 {
    let net = sequence
        .iter()
        .chain(std::iter::once(&recovery))
        .fold(Unitary2::IDENTITY, |acc, &c| noisy_clifford(c, detuning, config) * acc);
    spam.readout(direction, true_survival(&net, spam.prep_error, direction, 1.0))
}

/// Probability of the expected outcome after the net propagator, before
/// readout. `depolarizing_total` is the accumulated polarization of any
/// extra depolarizing noise, which commutes with every unitary.
fn true_survival(net: &Unitary2, prep_error: f64, direction: Direction, depolarizing_total: f64) -> f64 {
    let p_up = (1.0 - prep_error) * net.entry(0, 0).norm_sqr() + prep_error * net.entry(0, 1).norm_sqr();
    let p_up = depolarizing_total * p_up + (1.0 - depolarizing_total) * 0.5;
    match direction {
        Direction::Up => p_up,
        Direction::Down => 1.0 - p_up,
    }
}

fn survival_from_table(
    table: &[Unitary2],
    gates: &[Clifford],
    spam: &SpamParams,
    direction: Direction,
    gate_depolarizing: Option<f64>,
) -> f64 {
    let net = gates
        .iter()
        .fold(Unitary2::IDENTITY, |acc, c| table[c.index()] * acc);
    let depol = gate_depolarizing.map_or(1.0, |p| p.powi(gates.len() as i32));
    spam.readout(direction, true_survival(&net, spam.prep_error, direction, depol))
}

fn direction_assignment(plan: &SimulationPlan, length_index: usize) -> Vec<Direction> {
    let n = plan.n_sequences as usize;
    let mut dirs: Vec<Direction> = (0..n)
        .map(|i| if i % 2 == 0 { Direction::Up } else { Direction::Down })
        .collect();
    if plan.random_directions {
        let mut rng = rng::substream(plan.seed, rng::TAG_DIRECTIONS, length_index as u64, 0);
        dirs.shuffle(&mut rng);
    }
    dirs
}

fn walk_detunings(plan: &SimulationPlan, length_index: usize) -> Option<Vec<f64>> {
    if !matches!(plan.detuning, DetuningModel::RandomWalk { .. }) {
        return None;
    }
    let mut rng = rng::substream(plan.seed, rng::TAG_DETUNING_WALK, length_index as u64, 0);
    let mut sampler = plan.detuning.sampler();
    Some(
        (0..plan.n_sequences)
            .map(|_| sampler.sample(&mut rng))
            .collect(),
    )
}

/// Runs the full benchmarking experiment described by `plan`.
///
/// Parallelism comes from the ambient rayon pool; wrap the call in
/// `ThreadPool::install` to pin the worker count.
pub fn simulate(plan: &SimulationPlan) -> Result<BenchmarkDataset> {
    plan.validate()?;

    struct LengthJob {
        m: u32,
        directions: Vec<Direction>,
        walk: Option<Vec<f64>>,
    }
    let jobs: Vec<LengthJob> = plan
        .lengths
        .iter()
        .enumerate()
        .map(|(li, &m)| LengthJob {
            m,
            directions: direction_assignment(plan, li),
            walk: walk_detunings(plan, li),
        })
        .collect();

    let items: Vec<(usize, usize)> = jobs
        .iter()
        .enumerate()
        .flat_map(|(li, _)| (0..plan.n_sequences as usize).map(move |si| (li, si)))
        .collect();

    let records: Vec<SurvivalRecord> = items
        .par_iter()
        .map(|&(li, si)| {
            let job = &jobs[li];
            let direction = job.directions[si];
            let mut rng: StreamRng =
                rng::substream(plan.seed, rng::TAG_SEQUENCE, li as u64, si as u64);
            let randoms = draw_cliffords(job.m as usize, &mut rng);
            let mut gates = match plan.interleaved_gate {
                Some(g) => interleave(&randoms, g),
                None => randoms,
            };
            gates.push(recovery_gate(&gates, direction));
            let detuning = match &job.walk {
                Some(walk) => walk[si],
                None => plan.detuning.sampler().sample(&mut rng),
            };
            let table = noisy_clifford_table(detuning, &plan.qubit);
            let p = survival_from_table(&table, &gates, &plan.spam, direction, plan.gate_depolarizing);
            let shots = Binomial::new(plan.n_shots as u64, p.clamp(0.0, 1.0))
                .expect("clamped probability")
                .sample(&mut rng);
            SurvivalRecord {
                m: job.m,
                direction,
                sequence_index: si as u32,
                survival: shots as f64 / plan.n_shots as f64,
                n_shots: plan.n_shots,
            }
        })
        .collect();

    Ok(BenchmarkDataset::new(
        records,
        DatasetMetadata::for_plan(plan.clone()),
    ))
}

/// Sequence-averaged exact survival at one fixed detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub m: u32,
    pub mean: f64,
    /// Sample variance of the mean over sequences.
    pub variance_of_mean: f64,
}

/// Shot-noise-free decay trace at fixed `detuning` with perfect SPAM;
/// directions alternate as in [`simulate`].
pub fn trace_decay(
    detuning: f64,
    lengths: &[u32],
    n_sequences: u32,
    config: &QubitConfig,
    seed: u64,
) -> Result<Vec<TracePoint>> {
    if n_sequences < 2 {
        return Err(Error::Config("trace_decay needs at least 2 sequences".into()));
    }
    config.validate()?;
    let table = noisy_clifford_table(detuning, config);
    let spam = SpamParams::default();
    Ok(lengths
        .iter()
        .enumerate()
        .map(|(li, &m)| {
            let values: Vec<f64> = (0..n_sequences as usize)
                .into_par_iter()
                .map(|si| {
                    let direction = if si % 2 == 0 { Direction::Up } else { Direction::Down };
                    let mut rng = rng::substream(seed, rng::TAG_TRACE, li as u64, si as u64);
                    let mut gates = draw_cliffords(m as usize, &mut rng);
                    gates.push(recovery_gate(&gates, direction));
                    survival_from_table(&table, &gates, &spam, direction, None)
                })
                .collect();
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            TracePoint {
                m,
                mean,
                variance_of_mean: var / n,
            }
        })
        .collect())
}

/// Per-direction histograms of survival estimates at one length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionHistogram {
    pub m: u32,
    /// Bin edges, `bins + 1` values from 0 to 1.
    pub edges: Vec<f64>,
    pub up: Vec<u64>,
    pub down: Vec<u64>,
}

fn bin_of(x: f64, bins: usize) -> usize {
    ((x * bins as f64).floor() as isize).clamp(0, bins as isize - 1) as usize
}

/// Bins the survival estimates of up-target and down-target runs over
/// `[0, 1]`; a value of exactly 1 lands in the top bin.
pub fn histogram(dataset: &BenchmarkDataset, m: u32, bins: usize) -> Result<DirectionHistogram> {
    if bins == 0 {
        return Err(Error::Config("bins must be at least 1".into()));
    }
    if !dataset.lengths().contains(&m) {
        return Err(Error::LengthNotFound(m));
    }
    let mut up = vec![0u64; bins];
    let mut down = vec![0u64; bins];
    for r in dataset.records().iter().filter(|r| r.m == m) {
        let target = match r.direction {
            Direction::Up => &mut up,
            Direction::Down => &mut down,
        };
        target[bin_of(r.survival, bins)] += 1;
    }
    Ok(DirectionHistogram {
        m,
        edges: (0..=bins).map(|i| i as f64 / bins as f64).collect(),
        up,
        down,
    })
}

/// Shared mass of the two spin-up-probability histograms at length `m`.
///
/// Up runs contribute their survival, down runs `1 − survival`, so both are
/// on the `P(↑)` axis; the result is `Σ min(h_up, h_down)` of the normalised
/// histograms, 0 for fully separated and 1 for identical distributions.
pub fn direction_overlap(dataset: &BenchmarkDataset, m: u32, bins: usize) -> Result<f64> {
    if bins == 0 {
        return Err(Error::Config("bins must be at least 1".into()));
    }
    if !dataset.lengths().contains(&m) {
        return Err(Error::LengthNotFound(m));
    }
    let mut up = vec![0.0; bins];
    let mut down = vec![0.0; bins];
    for r in dataset.records().iter().filter(|r| r.m == m) {
        match r.direction {
            Direction::Up => up[bin_of(r.survival, bins)] += 1.0,
            Direction::Down => down[bin_of(1.0 - r.survival, bins)] += 1.0,
        }
    }
    let (nu, nd) = (up.iter().sum::<f64>(), down.iter().sum::<f64>());
    if nu == 0.0 || nd == 0.0 {
        return Err(Error::MissingDirection {
            m,
            direction: if nu == 0.0 { "up" } else { "down" },
        });
    }
    Ok(up.iter().zip(&down).map(|(u, d)| (u / nu).min(d / nd)).sum())
}
