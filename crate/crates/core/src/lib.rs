//! Single-qubit randomized benchmarking under quasi-static detuning noise.
//!
//! The crate covers the 24-element Clifford group and its pulse
//! decompositions, a detuned pulse model, a seeded parallel benchmarking
//! simulator, four parametric decay models and a weighted least-squares
//! fitter with AIC model comparison.

pub mod clifford;
pub mod dataset;
pub mod decay;
pub mod error;
pub mod fidelity;
pub mod fit;
pub mod noise;
pub mod ptm;
pub mod pulse;
pub mod rng;
pub mod simulator;
pub mod twirl;
pub mod unitary;

pub use clifford::{recovery_gate, Clifford, CliffordElement, CliffordGroup, Direction};
pub use dataset::{BenchmarkDataset, DatasetMetadata, SurvivalRecord};
pub use decay::{tilde_series, DecayModel, DecaySeries, ModelKind, SeriesKind};
pub use error::{Error, Result};
pub use fidelity::{FidelityReport, Pairing, DEFAULT_PULSES_PER_CLIFFORD};
pub use fit::{compare, fit, FitResult};
pub use noise::{DetuningModel, DetuningSpec, QubitConfig};
pub use ptm::ChannelPtm;
pub use pulse::{PrimitivePulse, PulseKind};
pub use simulator::{simulate, SimulationPlan, SpamParams};
pub use unitary::Unitary2;
