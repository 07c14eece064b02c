use thiserror::Error;

use crate::decay::ModelKind;

#[derive(Debug, Error)]
pub enum Error {
    #[error("twirled channel is not depolarizing (max deviation {deviation:.3e})")]
    NotDepolarizing { deviation: f64 },

    #[error("unitary does not match any Clifford group element (best overlap {best_overlap:.12})")]
    CliffordNoMatch { best_overlap: f64 },

    #[error("unknown gate name `{0}`")]
    UnknownGate(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("sequence length {0} not present in dataset")]
    LengthNotFound(u32),

    #[error("length {m} has no {direction} estimates")]
    MissingDirection { m: u32, direction: &'static str },

    #[error("interleaved/reference polarization ratio {ratio:.6} exceeds 1.05")]
    RatioOutOfRange { ratio: f64 },

    #[error("{kind} needs at least {needed} distinct lengths, got {got}")]
    DegenerateData {
        kind: ModelKind,
        needed: usize,
        got: usize,
    },

    #[error("fits were made on different series ({0} vs {1})")]
    SeriesMismatch(String, String),

    #[error("malformed dataset: {0}")]
    Dataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
