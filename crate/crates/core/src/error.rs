use thiserror::Error;

use crate::selection::Constraint;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count {requested} outside supported range 1..={max}")]
    Capacity { requested: usize, max: usize },

    #[error("invalid target qubit {index} for a {n_qubits}-qubit state")]
    InvalidTarget { index: usize, n_qubits: usize },

    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),

    #[error("channel acts on {expected} qubit(s) but {got} target(s) were given")]
    ArityMismatch { expected: usize, got: usize },

    #[error("Kraus operators are not trace preserving (deviation {deviation:e})")]
    NotCptp { deviation: f64 },

    #[error("invalid probability: {0}")]
    InvalidProbability(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid calibration data: {0}")]
    Calibration(String),

    #[error("no calibration entry for gate `{gate}` on qubits {qubits:?}")]
    MissingCalibration { gate: String, qubits: Vec<usize> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("selection is infeasible, violated: {0:?}")]
    Infeasible(Vec<Constraint>),

    #[error("partitioning error: {0}")]
    Partition(String),

    #[error("enumeration bound exceeded: {devices} devices with subset cap {cap}")]
    EnumerationBound { devices: usize, cap: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("noise channel is not invertible: {0}")]
    NonInvertible(String),

    #[error("probabilistic error cancellation needs Pauli noise: {0}")]
    NonPauliNoise(String),

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("malformed IDX file: {0}")]
    Idx(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("unknown device `{0}`")]
    UnknownDevice(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
