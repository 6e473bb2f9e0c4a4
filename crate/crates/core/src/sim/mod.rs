//! Dense density-matrix simulator.
//!
//! States are `2^n x 2^n` complex matrices with qubit 0 as the least
//! significant bit of the basis index. Gates are applied exactly; noise only
//! enters through [`KrausChannel`]s applied by the caller (usually the
//! [`crate::noise::Executor`]).

mod channel;
mod circuit;
mod gate;
mod matrix;
mod observable;
mod state;

pub use channel::{ChannelLabel, KrausChannel, CPTP_TOL};
pub use circuit::Circuit;
pub use gate::{pauli_matrices, Gate, GateKind};
pub use matrix::{CMatrix, Superop1, C64};
pub use observable::{Observable, Pauli};
pub use state::{fidelity, DensityMatrix, MAX_QUBITS};

pub(crate) use state::{bitstring, sample_indices};
