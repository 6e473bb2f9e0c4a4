//! Noise channels, device calibration and noisy circuit execution.

mod calibration;
mod channels;
mod effective;
mod executor;
mod model;

pub use calibration::{all_ordered_pairs, default_durations, CalibrationData, PairError};
pub use channels::{
    make_amplitude_damping, make_bit_flip, make_depolarizing, make_pauli, make_phase_damping,
    make_phase_flip, ChannelKind, ChannelSpec,
};
pub use effective::{effective_noise, EffectiveNoiseBreakdown, NoiseScale, NoiseWeights};
pub use executor::{apply_readout_confusion, pauli_inverse_weights, Executor};
pub use model::{
    decay_probability, gate_noise_channel, measurement_noise, CalibratedNoise, GateNoise,
    IdealNoise, NoiseModel, UniformNoise,
};
