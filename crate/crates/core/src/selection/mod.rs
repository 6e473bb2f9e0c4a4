//! Low-noise device selection under capacity, noise, parallelisation and
//! count constraints, plus quantum volume for aggregation weights.

mod greedy;
mod oracle;
mod problem;
mod qv;

pub use greedy::{greedy_select, random_select};
pub use oracle::{
    brute_force_select, default_subset_cap, subsets_up_to, MAX_ORACLE_DEVICES, MAX_UNBOUNDED_CAP,
};
pub use problem::{
    aggregate_noise, Candidate, Constraint, SelectionParams, SelectionProblem, SelectionResult,
};
pub use qv::{
    device_quantum_volume, heavy_output_probability, model_circuit, quantum_volume, QvReport,
    HOP_THRESHOLD, MAX_QV_WIDTH, QV_CIRCUITS,
};
