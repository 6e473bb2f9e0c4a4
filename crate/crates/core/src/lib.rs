//! Desk-scale simulator for noise-aware clustered quantum federated learning.
//!
//! The crate is layered bottom-up:
//!
//! * [`sim`]: dense density-matrix simulator (gates, Kraus channels, sampling).
//! * [`noise`]: channel constructors, device calibration, effective-noise
//!   scores and noisy circuit execution.
//! * [`topology`]: device fleet, channel-capacity distance, k-means clustering
//!   and cluster-head election.
//! * [`selection`]: constrained low-noise device selection (greedy and exact)
//!   and quantum volume.
//! * [`dqnn`]: partitioned quantum neural network and parameter-shift training.
//! * [`mitigation`]: zero-noise extrapolation and probabilistic error
//!   cancellation.
//! * [`federation`]: clustered federated training with volume-weighted averaging.
//! * [`harness`]: datasets, fixtures, experiment presets and sweeps.

pub mod dqnn;
pub mod error;
pub mod federation;
pub mod harness;
pub mod mitigation;
pub mod noise;
pub mod par;
pub mod rng;
pub mod selection;
pub mod sim;
pub mod topology;

pub use error::{Error, Result};
