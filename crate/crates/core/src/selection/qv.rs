use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{CalibratedNoise, Executor, IdealNoise, NoiseModel};
use crate::sim::{Circuit, Gate};
use crate::topology::DeviceProfile;
use crate::{par, rng};

/// Random circuits per width.
pub const QV_CIRCUITS: usize = 20;
/// A width passes when its mean heavy-output probability exceeds this.
pub const HOP_THRESHOLD: f64 = 2.0 / 3.0;
pub const MAX_QV_WIDTH: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QvReport {
    pub quantum_volume: u64,
    /// `(width, mean heavy-output probability)` for each width tried.
    pub hop: Vec<(usize, f64)>,
}

fn random_block<R: Rng>(c: &mut Circuit, a: usize, b: usize, r: &mut R) -> Result<()> {
    let mut angle = || r.random::<f64>() * TAU;
    let mut gates = Vec::with_capacity(17);
    for q in [a, b] {
        gates.extend([
            Gate::Rz(q, angle()),
            Gate::Ry(q, angle()),
            Gate::Rz(q, angle()),
        ]);
    }
    gates.extend([
        Gate::Cnot {
            control: a,
            target: b,
        },
        Gate::Ry(a, angle()),
        Gate::Rz(b, angle()),
        Gate::Cnot {
            control: b,
            target: a,
        },
        Gate::Ry(a, angle()),
        Gate::Cnot {
            control: a,
            target: b,
        },
    ]);
    for q in [a, b] {
        gates.extend([
            Gate::Rz(q, angle()),
            Gate::Ry(q, angle()),
            Gate::Rz(q, angle()),
        ]);
    }
    for g in gates {
        c.push(g)?;
    }
    Ok(())
}

/// Square model circuit: `width` layers, each a random qubit permutation
/// followed by random two-qubit blocks on consecutive pairs.
pub fn model_circuit(width: usize, seed: u64) -> Result<Circuit> {
    let mut r = rng::rng(seed);
    let mut c = Circuit::new(width);
    let mut perm: Vec<usize> = (0..width).collect();
    for _ in 0..width {
        perm.shuffle(&mut r);
        for pair in perm.chunks_exact(2) {
            random_block(&mut c, pair[0], pair[1], &mut r)?;
        }
    }
    Ok(c)
}

/// Probability mass the noisy distribution puts on outcomes whose ideal
/// probability exceeds the ideal median.
pub fn heavy_output_probability(ideal: &[f64], noisy: &[f64]) -> f64 {
    let mut sorted = ideal.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n.is_multiple_of(2) {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    } else {
        sorted[n / 2]
    };
    ideal
        .iter()
        .zip(noisy)
        .filter(|(i, _)| **i > median)
        .map(|(_, p)| p)
        .sum()
}

/// Heavy-output test for widths `2..=max_width`. The volume is `2^m` for the
/// largest `m` such that every width up to `m` passes, and 1 when width 2
/// fails. Deterministic given `seed`.
pub fn quantum_volume(model: &dyn NoiseModel, max_width: usize, seed: u64) -> Result<QvReport> {
    if !(2..=MAX_QV_WIDTH).contains(&max_width) {
        return Err(Error::InvalidParameter(format!(
            "quantum-volume width {max_width} outside 2..={MAX_QV_WIDTH}"
        )));
    }
    let noisy = Executor::new(model, max_width)?;
    let ideal = Executor::new(&IdealNoise, max_width)?;
    let mut qv = 1u64;
    let mut hop = Vec::new();
    let mut passing = true;
    for m in 2..=max_width {
        let values = par::map_range(QV_CIRCUITS, |i| -> Result<f64> {
            let c = model_circuit(m, rng::derive(seed, &[m as u64, i as u64]))?;
            Ok(heavy_output_probability(
                &ideal.probabilities(&c)?,
                &noisy.probabilities(&c)?,
            ))
        });
        let values = values.into_iter().collect::<Result<Vec<_>>>()?;
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        hop.push((m, mean));
        passing &= mean > HOP_THRESHOLD;
        if passing {
            qv = 1 << m;
        }
    }
    Ok(QvReport {
        quantum_volume: qv,
        hop,
    })
}

/// Quantum volume of a device under its calibrated noise, measured on its
/// first `min(max_width, capacity)` qubits.
pub fn device_quantum_volume(
    device: &DeviceProfile,
    max_width: usize,
    seed: u64,
) -> Result<QvReport> {
    let width = max_width.min(device.capacity);
    let model = CalibratedNoise::new(device.calibration.truncated(width)?)?;
    quantum_volume(&model, width, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heavy_set_against_median() {
        let ideal = [0.4, 0.3, 0.2, 0.1];
        assert!((heavy_output_probability(&ideal, &ideal) - 0.7).abs() < 1e-12);
        let uniform = [0.25; 4];
        assert!((heavy_output_probability(&ideal, &uniform) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn model_circuit_is_seeded() {
        assert_eq!(model_circuit(3, 1).unwrap(), model_circuit(3, 1).unwrap());
        assert_ne!(model_circuit(3, 1).unwrap(), model_circuit(3, 2).unwrap());
    }

    #[test]
    fn width_bounds() {
        assert!(quantum_volume(&IdealNoise, 1, 0).is_err());
        assert!(quantum_volume(&IdealNoise, 6, 0).is_err());
    }
}
