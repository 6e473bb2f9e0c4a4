use rand::Rng;

use crate::error::Result;
use crate::noise::{all_ordered_pairs, default_durations, CalibrationData, PairError};
use crate::selection::{device_quantum_volume, MAX_QV_WIDTH};
use crate::sim::GateKind;
use crate::topology::{parse_fleet, DeviceProfile};
use crate::{par, rng};

const FLEET_JSON: &str = include_str!("../../fixtures/fleet.json");

/// The bundled 17-device fleet: three sites of five or six devices with
/// capacities between 5 and 27 qubits and mixed calibration quality.
pub fn bundled_fleet() -> Vec<DeviceProfile> {
    parse_fleet(FLEET_JSON).expect("bundled fleet fixture is valid")
}

/// Raw JSON of the bundled fleet.
pub fn bundled_fleet_json() -> &'static str {
    FLEET_JSON
}

/// Quality tier: (single-qubit error, CNOT error, readout error, T1 us, T2 us).
const TIERS: [(f64, f64, f64, f64, f64); 4] = [
    (3e-4, 8e-3, 0.015, 120.0, 100.0),
    (1e-3, 2e-2, 0.04, 80.0, 60.0),
    (4e-3, 5e-2, 0.09, 45.0, 35.0),
    (1e-2, 1e-1, 0.16, 25.0, 18.0),
];

/// `(site centre, link (px, py, pz), [(capacity, tier)])`.
type Site = ([f64; 2], [f64; 3], &'static [(usize, usize)]);

const SITES: [Site; 3] = [
    (
        [0.0, 0.0],
        [0.010, 0.004, 0.020],
        &[(5, 0), (7, 2), (27, 1), (5, 3), (16, 0), (7, 2)],
    ),
    (
        [60.0, 0.0],
        [0.030, 0.010, 0.040],
        &[(27, 1), (5, 0), (16, 3), (7, 1), (5, 2), (27, 0)],
    ),
    (
        [30.0, 50.0],
        [0.020, 0.020, 0.010],
        &[(7, 1), (5, 3), (16, 0), (27, 2), (5, 1)],
    ),
];

/// Coupled pairs: all-to-all on the first `MAX_QV_WIDTH` qubits, a chain
/// beyond, and the closing pair of every prefix ring, so any truncation to
/// `n` qubits supports both volume circuits and a CNOT ring.
fn coupling(n: usize) -> Vec<[usize; 2]> {
    let mut pairs = all_ordered_pairs(n.min(MAX_QV_WIDTH));
    for i in MAX_QV_WIDTH.saturating_sub(1)..n.saturating_sub(1) {
        pairs.extend([[i, i + 1], [i + 1, i]]);
    }
    for m in MAX_QV_WIDTH + 1..=n.min(crate::sim::MAX_QUBITS) {
        pairs.extend([[m - 1, 0], [0, m - 1]]);
    }
    pairs
}

/// Deterministic generator for the bundled fleet. With `measure_qv` each
/// device's quantum volume is measured, otherwise left at 1.
pub fn synthetic_fleet(seed: u64, measure_qv: bool) -> Result<Vec<DeviceProfile>> {
    let mut r = rng::rng(seed);
    let mut fleet = Vec::new();
    let jitter = |x: f64, r: &mut rand_chacha::ChaCha8Rng| x * r.random_range(0.8..1.2);
    for (s, (centre, link, devices)) in SITES.iter().enumerate() {
        for (i, &(capacity, tier)) in devices.iter().enumerate() {
            let (g1, g2, ro, t1, t2) = TIERS[tier];
            let n = capacity;
            let mut single = std::collections::BTreeMap::new();
            let per_qubit: Vec<f64> = (0..n).map(|_| jitter(g1, &mut r)).collect();
            for k in GateKind::SINGLE_QUBIT {
                single.insert(k.name().to_string(), per_qubit.clone());
            }
            let t1v: Vec<f64> = (0..n).map(|_| jitter(t1, &mut r)).collect();
            let t2v: Vec<f64> = t1v
                .iter()
                .map(|t| (jitter(t2, &mut r)).min(2.0 * t))
                .collect();
            let calibration = CalibrationData {
                t1: t1v,
                t2: t2v,
                single_gate_err: single,
                two_gate_err: coupling(n)
                    .into_iter()
                    .map(|qubits| PairError {
                        gate: GateKind::Cnot,
                        qubits,
                        error: jitter(g2, &mut r),
                    })
                    .collect(),
                readout_err: (0..n).map(|_| jitter(ro, &mut r)).collect(),
                prep01: (0..n).map(|_| jitter(ro / 10.0, &mut r)).collect(),
                prep10: (0..n).map(|_| jitter(ro / 10.0, &mut r)).collect(),
                gate_duration: default_durations(),
            };
            let round = |x: f64| (x * 1e6).round() / 1e6;
            fleet.push(DeviceProfile {
                id: format!("{}{}", ["A", "B", "C"][s], i + 1),
                capacity,
                position: [
                    round(centre[0] + r.random_range(-8.0..8.0)),
                    round(centre[1] + r.random_range(-8.0..8.0)),
                ],
                calibration,
                classical_resources: round(r.random_range(0.2..1.0)),
                link_pauli: link.map(|p| round(jitter(p, &mut r))),
                quantum_volume: 1,
            });
        }
    }
    if measure_qv {
        let qv = par::map_slice(&fleet, |d| {
            device_quantum_volume(d, MAX_QV_WIDTH, rng::derive(seed, &[rng::tag(&d.id)]))
                .map(|r| r.quantum_volume)
        });
        for (d, q) in fleet.iter_mut().zip(qv) {
            d.quantum_volume = q?;
        }
    }
    Ok(fleet)
}

/// Seed the bundled fleet was generated with.
pub const FLEET_SEED: u64 = 2024;

#[cfg(test)]
mod tests {
    use super::*;

    /// Set `NACQFL_REGEN_FIXTURES=1` to rewrite the fixture from the generator.
    #[test]
    fn bundled_fleet_matches_generator() {
        let generated = synthetic_fleet(FLEET_SEED, true).unwrap();
        let json = serde_json::to_string_pretty(&generated).unwrap() + "\n";
        if std::env::var_os("NACQFL_REGEN_FIXTURES").is_some() {
            let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/fleet.json");
            std::fs::write(path, &json).unwrap();
            return;
        }
        assert_eq!(parse_fleet(&json).unwrap(), bundled_fleet());
    }

    #[test]
    fn fleet_shape() {
        let fleet = bundled_fleet();
        assert_eq!(fleet.len(), 17);
        assert!(fleet.iter().all(|d| (5..=27).contains(&d.capacity)));
    }
}
