use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::GateKind;

/// Error rate of a two-qubit gate on an ordered qubit pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairError {
    pub gate: GateKind,
    pub qubits: [usize; 2],
    pub error: f64,
}

/// Per-device calibration snapshot. Times are in microseconds (`t1`, `t2`)
/// and nanoseconds (`gate_duration`); everything else is a probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationData {
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    /// Gate name (`"x"`, `"h"`, `"ry"`, ...) to per-qubit error.
    pub single_gate_err: BTreeMap<String, Vec<f64>>,
    pub two_gate_err: Vec<PairError>,
    pub readout_err: Vec<f64>,
    pub prep01: Vec<f64>,
    pub prep10: Vec<f64>,
    /// Gate name to duration in nanoseconds.
    pub gate_duration: BTreeMap<String, f64>,
}

fn is_prob(p: f64) -> bool {
    (0.0..=1.0).contains(&p)
}

impl CalibrationData {
    /// A device with identical qubits. `pairs` lists the coupled ordered
    /// pairs carrying `two_err`.
    #[allow(clippy::too_many_arguments)]
    pub fn uniform(
        n_qubits: usize,
        t1: f64,
        t2: f64,
        single_err: f64,
        two_err: f64,
        pairs: &[[usize; 2]],
        readout: f64,
        prep: f64,
    ) -> Self {
        let v = |x: f64| vec![x; n_qubits];
        Self {
            t1: v(t1),
            t2: v(t2),
            single_gate_err: GateKind::SINGLE_QUBIT
                .iter()
                .map(|k| (k.name().to_string(), v(single_err)))
                .collect(),
            two_gate_err: pairs
                .iter()
                .map(|&qubits| PairError {
                    gate: GateKind::Cnot,
                    qubits,
                    error: two_err,
                })
                .collect(),
            readout_err: v(readout),
            prep01: v(prep),
            prep10: v(prep),
            gate_duration: default_durations(),
        }
    }

    /// Noiseless device: zero errors and infinite coherence times.
    pub fn ideal(n_qubits: usize) -> Self {
        let pairs = all_ordered_pairs(n_qubits);
        Self::uniform(
            n_qubits,
            f64::INFINITY,
            f64::INFINITY,
            0.0,
            0.0,
            &pairs,
            0.0,
            0.0,
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.t1.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits();
        if n == 0 {
            return Err(Error::Calibration("calibration has no qubits".into()));
        }
        let lengths = [
            ("t2", self.t2.len()),
            ("readout_err", self.readout_err.len()),
            ("prep01", self.prep01.len()),
            ("prep10", self.prep10.len()),
        ];
        for (name, len) in lengths {
            if len != n {
                return Err(Error::Calibration(format!(
                    "{name} has {len} entries, expected {n}"
                )));
            }
        }
        for q in 0..n {
            let (t1, t2) = (self.t1[q], self.t2[q]);
            if t1.is_nan() || t1 <= 0.0 || t2.is_nan() || t2 <= 0.0 {
                return Err(Error::Calibration(format!(
                    "qubit {q}: coherence times must be > 0"
                )));
            }
            if t1.is_finite() && t2 > 2.0 * t1 + 1e-9 {
                return Err(Error::Calibration(format!(
                    "qubit {q}: t2 {t2} exceeds 2*t1 {}",
                    2.0 * t1
                )));
            }
        }
        for (name, values) in [
            ("readout_err", &self.readout_err),
            ("prep01", &self.prep01),
            ("prep10", &self.prep10),
        ] {
            if let Some(p) = values.iter().find(|p| !is_prob(**p)) {
                return Err(Error::Calibration(format!(
                    "{name} value {p} outside [0, 1]"
                )));
            }
        }
        for (gate, values) in &self.single_gate_err {
            if values.len() != n {
                return Err(Error::Calibration(format!(
                    "single_gate_err[{gate}] has {} entries, expected {n}",
                    values.len()
                )));
            }
            if let Some(p) = values.iter().find(|p| !is_prob(**p)) {
                return Err(Error::Calibration(format!(
                    "single_gate_err[{gate}] value {p} outside [0, 1]"
                )));
            }
        }
        for e in &self.two_gate_err {
            let [a, b] = e.qubits;
            if a >= n || b >= n || a == b {
                return Err(Error::Calibration(format!(
                    "bad two-qubit pair {:?}",
                    e.qubits
                )));
            }
            if !is_prob(e.error) {
                return Err(Error::Calibration(format!(
                    "two-qubit error {} outside [0, 1]",
                    e.error
                )));
            }
        }
        if let Some((g, d)) = self
            .gate_duration
            .iter()
            .find(|(_, d)| d.is_nan() || **d < 0.0)
        {
            return Err(Error::Calibration(format!("duration of {g} is {d}")));
        }
        Ok(())
    }

    pub fn single_error(&self, kind: GateKind, q: usize) -> Result<f64> {
        self.single_gate_err
            .get(kind.name())
            .and_then(|v| v.get(q))
            .copied()
            .ok_or_else(|| Error::MissingCalibration {
                gate: kind.name().into(),
                qubits: vec![q],
            })
    }

    pub fn two_error(&self, kind: GateKind, control: usize, target: usize) -> Result<f64> {
        self.two_gate_err
            .iter()
            .find(|e| e.gate == kind && e.qubits == [control, target])
            .map(|e| e.error)
            .ok_or_else(|| Error::MissingCalibration {
                gate: kind.name().into(),
                qubits: vec![control, target],
            })
    }

    pub fn duration_ns(&self, kind: GateKind) -> Result<f64> {
        self.gate_duration
            .get(kind.name())
            .copied()
            .ok_or_else(|| Error::MissingCalibration {
                gate: kind.name().into(),
                qubits: vec![],
            })
    }

    /// Restricts the calibration to the first `n` qubits.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n_qubits() {
            return Err(Error::InvalidParameter(format!(
                "cannot truncate {} qubits to {n}",
                self.n_qubits()
            )));
        }
        Ok(Self {
            t1: self.t1[..n].to_vec(),
            t2: self.t2[..n].to_vec(),
            single_gate_err: self
                .single_gate_err
                .iter()
                .map(|(k, v)| (k.clone(), v[..n].to_vec()))
                .collect(),
            two_gate_err: self
                .two_gate_err
                .iter()
                .filter(|e| e.qubits.iter().all(|&q| q < n))
                .cloned()
                .collect(),
            readout_err: self.readout_err[..n].to_vec(),
            prep01: self.prep01[..n].to_vec(),
            prep10: self.prep10[..n].to_vec(),
            gate_duration: self.gate_duration.clone(),
        })
    }
}

/// Typical superconducting gate times: 35 ns single-qubit, 300 ns CNOT.
pub fn default_durations() -> BTreeMap<String, f64> {
    let mut d: BTreeMap<String, f64> = GateKind::SINGLE_QUBIT
        .iter()
        .map(|k| (k.name().to_string(), 35.0))
        .collect();
    d.insert("rz".into(), 0.0);
    d.insert(GateKind::Cnot.name().into(), 300.0);
    d
}

pub fn all_ordered_pairs(n: usize) -> Vec<[usize; 2]> {
    (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| [a, b]))
        .collect()
}
