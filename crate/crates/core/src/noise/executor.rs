use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use super::model::{GateNoise, NoiseModel};
use crate::error::{Error, Result};
use crate::rng;
use crate::sim::{
    bitstring, sample_indices, Circuit, DensityMatrix, Gate, GateKind, Observable, Pauli, Superop1,
};

#[derive(Clone, Debug)]
enum NoiseStep {
    /// Single-qubit channels, fused per qubit.
    Local(Vec<(usize, Superop1)>),
    /// Anything acting on several qubits at once.
    Generic(GateNoise),
}

impl NoiseStep {
    fn from_noise(noise: GateNoise) -> Self {
        if noise.iter().any(|(ch, _)| ch.n_qubits() != 1) {
            return NoiseStep::Generic(noise);
        }
        let mut fused: Vec<(usize, Superop1)> = Vec::new();
        for (ch, targets) in &noise {
            let s = ch.superop().expect("single-qubit channel");
            match fused.iter_mut().find(|(q, _)| *q == targets[0]) {
                Some((_, acc)) => *acc = s.after(acc),
                None => fused.push((targets[0], s)),
            }
        }
        fused.retain(|(_, s)| !s.is_identity(0.0));
        NoiseStep::Local(fused)
    }
}

/// Runs circuits under a [`NoiseModel`], with the model's channels
/// precomputed per gate kind and target set.
///
/// The model's gate noise must depend only on the gate kind and targets,
/// not on rotation angles.
#[derive(Clone, Debug)]
pub struct Executor {
    n_qubits: usize,
    single: Vec<[Option<NoiseStep>; 7]>,
    cnot: HashMap<(usize, usize), Option<NoiseStep>>,
    readout: Vec<f64>,
    prep: Vec<f64>,
    inverted: bool,
}

fn kind_index(kind: GateKind) -> usize {
    GateKind::SINGLE_QUBIT
        .iter()
        .position(|k| *k == kind)
        .expect("single-qubit kind")
}

fn representative(kind: GateKind, q: usize) -> Gate {
    match kind {
        GateKind::X => Gate::X(q),
        GateKind::Y => Gate::Y(q),
        GateKind::Z => Gate::Z(q),
        GateKind::H => Gate::H(q),
        GateKind::Rx => Gate::Rx(q, 0.0),
        GateKind::Ry => Gate::Ry(q, 0.0),
        GateKind::Rz => Gate::Rz(q, 0.0),
        GateKind::Cnot => unreachable!(),
    }
}

impl Executor {
    pub fn new(model: &dyn NoiseModel, n_qubits: usize) -> Result<Self> {
        DensityMatrix::zero_state(n_qubits)?;
        let single = (0..n_qubits)
            .map(|q| {
                GateKind::SINGLE_QUBIT.map(|k| {
                    model
                        .gate_noise(&representative(k, q))
                        .ok()
                        .map(NoiseStep::from_noise)
                })
            })
            .collect();
        let mut cnot = HashMap::new();
        for c in 0..n_qubits {
            for t in (0..n_qubits).filter(|&t| t != c) {
                let step = model
                    .gate_noise(&Gate::Cnot {
                        control: c,
                        target: t,
                    })
                    .ok()
                    .map(NoiseStep::from_noise);
                cnot.insert((c, t), step);
            }
        }
        Ok(Self {
            n_qubits,
            single,
            cnot,
            readout: (0..n_qubits).map(|q| model.readout_error(q)).collect(),
            prep: (0..n_qubits).map(|q| model.prep_error(q)).collect(),
            inverted: false,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn readout_errors(&self) -> &[f64] {
        &self.readout
    }

    /// True when no gate, readout or preparation noise is present.
    pub fn is_noiseless(&self) -> bool {
        let quiet = |s: &Option<NoiseStep>| matches!(s, Some(NoiseStep::Local(v)) if v.is_empty());
        self.single.iter().all(|row| row.iter().all(quiet))
            && self.cnot.values().all(quiet)
            && self.readout.iter().all(|p| *p == 0.0)
            && self.prep.iter().all(|p| *p == 0.0)
    }

    /// Variant that follows every noisy gate with the exact inverse of the
    /// Pauli-twirled noise, starts from a clean `|0>` and undoes readout
    /// bias. This is the infinite-sample limit of probabilistic error
    /// cancellation against the twirled noise model.
    pub fn with_noise_inversion(&self) -> Result<Self> {
        let invert = |step: &Option<NoiseStep>| -> Result<Option<NoiseStep>> {
            match step {
                None => Ok(None),
                Some(NoiseStep::Generic(_)) => Err(Error::NonPauliNoise(
                    "multi-qubit noise channels cannot be inverted per qubit".into(),
                )),
                Some(NoiseStep::Local(v)) => v
                    .iter()
                    .map(|(q, s)| {
                        let inv = Superop1::pauli_mixture(pauli_inverse_weights(
                            s.pauli_transfer_diagonal(),
                        )?);
                        Ok((*q, inv.after(s)))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(|v| Some(NoiseStep::Local(v))),
            }
        };
        let mut out = self.clone();
        for row in &mut out.single {
            for s in row.iter_mut() {
                *s = invert(s)?;
            }
        }
        for s in out.cnot.values_mut() {
            *s = invert(s)?;
        }
        if let Some(p) = self.readout.iter().find(|p| **p >= 0.5) {
            return Err(Error::NonInvertible(format!(
                "readout flip probability {p}"
            )));
        }
        out.prep = vec![0.0; self.n_qubits];
        out.inverted = true;
        Ok(out)
    }

    fn initial_state(&self, n: usize) -> Result<DensityMatrix> {
        if self.prep[..n].iter().all(|p| *p == 0.0) {
            DensityMatrix::zero_state(n)
        } else {
            DensityMatrix::classical_product(&self.prep[..n])
        }
    }

    fn step_for(&self, gate: &Gate) -> Result<&NoiseStep> {
        let step = match *gate {
            Gate::Cnot { control, target } => {
                self.cnot.get(&(control, target)).and_then(Option::as_ref)
            }
            _ => {
                let q = gate.targets()[0];
                self.single[q][kind_index(gate.kind())].as_ref()
            }
        };
        step.ok_or_else(|| Error::MissingCalibration {
            gate: gate.kind().name().into(),
            qubits: gate.targets(),
        })
    }

    /// Applies `gate` and its noise to `state`.
    pub fn apply_gate(&self, state: &mut DensityMatrix, gate: &Gate) -> Result<()> {
        let step = self.step_for(gate)?;
        match (gate, step) {
            (Gate::Cnot { .. }, _) => {
                state.apply_gate_mut(gate)?;
                self.apply_noise(state, step)?;
            }
            (_, NoiseStep::Local(v)) => {
                let q = gate.targets()[0];
                let mut u = Superop1::from_unitary(&gate.matrix());
                for (t, s) in v {
                    if *t == q {
                        u = s.after(&u);
                    }
                }
                state.apply_superop(&u, q)?;
                for (t, s) in v.iter().filter(|(t, _)| *t != q) {
                    state.apply_superop(s, *t)?;
                }
            }
            (_, NoiseStep::Generic(_)) => {
                state.apply_gate_mut(gate)?;
                self.apply_noise(state, step)?;
            }
        }
        Ok(())
    }

    fn apply_noise(&self, state: &mut DensityMatrix, step: &NoiseStep) -> Result<()> {
        match step {
            NoiseStep::Local(v) => {
                for (q, s) in v {
                    state.apply_superop(s, *q)?;
                }
            }
            NoiseStep::Generic(list) => {
                for (ch, targets) in list {
                    state.apply_channel_mut(ch, targets)?;
                }
            }
        }
        Ok(())
    }

    /// Final noisy state before measurement.
    pub fn run(&self, circuit: &Circuit) -> Result<DensityMatrix> {
        let n = circuit.n_qubits();
        if n > self.n_qubits {
            return Err(Error::Capacity {
                requested: n,
                max: self.n_qubits,
            });
        }
        let mut state = self.initial_state(n)?;
        for g in circuit.gates() {
            self.apply_gate(&mut state, g)?;
        }
        Ok(state)
    }

    fn readout_factor(&self, q: usize) -> f64 {
        let f = 1.0 - 2.0 * self.readout[q];
        if self.inverted {
            1.0
        } else {
            f
        }
    }

    /// `<Z_q>` per qubit as seen through the readout.
    pub fn z_expectations(&self, circuit: &Circuit) -> Result<Vec<f64>> {
        let state = self.run(circuit)?;
        Ok(self.measured_z(&state))
    }

    /// `<Z_q>` of `state` after readout bias.
    pub fn measured_z(&self, state: &DensityMatrix) -> Vec<f64> {
        state
            .z_expectations()
            .into_iter()
            .enumerate()
            .map(|(q, z)| z * self.readout_factor(q))
            .collect()
    }

    /// `<obs>` as seen through the readout; each `Z` factor is damped by
    /// its qubit's readout flip probability.
    pub fn expectation(&self, circuit: &Circuit, obs: &Observable) -> Result<f64> {
        let state = self.run(circuit)?;
        let v = state.expectation(obs)?;
        let damp: f64 = obs
            .paulis()
            .iter()
            .enumerate()
            .filter(|(_, p)| **p == Pauli::Z)
            .map(|(q, _)| self.readout_factor(q))
            .product();
        Ok(v * damp)
    }

    /// Outcome distribution including readout flips.
    pub fn probabilities(&self, circuit: &Circuit) -> Result<Vec<f64>> {
        let state = self.run(circuit)?;
        let mut p = state.probabilities();
        if !self.inverted {
            apply_readout_confusion(&mut p, &self.readout[..circuit.n_qubits()]);
        }
        Ok(p)
    }

    /// Shot counts with readout flips applied to each sampled bit.
    pub fn sample_counts(
        &self,
        circuit: &Circuit,
        shots: usize,
        seed: u64,
    ) -> Result<BTreeMap<String, usize>> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shots must be >= 1".into()));
        }
        let n = circuit.n_qubits();
        let state = self.run(circuit)?;
        let mut r = rng::rng(seed);
        let outcomes = sample_indices(&state.probabilities(), shots, &mut r)?;
        let mut counts = BTreeMap::new();
        for mut idx in outcomes {
            for q in 0..n {
                if self.readout[q] > 0.0 && r.random::<f64>() < self.readout[q] {
                    idx ^= 1 << q;
                }
            }
            *counts.entry(bitstring(idx, n)).or_insert(0) += 1;
        }
        Ok(counts)
    }
}

/// Mixes each outcome with its single-bit-flipped neighbour per qubit.
pub fn apply_readout_confusion(probs: &mut [f64], flips: &[f64]) {
    for (q, &f) in flips.iter().enumerate() {
        if f == 0.0 {
            continue;
        }
        let m = 1usize << q;
        for i in (0..probs.len()).filter(|i| i & m == 0) {
            let (a, b) = (probs[i], probs[i | m]);
            probs[i] = (1.0 - f) * a + f * b;
            probs[i | m] = (1.0 - f) * b + f * a;
        }
    }
}

/// Quasi-probabilities `eta` over `(I, X, Y, Z)` of the Pauli channel whose
/// transfer diagonal is `1 / lambda`:
/// `eta_P = 1/4 sum_Q chi(P, Q) / lambda_Q` with `chi = +1` when `P`, `Q`
/// commute and `-1` otherwise.
pub fn pauli_inverse_weights(lambda: [f64; 4]) -> Result<[f64; 4]> {
    if let Some(l) = lambda.iter().find(|l| **l <= 1e-12) {
        return Err(Error::NonInvertible(format!(
            "Pauli transfer eigenvalue {l} is not positive"
        )));
    }
    let inv = lambda.map(|l| 1.0 / l);
    Ok(std::array::from_fn(|p| {
        0.25 * (0..4).map(|q| commutation_sign(p, q) * inv[q]).sum::<f64>()
    }))
}

/// `+1` when Paulis `p` and `q` (indices into I, X, Y, Z) commute.
pub(crate) fn commutation_sign(p: usize, q: usize) -> f64 {
    if p == 0 || q == 0 || p == q {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::calibration::{all_ordered_pairs, CalibrationData};
    use crate::noise::channels::{make_amplitude_damping, make_depolarizing};
    use crate::noise::model::{CalibratedNoise, IdealNoise, UniformNoise};

    fn bench_circuit() -> Circuit {
        Circuit::from_gates(
            2,
            vec![
                Gate::H(0),
                Gate::Ry(1, 0.7),
                Gate::Cnot {
                    control: 0,
                    target: 1,
                },
                Gate::Rz(0, 0.3),
                Gate::Rx(1, 1.1),
            ],
        )
        .unwrap()
    }

    fn reference(circuit: &Circuit, model: &dyn NoiseModel) -> DensityMatrix {
        let mut s = DensityMatrix::zero_state(circuit.n_qubits()).unwrap();
        for g in circuit.gates() {
            s = s.apply_gate(g).unwrap();
            for (ch, t) in model.gate_noise(g).unwrap() {
                s = s.apply_channel(&ch, &t).unwrap();
            }
        }
        s
    }

    #[test]
    fn fused_execution_matches_channel_by_channel() {
        let calib =
            CalibrationData::uniform(2, 60.0, 50.0, 0.01, 0.05, &all_ordered_pairs(2), 0.0, 0.0);
        let model = CalibratedNoise::new(calib).unwrap();
        let ex = Executor::new(&model, 2).unwrap();
        let c = bench_circuit();
        let fast = ex.run(&c).unwrap();
        assert!(fast
            .matrix()
            .approx_eq(reference(&c, &model).matrix(), 1e-12));
    }

    #[test]
    fn ideal_executor_is_noiseless() {
        let ex = Executor::new(&IdealNoise, 3).unwrap();
        assert!(ex.is_noiseless());
        let c = bench_circuit();
        let s = ex.run(&c).unwrap();
        assert!(s
            .matrix()
            .approx_eq(reference(&c, &IdealNoise).matrix(), 1e-12));
    }

    #[test]
    fn readout_damps_z() {
        let model = UniformNoise::new(make_depolarizing(0.0).unwrap())
            .unwrap()
            .with_readout(0.1);
        let ex = Executor::new(&model, 1).unwrap();
        let z = ex.z_expectations(&Circuit::new(1)).unwrap();
        assert!((z[0] - 0.8).abs() < 1e-12);
        let p = ex.probabilities(&Circuit::new(1)).unwrap();
        assert!((p[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn inversion_cancels_pauli_noise() {
        let model = UniformNoise::new(make_depolarizing(0.1).unwrap())
            .unwrap()
            .with_readout(0.05);
        let noisy = Executor::new(&model, 2).unwrap();
        let clean = Executor::new(&IdealNoise, 2).unwrap();
        let inv = noisy.with_noise_inversion().unwrap();
        let c = bench_circuit();
        let a = inv.z_expectations(&c).unwrap();
        let b = clean.z_expectations(&c).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn inverse_weights_sum_to_one() {
        let lambda = make_amplitude_damping(0.2)
            .unwrap()
            .superop()
            .unwrap()
            .pauli_transfer_diagonal();
        let eta = pauli_inverse_weights(lambda).unwrap();
        assert!((eta.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(pauli_inverse_weights([1.0, 0.0, 0.5, 0.5]).is_err());
    }

    #[test]
    fn readout_flips_in_sampling() {
        let model = UniformNoise::new(make_depolarizing(0.0).unwrap())
            .unwrap()
            .with_readout(0.02);
        let ex = Executor::new(&model, 1).unwrap();
        let shots = 100_000;
        let counts = ex.sample_counts(&Circuit::new(1), shots, 5).unwrap();
        let ones = *counts.get("1").unwrap_or(&0) as f64;
        let sigma = (shots as f64 * 0.02 * 0.98).sqrt();
        assert!((ones - 2000.0).abs() <= 3.0 * sigma, "{ones}");
    }
}
