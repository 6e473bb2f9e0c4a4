use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{pauli_inverse_weights, NoiseModel};
use crate::sim::{pauli_matrices, Circuit, DensityMatrix, Gate, Observable, Pauli, Superop1};
use crate::{par, rng};

/// Quasi-probability decomposition of an inverse Pauli channel over
/// `(I, X, Y, Z)` conjugations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PecRepresentation {
    pub eta: [f64; 4],
    /// `sum |eta|`; the sampling overhead per use.
    pub gamma: f64,
}

impl PecRepresentation {
    fn from_lambda(lambda: [f64; 4]) -> Result<Self> {
        let eta = pauli_inverse_weights(lambda)?;
        Ok(Self {
            eta,
            gamma: eta.iter().map(|e| e.abs()).sum(),
        })
    }

    /// The quasi-channel `rho -> sum_P eta_P P rho P`.
    pub fn superop(&self) -> Superop1 {
        Superop1::pauli_mixture(self.eta)
    }

    fn sample<R: Rng>(&self, r: &mut R) -> (usize, f64) {
        let mut u = r.random::<f64>() * self.gamma;
        for (i, e) in self.eta.iter().enumerate() {
            let w = e.abs();
            if u < w {
                return (i, e.signum());
            }
            u -= w;
        }
        let last = (0..4).rev().find(|&i| self.eta[i] != 0.0).unwrap_or(0);
        (last, self.eta[last].signum())
    }
}

/// Inverse of the Pauli channel `(px, py, pz)`; requires `px + py + pz < 1/2`.
pub fn pec_representation(px: f64, py: f64, pz: f64) -> Result<PecRepresentation> {
    if [px, py, pz].iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidProbability(format!("({px}, {py}, {pz})")));
    }
    if px + py + pz >= 0.5 {
        return Err(Error::NonInvertible(format!(
            "total error {} is not below 1/2",
            px + py + pz
        )));
    }
    PecRepresentation::from_lambda([
        1.0,
        1.0 - 2.0 * (py + pz),
        1.0 - 2.0 * (px + pz),
        1.0 - 2.0 * (px + py),
    ])
}

/// Full Pauli transfer matrix `R[p][q] = 1/2 Tr(P_p N(P_q))`.
pub fn pauli_transfer_matrix(s: &Superop1) -> [[f64; 4]; 4] {
    let paulis = pauli_matrices();
    let mut r = [[0.0; 4]; 4];
    for (q, pq) in paulis.iter().enumerate() {
        let img = s.apply_block([pq[(0, 0)], pq[(0, 1)], pq[(1, 0)], pq[(1, 1)]]);
        for (p, pp) in paulis.iter().enumerate() {
            let tr = pp[(0, 0)] * img[0]
                + pp[(0, 1)] * img[2]
                + pp[(1, 0)] * img[1]
                + pp[(1, 1)] * img[3];
            r[p][q] = 0.5 * tr.re;
        }
    }
    r
}

/// Inverse representation of a single-qubit noise superoperator, which must
/// be a Pauli channel (diagonal transfer matrix).
pub fn pauli_inverse_of(s: &Superop1) -> Result<PecRepresentation> {
    let r = pauli_transfer_matrix(s);
    for (p, row) in r.iter().enumerate() {
        for (q, v) in row.iter().enumerate() {
            if p != q && v.abs() > 1e-12 {
                return Err(Error::NonPauliNoise(format!(
                    "transfer matrix entry ({p}, {q}) = {v:e}"
                )));
            }
        }
    }
    PecRepresentation::from_lambda([r[0][0], r[1][1], r[2][2], r[3][3]])
}

/// Monte-Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PecEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Product of the per-location overheads.
    pub gamma: f64,
}

struct Step {
    gate: Gate,
    noise: Vec<(crate::sim::KrausChannel, Vec<usize>)>,
    corrections: Vec<(usize, PecRepresentation)>,
}

const CHUNK: usize = 1000;

/// Quasi-probability sampling estimate of `<obs>` for the noiseless circuit.
///
/// Each sample evolves the noisy state exactly, inserts after every noisy
/// gate a Pauli drawn from `|eta| / gamma` (tracking the sign), and takes a
/// single-shot measurement of the diagonal observable, with readout flips
/// corrected the same way. The estimate is `gamma_total * mean(sign * value)`.
pub fn pec_estimate(
    circuit: &Circuit,
    model: &dyn NoiseModel,
    obs: &Observable,
    n_samples: usize,
    seed: u64,
) -> Result<PecEstimate> {
    let n = circuit.n_qubits();
    if obs.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "observable on {} qubits, circuit on {n}",
            obs.len()
        )));
    }
    if !obs.is_diagonal() {
        return Err(Error::InvalidParameter(
            "PEC estimator measures I/Z strings only".into(),
        ));
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
    }
    if (0..n).any(|q| model.prep_error(q) > 0.0) {
        return Err(Error::NonPauliNoise(
            "preparation errors are not handled by PEC".into(),
        ));
    }

    let mut gamma = 1.0;
    let mut steps = Vec::with_capacity(circuit.len());
    for g in circuit.gates() {
        let noise = model.gate_noise(g)?;
        let mut corrections = Vec::new();
        for q in g.targets() {
            let mut fused = Superop1::identity();
            for (ch, t) in &noise {
                if ch.n_qubits() != 1 {
                    return Err(Error::NonPauliNoise("multi-qubit noise channel".into()));
                }
                if t[0] == q {
                    fused = ch.superop().expect("single qubit").after(&fused);
                }
            }
            if !fused.is_identity(1e-15) {
                let rep = pauli_inverse_of(&fused)?;
                gamma *= rep.gamma;
                corrections.push((q, rep));
            }
        }
        steps.push(Step {
            gate: *g,
            noise,
            corrections,
        });
    }
    let support: Vec<usize> = (0..n).filter(|&q| obs.paulis()[q] == Pauli::Z).collect();
    let mut readout = Vec::new();
    for &q in &support {
        let xi = model.readout_error(q);
        if xi > 0.0 {
            let rep = pec_representation(xi, 0.0, 0.0)?;
            gamma *= rep.gamma;
            readout.push((q, xi, rep));
        }
    }
    let pauli_gates = |q: usize, p: usize| match p {
        1 => Some(Gate::X(q)),
        2 => Some(Gate::Y(q)),
        3 => Some(Gate::Z(q)),
        _ => None,
    };

    let chunks = n_samples.div_ceil(CHUNK);
    let partial = par::map_range(chunks, |c| -> Result<(f64, f64)> {
        let mut r = rng::rng(rng::derive(seed, &[c as u64]));
        let count = CHUNK.min(n_samples - c * CHUNK);
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for _ in 0..count {
            let mut state = DensityMatrix::zero_state(n)?;
            let mut sign = 1.0;
            for step in &steps {
                state.apply_gate_mut(&step.gate)?;
                for (ch, t) in &step.noise {
                    state.apply_channel_mut(ch, t)?;
                }
                for (q, rep) in &step.corrections {
                    let (p, s) = rep.sample(&mut r);
                    sign *= s;
                    if let Some(g) = pauli_gates(*q, p) {
                        state.apply_gate_mut(&g)?;
                    }
                }
            }
            let idx = crate::sim::sample_indices(&state.probabilities(), 1, &mut r)?[0];
            let mut bits = idx;
            for (q, xi, rep) in &readout {
                if r.random::<f64>() < *xi {
                    bits ^= 1 << q;
                }
                let (p, s) = rep.sample(&mut r);
                sign *= s;
                if p == 1 || p == 2 {
                    bits ^= 1 << q;
                }
            }
            let parity = support.iter().filter(|&&q| bits >> q & 1 == 1).count();
            let value = if parity % 2 == 0 { 1.0 } else { -1.0 } * sign * gamma;
            sum += value;
            sumsq += value * value;
        }
        Ok((sum, sumsq))
    });
    let (mut sum, mut sumsq) = (0.0, 0.0);
    for p in partial {
        let (s, q) = p?;
        sum += s;
        sumsq += q;
    }
    let m = n_samples as f64;
    let mean = sum / m;
    let var = if n_samples > 1 {
        ((sumsq - m * mean * mean) / (m - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(PecEstimate {
        value: mean,
        std_error: (var / m).sqrt(),
        gamma,
    })
}
