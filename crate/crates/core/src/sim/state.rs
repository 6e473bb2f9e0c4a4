use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::channel::KrausChannel;
use super::gate::Gate;
use super::matrix::{CMatrix, Superop1, C64, ONE, ZERO};
use super::observable::{Observable, Pauli};
use crate::error::{Error, Result};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 12;

/// Mixed state of `n_qubits` qubits. Qubit 0 is the least significant bit of
/// the computational-basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: CMatrix,
}

fn check_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::Capacity {
            requested: n_qubits,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

impl DensityMatrix {
    /// `|0...0><0...0|`.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let mut data = CMatrix::zeros(1 << n_qubits);
        data[(0, 0)] = ONE;
        Ok(Self { n_qubits, data })
    }

    /// Product state with qubit `q` in `diag(1 - p_q, p_q)`.
    pub fn classical_product(flip_probs: &[f64]) -> Result<Self> {
        let n = flip_probs.len();
        check_qubits(n)?;
        let dim = 1 << n;
        let mut data = CMatrix::zeros(dim);
        for i in 0..dim {
            let p: f64 = flip_probs
                .iter()
                .enumerate()
                .map(|(q, &f)| if i >> q & 1 == 1 { f } else { 1.0 - f })
                .product();
            data[(i, i)] = C64::new(p, 0.0);
        }
        Ok(Self { n_qubits: n, data })
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1 << n_qubits;
        let data = CMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0));
        Ok(Self { n_qubits, data })
    }

    /// `|psi><psi|` for a normalised state vector.
    pub fn from_pure(amplitudes: &[C64]) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "state vector length {dim} is not a power of two"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("state vector norm {norm}")));
        }
        let mut data = CMatrix::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                data[(r, c)] = amplitudes[r] * amplitudes[c].conj();
            }
        }
        Ok(Self { n_qubits, data })
    }

    /// Wraps a matrix after checking Hermiticity and unit trace.
    pub fn from_matrix(data: CMatrix) -> Result<Self> {
        let dim = data.dim();
        if !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "matrix dimension {dim} is not a power of two"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        if !data.is_hermitian(1e-10) {
            return Err(Error::InvalidState("matrix is not Hermitian".into()));
        }
        let tr = data.trace();
        if (tr - ONE).norm() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        Ok(Self { n_qubits, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.data.as_slice().iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.data.is_hermitian(tol)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let eig = nalgebra::SymmetricEigen::new(self.data.to_nalgebra());
        eig.eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// `alpha * self + (1 - alpha) * other`.
    pub fn mix(&self, other: &DensityMatrix, alpha: f64) -> Result<DensityMatrix> {
        self.same_shape(other)?;
        let data = self
            .data
            .scale(C64::new(alpha, 0.0))
            .add(&other.data.scale(C64::new(1.0 - alpha, 0.0)));
        Ok(Self {
            n_qubits: self.n_qubits,
            data,
        })
    }

    fn same_shape(&self, other: &DensityMatrix) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(())
    }

    fn check_targets(&self, targets: &[usize]) -> Result<()> {
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.n_qubits {
                return Err(Error::InvalidTarget {
                    index: t,
                    n_qubits: self.n_qubits,
                });
            }
            if targets[..i].contains(&t) {
                return Err(Error::DuplicateTarget(t));
            }
        }
        Ok(())
    }

    /// `U rho U^dagger` with `U` embedded on the gate's targets.
    pub fn apply_gate(&self, gate: &Gate) -> Result<DensityMatrix> {
        let mut out = self.clone();
        out.apply_gate_mut(gate)?;
        Ok(out)
    }

    pub fn apply_gate_mut(&mut self, gate: &Gate) -> Result<()> {
        let targets = gate.targets();
        self.check_targets(&targets)?;
        match *gate {
            Gate::Cnot { control, target } => self.apply_cnot_unchecked(control, target),
            _ => self.apply_superop_unchecked(&Superop1::from_unitary(&gate.matrix()), targets[0]),
        }
        Ok(())
    }

    /// `sum_i A_i rho A_i^dagger` with the operators embedded on `targets`.
    pub fn apply_channel(
        &self,
        channel: &KrausChannel,
        targets: &[usize],
    ) -> Result<DensityMatrix> {
        let mut out = self.clone();
        out.apply_channel_mut(channel, targets)?;
        Ok(out)
    }

    pub fn apply_channel_mut(&mut self, channel: &KrausChannel, targets: &[usize]) -> Result<()> {
        if channel.n_qubits() != targets.len() {
            return Err(Error::ArityMismatch {
                expected: channel.n_qubits(),
                got: targets.len(),
            });
        }
        self.check_targets(targets)?;
        if let Some(s) = channel.superop() {
            self.apply_superop_unchecked(&s, targets[0]);
            return Ok(());
        }
        let dim = self.dim();
        let mut acc = CMatrix::zeros(dim);
        for op in channel.operators() {
            let mut term = self.data.clone();
            left_multiply_local(&mut term, op, targets);
            right_multiply_local_adjoint(&mut term, op, targets);
            for (a, t) in acc.as_mut_slice().iter_mut().zip(term.as_slice()) {
                *a += t;
            }
        }
        self.data = acc;
        Ok(())
    }

    /// Applies a single-qubit superoperator to qubit `q`.
    pub fn apply_superop(&mut self, superop: &Superop1, q: usize) -> Result<()> {
        self.check_targets(&[q])?;
        self.apply_superop_unchecked(superop, q);
        Ok(())
    }

    pub(crate) fn apply_superop_unchecked(&mut self, s: &Superop1, q: usize) {
        let dim = self.dim();
        let m = 1usize << q;
        let d = self.data.as_mut_slice();
        for r in (0..dim).filter(|r| r & m == 0) {
            let r1 = r | m;
            for c in (0..dim).filter(|c| c & m == 0) {
                let c1 = c | m;
                let v = [
                    d[r * dim + c],
                    d[r * dim + c1],
                    d[r1 * dim + c],
                    d[r1 * dim + c1],
                ];
                let w = s.apply_block(v);
                d[r * dim + c] = w[0];
                d[r * dim + c1] = w[1];
                d[r1 * dim + c] = w[2];
                d[r1 * dim + c1] = w[3];
            }
        }
    }

    pub(crate) fn apply_cnot_unchecked(&mut self, control: usize, target: usize) {
        let dim = self.dim();
        let (cm, tm) = (1usize << control, 1usize << target);
        let d = self.data.as_mut_slice();
        // rows
        for r in (0..dim).filter(|r| r & cm != 0 && r & tm == 0) {
            let r1 = r | tm;
            for c in 0..dim {
                d.swap(r * dim + c, r1 * dim + c);
            }
        }
        // columns
        for r in 0..dim {
            for c in (0..dim).filter(|c| c & cm != 0 && c & tm == 0) {
                d.swap(r * dim + c, r * dim + (c | tm));
            }
        }
    }

    /// `Tr(rho P)`; the (numerically tiny) imaginary part is dropped.
    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        if obs.len() != self.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "observable on {} qubits, state on {}",
                obs.len(),
                self.n_qubits
            )));
        }
        let dim = self.dim();
        let x_mask = obs
            .paulis()
            .iter()
            .enumerate()
            .filter(|(_, p)| matches!(p, Pauli::X | Pauli::Y))
            .fold(0usize, |m, (q, _)| m | 1 << q);
        let mut total = ZERO;
        for j in 0..dim {
            // P|j> = phase(j) |j ^ x_mask>, so (rho P)_jj = rho[j, j^x] * phase(j)
            let mut phase = ONE;
            for (q, p) in obs.paulis().iter().enumerate() {
                let bit = j >> q & 1;
                match p {
                    Pauli::I | Pauli::X => {}
                    Pauli::Z => {
                        if bit == 1 {
                            phase = -phase;
                        }
                    }
                    Pauli::Y => {
                        phase *= if bit == 0 {
                            C64::new(0.0, 1.0)
                        } else {
                            C64::new(0.0, -1.0)
                        };
                    }
                }
            }
            total += self.data[(j, j ^ x_mask)] * phase;
        }
        Ok(total.re)
    }

    /// `<Z_q>` for every qubit, from the diagonal.
    pub fn z_expectations(&self) -> Vec<f64> {
        let dim = self.dim();
        let mut out = vec![0.0; self.n_qubits];
        for i in 0..dim {
            let p = self.data[(i, i)].re;
            for (q, e) in out.iter_mut().enumerate() {
                if i >> q & 1 == 1 {
                    *e -= p;
                } else {
                    *e += p;
                }
            }
        }
        out
    }

    /// Computational-basis outcome probabilities (clamped at zero, renormalised).
    pub fn probabilities(&self) -> Vec<f64> {
        let mut p: Vec<f64> = (0..self.dim())
            .map(|i| self.data[(i, i)].re.max(0.0))
            .collect();
        let total: f64 = p.iter().sum();
        if total > 0.0 {
            p.iter_mut().for_each(|x| *x /= total);
        }
        p
    }

    /// Samples `shots` measurements in the computational basis. Keys are
    /// bitstrings with qubit `n-1` leftmost.
    pub fn sample_counts(&self, shots: usize, seed: u64) -> Result<BTreeMap<String, usize>> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shots must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let outcomes = sample_indices(&self.probabilities(), shots, &mut rng)?;
        let mut counts = BTreeMap::new();
        for idx in outcomes {
            *counts.entry(bitstring(idx, self.n_qubits)).or_insert(0) += 1;
        }
        Ok(counts)
    }

    /// Uhlmann fidelity `(Tr sqrt(sqrt(a) b sqrt(a)))^2`.
    pub fn fidelity(&self, other: &DensityMatrix) -> Result<f64> {
        self.same_shape(other)?;
        let sqrt_a = psd_sqrt(&self.data.to_nalgebra());
        let inner = &sqrt_a * other.data.to_nalgebra() * &sqrt_a;
        let eig = nalgebra::SymmetricEigen::new(inner);
        let s: f64 = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum();
        Ok((s * s).clamp(0.0, 1.0))
    }
}

/// Free-function form of [`DensityMatrix::fidelity`].
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    a.fidelity(b)
}

pub(crate) fn bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .rev()
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub(crate) fn sample_indices<R: rand::Rng>(
    probs: &[f64],
    shots: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let dist = WeightedIndex::new(probs)
        .map_err(|e| Error::InvalidState(format!("cannot sample distribution: {e}")))?;
    Ok((0..shots).map(|_| dist.sample(rng)).collect())
}

fn psd_sqrt(m: &nalgebra::DMatrix<C64>) -> nalgebra::DMatrix<C64> {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let v = &eig.eigenvectors;
    let d = nalgebra::DMatrix::from_diagonal(
        &eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0)),
    );
    v * d * v.adjoint()
}

fn local_indices(base: usize, targets: &[usize]) -> Vec<usize> {
    (0..1usize << targets.len())
        .map(|l| {
            targets
                .iter()
                .enumerate()
                .fold(base, |acc, (j, &t)| acc | ((l >> j & 1) << t))
        })
        .collect()
}

fn group_bases(dim: usize, targets: &[usize]) -> impl Iterator<Item = usize> + '_ {
    let mask = targets.iter().fold(0usize, |m, &t| m | 1 << t);
    (0..dim).filter(move |i| i & mask == 0)
}

fn left_multiply_local(m: &mut CMatrix, op: &CMatrix, targets: &[usize]) {
    let dim = m.dim();
    let k = op.dim();
    let mut buf = vec![ZERO; k];
    for base in group_bases(dim, targets) {
        let idx = local_indices(base, targets);
        for c in 0..dim {
            for (l, b) in buf.iter_mut().enumerate() {
                *b = (0..k).map(|n| op[(l, n)] * m[(idx[n], c)]).sum();
            }
            for (l, &b) in buf.iter().enumerate() {
                m[(idx[l], c)] = b;
            }
        }
    }
}

fn right_multiply_local_adjoint(m: &mut CMatrix, op: &CMatrix, targets: &[usize]) {
    let dim = m.dim();
    let k = op.dim();
    let mut buf = vec![ZERO; k];
    for base in group_bases(dim, targets) {
        let idx = local_indices(base, targets);
        for r in 0..dim {
            for (l, b) in buf.iter_mut().enumerate() {
                *b = (0..k).map(|n| m[(r, idx[n])] * op[(l, n)].conj()).sum();
            }
            for (l, &b) in buf.iter().enumerate() {
                m[(r, idx[l])] = b;
            }
        }
    }
}
