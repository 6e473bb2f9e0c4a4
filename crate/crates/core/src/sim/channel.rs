use std::fmt;

use serde::{Deserialize, Serialize};

use super::matrix::{CMatrix, Superop1};
use crate::error::{Error, Result};

/// Completeness tolerance for `sum_i A_i^dagger A_i = I`.
pub const CPTP_TOL: f64 = 1e-10;

/// What a channel is, for reporting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ChannelLabel {
    BitFlip(f64),
    PhaseFlip(f64),
    Depolarizing(f64),
    AmplitudeDamping(f64),
    PhaseDamping(f64),
    Pauli { px: f64, py: f64, pz: f64 },
    Custom(String),
}

impl fmt::Display for ChannelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelLabel::BitFlip(p) => write!(f, "bitflip({p})"),
            ChannelLabel::PhaseFlip(p) => write!(f, "phaseflip({p})"),
            ChannelLabel::Depolarizing(p) => write!(f, "depolarizing({p})"),
            ChannelLabel::AmplitudeDamping(p) => write!(f, "ampdamp({p})"),
            ChannelLabel::PhaseDamping(p) => write!(f, "phasedamp({p})"),
            ChannelLabel::Pauli { px, py, pz } => write!(f, "pauli({px},{py},{pz})"),
            ChannelLabel::Custom(s) => write!(f, "{s}"),
        }
    }
}

/// A CPTP map in operator-sum form. Construction checks completeness, so every
/// value of this type is trace preserving.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    operators: Vec<CMatrix>,
    n_qubits: usize,
    label: ChannelLabel,
}

impl KrausChannel {
    pub fn new(operators: Vec<CMatrix>, label: ChannelLabel) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidParameter("channel needs at least one operator".into()))?;
        let dim = first.dim();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator dimension {dim} is not a power of two"
            )));
        }
        if operators.iter().any(|a| a.dim() != dim) {
            return Err(Error::DimensionMismatch(
                "Kraus operators differ in dimension".into(),
            ));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        if operators.len() > 1 << (2 * n_qubits) {
            return Err(Error::InvalidParameter(format!(
                "{} operators exceed 4^{n_qubits}",
                operators.len()
            )));
        }
        let deviation = completeness_deviation(&operators);
        if deviation > CPTP_TOL {
            return Err(Error::NotCptp { deviation });
        }
        Ok(Self {
            operators,
            n_qubits,
            label,
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            operators: vec![CMatrix::identity(1 << n_qubits)],
            n_qubits,
            label: ChannelLabel::Custom("identity".into()),
        }
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn label(&self) -> &ChannelLabel {
        &self.label
    }

    /// Superoperator form; only defined for single-qubit channels.
    pub fn superop(&self) -> Option<Superop1> {
        (self.n_qubits == 1).then(|| Superop1::from_kraus(&self.operators))
    }

    /// `|| sum_i A_i^dagger A_i - I ||_max`.
    pub fn completeness_deviation(&self) -> f64 {
        completeness_deviation(&self.operators)
    }
}

fn completeness_deviation(ops: &[CMatrix]) -> f64 {
    let dim = ops[0].dim();
    let sum = ops.iter().fold(CMatrix::zeros(dim), |acc, a| {
        acc.add(&a.adjoint().matmul(a))
    });
    sum.max_abs_diff(&CMatrix::identity(dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::gate::Gate;

    #[test]
    fn rejects_non_trace_preserving_operators() {
        let half = CMatrix::identity(2).scale(0.5.into());
        let err = KrausChannel::new(vec![half], ChannelLabel::Custom("bad".into())).unwrap_err();
        assert!(matches!(err, Error::NotCptp { .. }));
    }

    #[test]
    fn unitary_is_a_channel() {
        let ch =
            KrausChannel::new(vec![Gate::H(0).matrix()], ChannelLabel::Custom("h".into())).unwrap();
        assert_eq!(ch.n_qubits(), 1);
        assert!(ch.completeness_deviation() < 1e-12);
    }

    #[test]
    fn rejects_too_many_operators() {
        let q = CMatrix::identity(2).scale(0.4472135954999579.into());
        let err = KrausChannel::new(vec![q; 5], ChannelLabel::Custom("five".into())).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }
}
