use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::matrix::{CMatrix, C64, ONE, ZERO};

/// Gate family, used to look up calibration entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    Rx,
    Ry,
    Rz,
    #[serde(rename = "cx")]
    Cnot,
}

impl GateKind {
    pub const SINGLE_QUBIT: [GateKind; 7] = [
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
    ];

    /// Calibration key, e.g. `"x"` or `"cx"`.
    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Cnot => "cx",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A gate instance with its targets (and angle for rotations).
///
/// Rotations follow `R_P(theta) = exp(-i theta P / 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::X(_) => GateKind::X,
            Gate::Y(_) => GateKind::Y,
            Gate::Z(_) => GateKind::Z,
            Gate::H(_) => GateKind::H,
            Gate::Rx(..) => GateKind::Rx,
            Gate::Ry(..) => GateKind::Ry,
            Gate::Rz(..) => GateKind::Rz,
            Gate::Cnot { .. } => GateKind::Cnot,
        }
    }

    /// Target qubits. For CNOT the order is `[control, target]`, which is also
    /// the bit order of the local 4x4 matrix (control is the low bit).
    pub fn targets(&self) -> Vec<usize> {
        match *self {
            Gate::X(q) | Gate::Y(q) | Gate::Z(q) | Gate::H(q) => vec![q],
            Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx(_, a) | Gate::Ry(_, a) | Gate::Rz(_, a) => Some(a),
            _ => None,
        }
    }

    pub fn with_angle(&self, angle: f64) -> Gate {
        match *self {
            Gate::Rx(q, _) => Gate::Rx(q, angle),
            Gate::Ry(q, _) => Gate::Ry(q, angle),
            Gate::Rz(q, _) => Gate::Rz(q, angle),
            g => g,
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rx(q, a) => Gate::Rx(q, -a),
            Gate::Ry(q, a) => Gate::Ry(q, -a),
            Gate::Rz(q, a) => Gate::Rz(q, -a),
            g => g,
        }
    }

    pub fn matrix(&self) -> CMatrix {
        let i = C64::new(0.0, 1.0);
        match *self {
            Gate::X(_) => CMatrix::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]]),
            Gate::Y(_) => CMatrix::from_rows(&[&[ZERO, -i], &[i, ZERO]]),
            Gate::Z(_) => CMatrix::from_rows(&[&[ONE, ZERO], &[ZERO, -ONE]]),
            Gate::H(_) => {
                let h = C64::new(FRAC_1_SQRT_2, 0.0);
                CMatrix::from_rows(&[&[h, h], &[h, -h]])
            }
            Gate::Rx(_, a) => {
                let (c, s) = ((a / 2.0).cos(), (a / 2.0).sin());
                CMatrix::from_rows(&[&[C64::new(c, 0.0), -i * s], &[-i * s, C64::new(c, 0.0)]])
            }
            Gate::Ry(_, a) => {
                let (c, s) = ((a / 2.0).cos(), (a / 2.0).sin());
                CMatrix::from_real(&[&[c, -s], &[s, c]])
            }
            Gate::Rz(_, a) => {
                let e = C64::from_polar(1.0, a / 2.0);
                CMatrix::diagonal(&[e.conj(), e])
            }
            Gate::Cnot { .. } => {
                // local index = control + 2 * target; swaps |c=1,t=0> and |c=1,t=1>
                let mut m = CMatrix::zeros(4);
                m[(0, 0)] = ONE;
                m[(2, 2)] = ONE;
                m[(1, 3)] = ONE;
                m[(3, 1)] = ONE;
                m
            }
        }
    }
}

/// The Pauli matrices I, X, Y, Z.
pub fn pauli_matrices() -> [CMatrix; 4] {
    [
        CMatrix::identity(2),
        Gate::X(0).matrix(),
        Gate::Y(0).matrix(),
        Gate::Z(0).matrix(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_gate_matrices_are_unitary() {
        let gates = [
            Gate::X(0),
            Gate::Y(0),
            Gate::Z(0),
            Gate::H(0),
            Gate::Rx(0, 0.7),
            Gate::Ry(0, -1.3),
            Gate::Rz(0, 2.1),
            Gate::Cnot {
                control: 0,
                target: 1,
            },
        ];
        for g in gates {
            assert!(g.matrix().is_unitary(1e-12), "{g:?}");
            let prod = g.inverse().matrix().matmul(&g.matrix());
            assert!(prod.approx_eq(&CMatrix::identity(prod.dim()), 1e-12));
        }
    }

    #[test]
    fn calibration_keys() {
        assert_eq!(GateKind::Cnot.name(), "cx");
        assert_eq!(serde_json::to_string(&GateKind::Cnot).unwrap(), "\"cx\"");
        assert_eq!(serde_json::to_string(&GateKind::Ry).unwrap(), "\"ry\"");
    }
}
