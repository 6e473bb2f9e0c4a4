use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Tensor product of single-qubit Paulis; entry `q` acts on qubit `q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observable {
    paulis: Vec<Pauli>,
}

impl Observable {
    pub fn new(paulis: Vec<Pauli>) -> Self {
        Self { paulis }
    }

    /// `Z` on `qubit`, identity elsewhere.
    pub fn z(n_qubits: usize, qubit: usize) -> Self {
        let mut paulis = vec![Pauli::I; n_qubits];
        paulis[qubit] = Pauli::Z;
        Self { paulis }
    }

    pub fn len(&self) -> usize {
        self.paulis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paulis.is_empty()
    }

    pub fn paulis(&self) -> &[Pauli] {
        &self.paulis
    }

    /// True when every factor is `I` or `Z` (diagonal in the computational basis).
    pub fn is_diagonal(&self) -> bool {
        self.paulis.iter().all(|p| matches!(p, Pauli::I | Pauli::Z))
    }

    /// Bit mask of qubits carrying a non-identity factor.
    pub fn support_mask(&self) -> usize {
        self.paulis
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .fold(0, |m, (q, _)| m | (1 << q))
    }
}

/// Parses strings such as `"ZIZ"`; the leftmost letter is qubit 0.
impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let paulis = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidParameter(format!(
                    "bad Pauli letter `{other}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { paulis })
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.paulis {
            write!(f, "{p:?}")?;
        }
        Ok(())
    }
}
