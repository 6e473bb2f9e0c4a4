use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::partition::PartitionPlan;
use crate::error::{Error, Result};
use crate::rng;

/// Rotation slot inside a layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rot {
    Y = 0,
    Z = 1,
}

/// Parameterised circuit plus a linear readout from `<Z>` values to logits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QnnModel {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub n_classes: usize,
    /// Angles laid out `[layer][qubit][RY, RZ]`.
    pub theta: Vec<f64>,
    /// `n_classes x n_qubits`.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl QnnModel {
    /// Angles and weights uniform in `[-0.5, 0.5]`, zero bias.
    pub fn new(n_qubits: usize, n_layers: usize, n_classes: usize, seed: u64) -> Result<Self> {
        let mut m = Self::zeros(n_qubits, n_layers, n_classes)?;
        let mut r = rng::rng(seed);
        for t in &mut m.theta {
            *t = r.random_range(-0.5..=0.5);
        }
        for row in &mut m.weights {
            for w in row {
                *w = r.random_range(-0.5..=0.5);
            }
        }
        Ok(m)
    }

    pub fn zeros(n_qubits: usize, n_layers: usize, n_classes: usize) -> Result<Self> {
        if n_qubits == 0 || n_classes < 2 {
            return Err(Error::InvalidParameter(
                "a model needs at least one qubit and two classes".into(),
            ));
        }
        Ok(Self {
            n_qubits,
            n_layers,
            n_classes,
            theta: vec![0.0; 2 * n_layers * n_qubits],
            weights: vec![vec![0.0; n_qubits]; n_classes],
            bias: vec![0.0; n_classes],
        })
    }

    pub fn theta_index(&self, layer: usize, qubit: usize, rot: Rot) -> usize {
        (layer * self.n_qubits + qubit) * 2 + rot as usize
    }

    pub fn n_params(&self) -> usize {
        self.theta.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta.len() != 2 * self.n_layers * self.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} angles for {} layers of {} qubits",
                self.theta.len(),
                self.n_layers,
                self.n_qubits
            )));
        }
        if self.weights.len() != self.n_classes
            || self.bias.len() != self.n_classes
            || self.weights.iter().any(|r| r.len() != self.n_qubits)
        {
            return Err(Error::DimensionMismatch(
                "readout shape does not match the model".into(),
            ));
        }
        Ok(())
    }

    pub fn logits(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "readout expects {} values, got {}",
                self.n_qubits,
                z.len()
            )));
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(z).map(|(w, v)| w * v).sum::<f64>())
            .collect())
    }

    /// Readout weights then bias, flattened row-major.
    pub fn readout_flat(&self) -> Vec<f64> {
        self.weights
            .iter()
            .flatten()
            .chain(&self.bias)
            .copied()
            .collect()
    }

    pub fn set_readout_flat(&mut self, flat: &[f64]) -> Result<()> {
        let nw = self.n_classes * self.n_qubits;
        if flat.len() != nw + self.n_classes {
            return Err(Error::DimensionMismatch(format!(
                "readout vector of length {}, expected {}",
                flat.len(),
                nw + self.n_classes
            )));
        }
        for (row, chunk) in self
            .weights
            .iter_mut()
            .zip(flat[..nw].chunks(self.n_qubits))
        {
            row.copy_from_slice(chunk);
        }
        self.bias.copy_from_slice(&flat[nw..]);
        Ok(())
    }
}

/// Serialised model together with the plan it was trained under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub model: QnnModel,
    pub plan: PartitionPlan,
}

impl Checkpoint {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        c.model.validate()?;
        c.plan.validate(c.model.n_qubits)?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_init() {
        let m = QnnModel::new(3, 2, 2, 5).unwrap();
        assert_eq!(m.n_params(), 12);
        assert_eq!(m.theta_index(1, 2, Rot::Z), 11);
        assert!(m.theta.iter().all(|t| t.abs() <= 0.5));
        assert_eq!(m.bias, vec![0.0, 0.0]);
        assert_eq!(m, QnnModel::new(3, 2, 2, 5).unwrap());
    }

    #[test]
    fn readout_round_trip() {
        let mut m = QnnModel::new(2, 1, 3, 1).unwrap();
        let flat: Vec<f64> = (0..9).map(f64::from).collect();
        m.set_readout_flat(&flat).unwrap();
        assert_eq!(m.readout_flat(), flat);
        assert_eq!(m.logits(&[1.0, -1.0]).unwrap(), vec![5.0, 6.0, 7.0]);
    }
}
