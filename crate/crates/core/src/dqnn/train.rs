use std::f64::consts::FRAC_PI_2;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::forward::{loss, loss_gradient, reconstruct, ModelRuntime};
use super::model::QnnModel;
use crate::error::{Error, Result};
use crate::harness::Dataset;
use crate::{par, rng};

/// Gradient of the loss with respect to every trainable quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub theta: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl Gradient {
    fn zeros(model: &QnnModel) -> Self {
        Self {
            theta: vec![0.0; model.n_params()],
            weights: vec![vec![0.0; model.n_qubits]; model.n_classes],
            bias: vec![0.0; model.n_classes],
        }
    }

    fn add_scaled(&mut self, other: &Gradient, s: f64) {
        for (a, b) in self.theta.iter_mut().zip(&other.theta) {
            *a += s * b;
        }
        for (ra, rb) in self.weights.iter_mut().zip(&other.weights) {
            for (a, b) in ra.iter_mut().zip(rb) {
                *a += s * b;
            }
        }
        for (a, b) in self.bias.iter_mut().zip(&other.bias) {
            *a += s * b;
        }
    }
}

/// `d<Z_j>/d theta_k` by the parameter-shift rule, indexed `[k][j]` over
/// model qubits `j`. Entries outside a parameter's block are zero.
pub fn expectation_jacobian(
    model: &QnnModel,
    runtime: &ModelRuntime,
    features: &[f64],
) -> Result<Vec<Vec<f64>>> {
    runtime.check(model, features)?;
    let mut jac = vec![vec![0.0; model.n_qubits]; model.n_params()];
    let mut theta = model.theta.clone();
    for (k, part) in runtime.plan().parts.iter().enumerate() {
        for layer in 0..model.n_layers {
            for q in part.qubit_offset..part.qubit_offset + part.n_qubits {
                for slot in [
                    2 * (layer * model.n_qubits + q),
                    2 * (layer * model.n_qubits + q) + 1,
                ] {
                    let base = theta[slot];
                    theta[slot] = base + FRAC_PI_2;
                    let plus = runtime.part_z(model, &theta, k, features)?;
                    theta[slot] = base - FRAC_PI_2;
                    let minus = runtime.part_z(model, &theta, k, features)?;
                    theta[slot] = base;
                    for (i, (p, m)) in plus.iter().zip(&minus).enumerate() {
                        jac[slot][part.qubit_offset + i] = 0.5 * (p - m);
                    }
                }
            }
        }
    }
    Ok(jac)
}

/// Loss and gradient for one sample: readout terms analytically, circuit
/// angles through the parameter-shift Jacobian.
pub fn sample_gradient(
    model: &QnnModel,
    runtime: &ModelRuntime,
    features: &[f64],
    label: usize,
) -> Result<(f64, Gradient)> {
    let z = reconstruct(runtime.plan(), &runtime.part_expectations(model, features)?)?;
    let logits = model.logits(&z)?;
    let l = loss(&logits, label)?;
    let g_logit = loss_gradient(&logits, label)?;
    let mut grad = Gradient::zeros(model);
    for (c, g) in g_logit.iter().enumerate() {
        grad.bias[c] = *g;
        for (j, zj) in z.iter().enumerate() {
            grad.weights[c][j] = g * zj;
        }
    }
    let g_z: Vec<f64> = (0..model.n_qubits)
        .map(|j| {
            (0..model.n_classes)
                .map(|c| model.weights[c][j] * g_logit[c])
                .sum()
        })
        .collect();
    let jac = expectation_jacobian(model, runtime, features)?;
    for (gk, row) in grad.theta.iter_mut().zip(&jac) {
        *gk = row.iter().zip(&g_z).map(|(d, g)| d * g).sum();
    }
    Ok((l, grad))
}

/// Mean loss and mean gradient over a batch. Samples are evaluated in
/// parallel and reduced in batch order.
pub fn parameter_shift_grad(
    model: &QnnModel,
    runtime: &ModelRuntime,
    data: &Dataset,
    batch: &[usize],
) -> Result<(f64, Gradient)> {
    if batch.is_empty() {
        return Err(Error::InvalidParameter("empty batch".into()));
    }
    let per_sample = par::map_slice(batch, |&i| {
        sample_gradient(model, runtime, &data.features[i], data.labels[i])
    });
    let mut total = Gradient::zeros(model);
    let mut total_loss = 0.0;
    let s = 1.0 / batch.len() as f64;
    for r in per_sample {
        let (l, g) = r?;
        total_loss += l;
        total.add_scaled(&g, s);
    }
    Ok((total_loss * s, total))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 5,
            lr: 0.1,
            batch_size: 16,
            seed: 0,
        }
    }
}

/// Mini-batch SGD over `data`, reshuffled every epoch. Returns the mean
/// training loss of each epoch (measured before each batch update).
pub fn train_local(
    model: &mut QnnModel,
    runtime: &ModelRuntime,
    data: &Dataset,
    cfg: &TrainConfig,
) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::InvalidParameter("empty training set".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidParameter("batch size must be >= 1".into()));
    }
    if data.n_classes != model.n_classes {
        return Err(Error::DimensionMismatch(format!(
            "dataset has {} classes, model {}",
            data.n_classes, model.n_classes
        )));
    }
    let mut curve = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..data.len()).collect();
    for epoch in 0..cfg.epochs {
        order.sort_unstable();
        order.shuffle(&mut rng::rng(rng::derive(cfg.seed, &[epoch as u64])));
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let (l, g) = parameter_shift_grad(model, runtime, data, batch)?;
            epoch_loss += l * batch.len() as f64;
            if cfg.lr != 0.0 {
                for (t, d) in model.theta.iter_mut().zip(&g.theta) {
                    *t -= cfg.lr * d;
                }
                for (rw, rg) in model.weights.iter_mut().zip(&g.weights) {
                    for (w, d) in rw.iter_mut().zip(rg) {
                        *w -= cfg.lr * d;
                    }
                }
                for (b, d) in model.bias.iter_mut().zip(&g.bias) {
                    *b -= cfg.lr * d;
                }
            }
        }
        curve.push(epoch_loss / data.len() as f64);
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dqnn::PartitionPlan;

    #[test]
    fn single_qubit_shift_gradient_is_minus_sine() {
        let mut m = QnnModel::zeros(1, 1, 2).unwrap();
        let rt = ModelRuntime::ideal(PartitionPlan::whole("a", 1, 1)).unwrap();
        for theta in [0.3, 1.1, -2.0] {
            m.theta[0] = theta;
            let jac = expectation_jacobian(&m, &rt, &[0.0]).unwrap();
            assert!((jac[0][0] + theta.sin()).abs() < 1e-8);
            assert!(jac[1][0].abs() < 1e-12);
        }
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let mut m = QnnModel::new(2, 1, 2, 3).unwrap();
        let before = m.clone();
        let rt = ModelRuntime::ideal(PartitionPlan::whole("a", 2, 2)).unwrap();
        let data = Dataset::new(vec![vec![0.1, 0.2], vec![2.0, 3.0]], vec![0, 1], 2).unwrap();
        let cfg = TrainConfig {
            epochs: 2,
            lr: 0.0,
            batch_size: 16,
            seed: 1,
        };
        let curve = train_local(&mut m, &rt, &data, &cfg).unwrap();
        assert_eq!(m, before);
        assert_eq!(curve.len(), 2);
        assert_eq!(curve[0], curve[1]);
    }
}
