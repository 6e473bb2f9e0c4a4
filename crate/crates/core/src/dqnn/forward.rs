use super::model::{QnnModel, Rot};
use super::partition::{Part, PartitionPlan};
use crate::error::{Error, Result};
use crate::mitigation::{mitigated_z, Mitigation};
use crate::noise::{CalibratedNoise, Executor, IdealNoise, NoiseModel};
use crate::sim::{Circuit, Gate};
use crate::topology::{find_device, DeviceProfile};

/// Circuit run on one block: RY encoding of its feature slice (folded
/// round-robin onto its qubits), then per layer RY and RZ on every qubit
/// and a CNOT ring.
pub fn part_circuit(
    model: &QnnModel,
    theta: &[f64],
    part: &Part,
    features: &[f64],
) -> Result<Circuit> {
    let n = part.n_qubits;
    let mut c = Circuit::new(n);
    let mut angles = vec![0.0; n];
    for (i, x) in features[part.features.clone()].iter().enumerate() {
        angles[i % n] += x;
    }
    for (q, a) in angles.into_iter().enumerate() {
        c.push(Gate::Ry(q, a))?;
    }
    for layer in 0..model.n_layers {
        for q in 0..n {
            let g = part.qubit_offset + q;
            c.push(Gate::Ry(q, theta[model.theta_index(layer, g, Rot::Y)]))?;
            c.push(Gate::Rz(q, theta[model.theta_index(layer, g, Rot::Z)]))?;
        }
        match n {
            1 => {}
            2 => c.push(Gate::Cnot {
                control: 0,
                target: 1,
            })?,
            _ => {
                for q in 0..n {
                    c.push(Gate::Cnot {
                        control: q,
                        target: (q + 1) % n,
                    })?;
                }
            }
        }
    }
    Ok(c)
}

struct PartExec {
    executor: Executor,
    inverted: Option<Executor>,
}

/// A plan bound to per-block executors and a mitigation strategy.
pub struct ModelRuntime {
    plan: PartitionPlan,
    parts: Vec<PartExec>,
    mitigation: Mitigation,
}

impl ModelRuntime {
    /// One noise model per block, in plan order.
    pub fn new(
        plan: PartitionPlan,
        models: &[&dyn NoiseModel],
        mitigation: Mitigation,
    ) -> Result<Self> {
        if models.len() != plan.parts.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} noise models for {} parts",
                models.len(),
                plan.parts.len()
            )));
        }
        if let Mitigation::Zne(cfg) = &mitigation {
            cfg.validate()?;
        }
        let parts = plan
            .parts
            .iter()
            .zip(models)
            .map(|(p, m)| {
                let executor = Executor::new(*m, p.n_qubits)?;
                let inverted = match mitigation {
                    Mitigation::Pec => Some(executor.with_noise_inversion()?),
                    _ => None,
                };
                Ok(PartExec { executor, inverted })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            plan,
            parts,
            mitigation,
        })
    }

    pub fn ideal(plan: PartitionPlan) -> Result<Self> {
        let models: Vec<&dyn NoiseModel> = plan
            .parts
            .iter()
            .map(|_| &IdealNoise as &dyn NoiseModel)
            .collect();
        Self::new(plan, &models, Mitigation::None)
    }

    /// Each block runs under its device's calibration restricted to the
    /// block's width.
    pub fn for_devices(
        plan: PartitionPlan,
        fleet: &[DeviceProfile],
        mitigation: Mitigation,
    ) -> Result<Self> {
        let models = plan
            .parts
            .iter()
            .map(|p| {
                let d = find_device(fleet, &p.device_id)?;
                if p.n_qubits > d.capacity {
                    return Err(Error::Partition(format!(
                        "{} qubits assigned to {} with capacity {}",
                        p.n_qubits, d.id, d.capacity
                    )));
                }
                CalibratedNoise::new(d.calibration.truncated(p.n_qubits)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&dyn NoiseModel> = models.iter().map(|m| m as &dyn NoiseModel).collect();
        Self::new(plan, &refs, mitigation)
    }

    pub fn plan(&self) -> &PartitionPlan {
        &self.plan
    }

    pub fn mitigation(&self) -> &Mitigation {
        &self.mitigation
    }

    pub(crate) fn check(&self, model: &QnnModel, features: &[f64]) -> Result<()> {
        if self.plan.n_qubits() != model.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "plan covers {} qubits, model has {}",
                self.plan.n_qubits(),
                model.n_qubits
            )));
        }
        if features.len() != self.plan.n_features() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} features, got {}",
                self.plan.n_features(),
                features.len()
            )));
        }
        Ok(())
    }

    /// (Mitigated) `<Z>` of block `k` with angles `theta`.
    pub(crate) fn part_z(
        &self,
        model: &QnnModel,
        theta: &[f64],
        k: usize,
        features: &[f64],
    ) -> Result<Vec<f64>> {
        let part = &self.plan.parts[k];
        let c = part_circuit(model, theta, part, features)?;
        let exec = &self.parts[k];
        mitigated_z(&exec.executor, exec.inverted.as_ref(), &self.mitigation, &c)
    }

    /// Per-block expectation vectors in plan order.
    pub fn part_expectations(&self, model: &QnnModel, features: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check(model, features)?;
        (0..self.parts.len())
            .map(|k| self.part_z(model, &model.theta, k, features))
            .collect()
    }
}

/// Output of a forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Forward {
    pub expectations: Vec<f64>,
    pub logits: Vec<f64>,
}

pub fn forward(model: &QnnModel, runtime: &ModelRuntime, features: &[f64]) -> Result<Forward> {
    let parts = runtime.part_expectations(model, features)?;
    let expectations = reconstruct(runtime.plan(), &parts)?;
    let logits = model.logits(&expectations)?;
    Ok(Forward {
        expectations,
        logits,
    })
}

/// Concatenates per-block expectations in plan order.
pub fn reconstruct(plan: &PartitionPlan, parts: &[Vec<f64>]) -> Result<Vec<f64>> {
    if parts.len() != plan.parts.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} part outputs for {} parts",
            parts.len(),
            plan.parts.len()
        )));
    }
    for (p, v) in plan.parts.iter().zip(parts) {
        if v.len() != p.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "part {} produced {} values, expected {}",
                p.device_id,
                v.len(),
                p.n_qubits
            )));
        }
    }
    Ok(parts.concat())
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Softmax cross-entropy of `label`.
pub fn loss(logits: &[f64], label: usize) -> Result<f64> {
    if label >= logits.len() {
        return Err(Error::LabelOutOfRange {
            label,
            classes: logits.len(),
        });
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    Ok((lse - logits[label]).max(0.0))
}

/// `softmax(logits) - onehot(label)`.
pub fn loss_gradient(logits: &[f64], label: usize) -> Result<Vec<f64>> {
    if label >= logits.len() {
        return Err(Error::LabelOutOfRange {
            label,
            classes: logits.len(),
        });
    }
    let mut g = softmax(logits);
    g[label] -= 1.0;
    Ok(g)
}

/// Index of the largest logit; ties go to the lower class.
pub fn predict(logits: &[f64]) -> usize {
    let mut best = 0;
    for (i, l) in logits.iter().enumerate() {
        if *l > logits[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dqnn::{partition_circuit, PartitionType};
    use crate::noise::{ChannelKind, UniformNoise};

    #[test]
    fn zero_model_reads_plus_one() {
        let m = QnnModel::zeros(3, 2, 2).unwrap();
        let rt = ModelRuntime::ideal(PartitionPlan::whole("a", 3, 3)).unwrap();
        let f = forward(&m, &rt, &[0.0; 3]).unwrap();
        for z in f.expectations {
            assert!((z - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn depolarizing_contracts_expectations() {
        let m = QnnModel::new(3, 2, 2, 4).unwrap();
        let plan = PartitionPlan::whole("a", 3, 3);
        let x = [0.3, 1.2, 2.5];
        let mut prev: Option<Vec<f64>> = None;
        for p in [0.0, 0.05, 0.1] {
            let model = UniformNoise::new(ChannelKind::Depolarizing.channel(p).unwrap()).unwrap();
            let rt = ModelRuntime::new(plan.clone(), &[&model], Mitigation::None).unwrap();
            let z = forward(&m, &rt, &x).unwrap().expectations;
            if let Some(prev) = &prev {
                for (a, b) in z.iter().zip(prev) {
                    assert!(a.abs() <= b.abs() + 1e-10);
                }
            }
            prev = Some(z);
        }
    }

    #[test]
    fn losses() {
        assert!(loss(&[50.0, 0.0], 0).unwrap() < 1e-20);
        assert!((loss(&[0.3, 0.3], 1).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(loss(&[0.0, 0.0], 2).is_err());
        assert_eq!(loss_gradient(&[0.0, 0.0], 0).unwrap(), vec![-0.5, 0.5]);
        assert_eq!(predict(&[0.2, 0.2, 0.1]), 0);
    }

    #[test]
    fn reconstruct_concatenates() {
        let plan = partition_circuit(
            3,
            3,
            &[("a".into(), 1), ("b".into(), 2)],
            PartitionType::Asym,
        )
        .unwrap();
        assert_eq!(plan.widths(), vec![1, 2]);
        assert_eq!(
            reconstruct(&plan, &[vec![1.0], vec![2.0, 3.0]]).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        assert!(reconstruct(&plan, &[vec![1.0, 2.0], vec![3.0]]).is_err());
    }
}
