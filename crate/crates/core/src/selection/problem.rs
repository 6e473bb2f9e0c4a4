use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{find_device, Cluster, DeviceProfile};

/// The four selection constraints, in checking order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Constraint {
    /// Selected qubits must cover the model.
    Capacity,
    /// Aggregate noise must not exceed the threshold.
    NoiseThreshold,
    /// Data dimension per device must not exceed the parallelisation limit.
    Parallelization,
    /// At most `device_limit` devices.
    DeviceLimit,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Constraint::Capacity => "capacity",
            Constraint::NoiseThreshold => "noise-threshold",
            Constraint::Parallelization => "parallelization",
            Constraint::DeviceLimit => "device-limit",
        };
        f.write_str(s)
    }
}

/// A device as seen by the selector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: String,
    pub capacity: usize,
    pub n_eff: f64,
    pub quantum_volume: u64,
}

/// Model-side parameters of a selection instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionParams {
    /// Qubits required by the model.
    pub model_capacity: usize,
    /// Bound on the aggregate noise.
    pub noise_threshold: f64,
    /// Maximum data dimensions handled by one device.
    pub parallel_limit: usize,
    pub data_dim: usize,
    /// Maximum number of selected devices.
    pub device_limit: usize,
}

impl SelectionParams {
    pub fn validate(&self) -> Result<()> {
        if self.noise_threshold.is_nan() || self.noise_threshold <= 0.0 {
            return Err(Error::InvalidParameter(
                "noise threshold must be > 0".into(),
            ));
        }
        if self.parallel_limit == 0 || self.device_limit == 0 || self.data_dim == 0 {
            return Err(Error::InvalidParameter(
                "parallel limit, device limit and data dimension must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionProblem {
    pub candidates: Vec<Candidate>,
    pub params: SelectionParams,
    /// Per-device weights in the aggregate; uniform `1/|selected|` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device_weights: Option<BTreeMap<String, f64>>,
}

/// A chosen subset and its scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Selected ids, in selection order.
    pub selected: Vec<String>,
    pub aggregate_noise: f64,
    pub avg_quantum_volume: f64,
    pub feasible: bool,
    pub violations: Vec<Constraint>,
    /// Subsets examined (exhaustive search only).
    #[serde(default)]
    pub subsets_enumerated: u64,
}

impl SelectionProblem {
    pub fn new(candidates: Vec<Candidate>, params: SelectionParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            candidates,
            params,
            device_weights: None,
        })
    }

    /// Instance over a cluster's members with precomputed noise scores.
    pub fn for_cluster(
        cluster: &Cluster,
        fleet: &[DeviceProfile],
        noise: &BTreeMap<String, f64>,
        params: SelectionParams,
    ) -> Result<Self> {
        let candidates = cluster
            .members
            .iter()
            .map(|id| {
                let d = find_device(fleet, id)?;
                let n_eff = *noise
                    .get(id)
                    .ok_or_else(|| Error::UnknownDevice(id.clone()))?;
                Ok(Candidate {
                    id: id.clone(),
                    capacity: d.capacity,
                    n_eff,
                    quantum_volume: d.quantum_volume,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(candidates, params)
    }

    pub fn candidate(&self, id: &str) -> Result<&Candidate> {
        self.candidates
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| Error::UnknownDevice(id.to_string()))
    }

    fn weight(&self, id: &str, k: usize) -> f64 {
        match &self.device_weights {
            Some(w) => w.get(id).copied().unwrap_or(0.0),
            None => 1.0 / k as f64,
        }
    }

    fn aggregate_of(&self, chosen: &[&Candidate]) -> f64 {
        let k = chosen.len();
        chosen.iter().map(|c| self.weight(&c.id, k) * c.n_eff).sum()
    }

    fn violations_of(&self, chosen: &[&Candidate]) -> Vec<Constraint> {
        let p = &self.params;
        let mut v = Vec::new();
        let capacity: usize = chosen.iter().map(|c| c.capacity).sum();
        if capacity < p.model_capacity {
            v.push(Constraint::Capacity);
        }
        if !chosen.is_empty() && self.aggregate_of(chosen) > p.noise_threshold {
            v.push(Constraint::NoiseThreshold);
        }
        // d / |S| <= P_lim, kept in integers
        if p.data_dim > p.parallel_limit * chosen.len() {
            v.push(Constraint::Parallelization);
        }
        if chosen.len() > p.device_limit {
            v.push(Constraint::DeviceLimit);
        }
        v
    }

    fn lookup(&self, selected: &[String]) -> Result<Vec<&Candidate>> {
        selected.iter().map(|id| self.candidate(id)).collect()
    }

    /// Feasibility of `selected` with each violated constraint listed.
    pub fn check_feasible(&self, selected: &[String]) -> Result<(bool, Vec<Constraint>)> {
        let v = self.violations_of(&self.lookup(selected)?);
        Ok((v.is_empty(), v))
    }

    pub(crate) fn result_for(
        &self,
        chosen: &[&Candidate],
        extra: &[Constraint],
    ) -> SelectionResult {
        let mut violations = self.violations_of(chosen);
        for c in extra {
            if !violations.contains(c) {
                violations.push(*c);
            }
        }
        violations.sort();
        let avg_qv = if chosen.is_empty() {
            0.0
        } else {
            chosen.iter().map(|c| c.quantum_volume as f64).sum::<f64>() / chosen.len() as f64
        };
        SelectionResult {
            selected: chosen.iter().map(|c| c.id.clone()).collect(),
            aggregate_noise: self.aggregate_of(chosen),
            avg_quantum_volume: avg_qv,
            feasible: violations.is_empty(),
            violations,
            subsets_enumerated: 0,
        }
    }

    /// Candidates sorted by `(n_eff, id)`.
    pub(crate) fn sorted_by_noise(&self) -> Vec<&Candidate> {
        let mut v: Vec<&Candidate> = self.candidates.iter().collect();
        v.sort_by(|a, b| a.n_eff.total_cmp(&b.n_eff).then_with(|| a.id.cmp(&b.id)));
        v
    }

    pub(crate) fn covers(&self, chosen: &[&Candidate]) -> bool {
        let v = self.violations_of(chosen);
        !v.contains(&Constraint::Capacity) && !v.contains(&Constraint::Parallelization)
    }
}

/// `sum_i w_i n_eff_i` over the selection (uniform weights: the mean).
pub fn aggregate_noise(n_effs: &[f64], weights: Option<&[f64]>) -> Result<f64> {
    if n_effs.is_empty() {
        return Err(Error::InvalidParameter(
            "aggregate noise of an empty selection".into(),
        ));
    }
    match weights {
        None => Ok(n_effs.iter().sum::<f64>() / n_effs.len() as f64),
        Some(w) if w.len() == n_effs.len() => Ok(n_effs.iter().zip(w).map(|(n, w)| n * w).sum()),
        Some(w) => Err(Error::DimensionMismatch(format!(
            "{} weights for {} devices",
            w.len(),
            n_effs.len()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(model: usize, d: usize, plim: usize) -> SelectionProblem {
        let candidates = [("a", 5, 0.1), ("b", 5, 0.2), ("c", 7, 0.3)]
            .iter()
            .map(|&(id, capacity, n_eff)| Candidate {
                id: id.into(),
                capacity,
                n_eff,
                quantum_volume: 8,
            })
            .collect();
        SelectionProblem::new(
            candidates,
            SelectionParams {
                model_capacity: model,
                noise_threshold: 1.0,
                parallel_limit: plim,
                data_dim: d,
                device_limit: 3,
            },
        )
        .unwrap()
    }

    #[test]
    fn aggregate_examples() {
        assert_eq!(aggregate_noise(&[0.3], None).unwrap(), 0.3);
        assert!((aggregate_noise(&[0.2, 0.4], None).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(aggregate_noise(&[0.0, 0.0], None).unwrap(), 0.0);
        assert!(aggregate_noise(&[], None).is_err());
    }

    #[test]
    fn constraint_checks() {
        let p = problem(8, 4, 4);
        assert_eq!(
            p.check_feasible(&["a".into(), "b".into()]).unwrap(),
            (true, vec![])
        );
        let p = problem(8, 16, 4);
        let (ok, v) = p.check_feasible(&["a".into(), "b".into()]).unwrap();
        assert!(!ok);
        assert_eq!(v, vec![Constraint::Parallelization]);
        let (ok, v) = p.check_feasible(&[]).unwrap();
        assert!(!ok);
        assert!(v.contains(&Constraint::Capacity));
    }
}
