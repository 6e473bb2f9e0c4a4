use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PartitionType {
    /// Equal qubit counts, capacity permitting.
    #[default]
    Sym,
    /// Qubit counts proportional to device capacity.
    Asym,
}

impl fmt::Display for PartitionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartitionType::Sym => "SYM",
            PartitionType::Asym => "ASYM",
        })
    }
}

impl FromStr for PartitionType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SYM" => Ok(PartitionType::Sym),
            "ASYM" => Ok(PartitionType::Asym),
            other => Err(Error::InvalidParameter(format!(
                "unknown partition type `{other}`"
            ))),
        }
    }
}

/// Contiguous block of model qubits assigned to one device.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part {
    pub device_id: String,
    pub n_qubits: usize,
    /// First model qubit of the block.
    pub qubit_offset: usize,
    /// Input features encoded on this block.
    pub features: Range<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub p_type: PartitionType,
    pub parts: Vec<Part>,
}

impl PartitionPlan {
    /// Single block covering the whole model.
    pub fn whole(device_id: &str, n_qubits: usize, n_features: usize) -> Self {
        Self {
            p_type: PartitionType::Sym,
            parts: vec![Part {
                device_id: device_id.into(),
                n_qubits,
                qubit_offset: 0,
                features: 0..n_features,
            }],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.parts.iter().map(|p| p.n_qubits).sum()
    }

    pub fn n_features(&self) -> usize {
        self.parts.last().map_or(0, |p| p.features.end)
    }

    pub fn widths(&self) -> Vec<usize> {
        self.parts.iter().map(|p| p.n_qubits).collect()
    }

    /// Blocks must tile the model qubits and the feature range in order.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let (mut q, mut f) = (0, 0);
        for p in &self.parts {
            if p.n_qubits == 0 || p.qubit_offset != q || p.features.start != f || p.features.end < f
            {
                return Err(Error::Partition(format!(
                    "part {} does not tile the model",
                    p.device_id
                )));
            }
            q += p.n_qubits;
            f = p.features.end;
        }
        if q != n_qubits {
            return Err(Error::Partition(format!(
                "plan covers {q} of {n_qubits} qubits"
            )));
        }
        Ok(())
    }
}

/// Splits `n_qubits` model qubits over `devices` (`(id, capacity)`), which
/// are taken in id order. Features are split in proportion to block width.
pub fn partition_circuit(
    n_qubits: usize,
    n_features: usize,
    devices: &[(String, usize)],
    p_type: PartitionType,
) -> Result<PartitionPlan> {
    if devices.is_empty() {
        return Err(Error::Partition("no devices selected".into()));
    }
    if n_qubits == 0 {
        return Err(Error::Partition("model has no qubits".into()));
    }
    let mut devs = devices.to_vec();
    devs.sort_by(|a, b| a.0.cmp(&b.0));
    let total: usize = devs.iter().map(|d| d.1).sum();
    if total < n_qubits {
        return Err(Error::Partition(format!(
            "{n_qubits} qubits exceed the selected capacity {total}"
        )));
    }
    let counts = match p_type {
        PartitionType::Sym => water_fill(n_qubits, &devs),
        PartitionType::Asym => proportional(n_qubits, &devs),
    };
    let mut parts = Vec::new();
    let mut offset = 0;
    for ((id, _), n) in devs.iter().zip(counts) {
        if n == 0 {
            continue;
        }
        let features = n_features * offset / n_qubits..n_features * (offset + n) / n_qubits;
        parts.push(Part {
            device_id: id.clone(),
            n_qubits: n,
            qubit_offset: offset,
            features,
        });
        offset += n;
    }
    Ok(PartitionPlan { p_type, parts })
}

fn water_fill(n: usize, devs: &[(String, usize)]) -> Vec<usize> {
    let mut counts = vec![0; devs.len()];
    let mut left = n;
    while left > 0 {
        for (c, (_, cap)) in counts.iter_mut().zip(devs) {
            if left > 0 && *c < *cap {
                *c += 1;
                left -= 1;
            }
        }
    }
    counts
}

fn proportional(n: usize, devs: &[(String, usize)]) -> Vec<usize> {
    let k = devs.len();
    if n < k {
        // not every device can get a qubit: largest capacities first
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| devs[b].1.cmp(&devs[a].1).then(a.cmp(&b)));
        let mut counts = vec![0; k];
        for &i in &order[..n] {
            counts[i] = 1;
        }
        return counts;
    }
    let total: usize = devs.iter().map(|d| d.1).sum();
    let quota: Vec<f64> = devs
        .iter()
        .map(|d| n as f64 * d.1 as f64 / total as f64)
        .collect();
    let mut counts: Vec<usize> = quota.iter().map(|q| (q.floor() as usize).max(1)).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let fa = quota[a] - quota[a].floor();
        let fb = quota[b] - quota[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut assigned: usize = counts.iter().sum();
    for &i in order.iter().cycle() {
        if assigned >= n {
            break;
        }
        if counts[i] < devs[i].1 {
            counts[i] += 1;
            assigned += 1;
        }
    }
    // raising small quotas to one may overshoot; shave the largest blocks
    while assigned > n {
        let i = (0..k)
            .filter(|&i| counts[i] > 1)
            .max_by(|&a, &b| {
                (counts[a] as f64 - quota[a])
                    .total_cmp(&(counts[b] as f64 - quota[b]))
                    .then(b.cmp(&a))
            })
            .expect("n >= k leaves a block above one");
        counts[i] -= 1;
        assigned -= 1;
    }
    counts
}
