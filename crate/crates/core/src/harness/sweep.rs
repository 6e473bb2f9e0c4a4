use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::dataset::{DataNoise, DatasetSpec};
use super::presets::{mean_std, run_seeded};
use crate::error::{Error, Result};
use crate::federation::FederationConfig;
use crate::noise::{ChannelKind, ChannelSpec};
use crate::par;
use crate::topology::DeviceProfile;

/// Accuracy target for the rounds-to-target column.
pub const ROUNDS_TARGET: f64 = 0.9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterSweepRow {
    pub n_clusters: usize,
    pub seed: u64,
    pub accuracy: f64,
    /// First round at or above [`ROUNDS_TARGET`], or `max_rounds + 1`.
    pub rounds_to_target: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterSweepSummary {
    pub n_clusters: usize,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub rounds_mean: f64,
}

/// `base` with one device allowed to hold every feature, so that clusters
/// of a single device stay feasible at high cluster counts.
pub fn cluster_sweep_config(base: &FederationConfig) -> FederationConfig {
    let mut c = base.clone();
    c.selection.parallel_limit = c.selection.data_dim;
    c
}

/// Federation per cluster count and seed. Every cluster receives its own
/// shard, so more clusters means more training data per round.
pub fn sweep_clusters(
    base: &FederationConfig,
    data: &DatasetSpec,
    fleet: &[DeviceProfile],
    counts: &[usize],
    seeds: &[u64],
) -> Result<(Vec<ClusterSweepRow>, Vec<ClusterSweepSummary>)> {
    if let Some(&max) = counts.iter().max() {
        if max > fleet.len() {
            return Err(Error::InvalidParameter(format!(
                "{max} clusters requested from a fleet of {}",
                fleet.len()
            )));
        }
    }
    let cells: Vec<(usize, u64)> = counts
        .iter()
        .flat_map(|&k| seeds.iter().map(move |&s| (k, s)))
        .collect();
    let rows = par::map_slice(&cells, |&(k, seed)| -> Result<ClusterSweepRow> {
        let mut c = base.clone();
        c.n_clusters = k;
        let out = run_seeded(&c, data, fleet, seed)?;
        Ok(ClusterSweepRow {
            n_clusters: k,
            seed,
            accuracy: out.best.accuracy,
            rounds_to_target: out.rounds_to(ROUNDS_TARGET).unwrap_or(c.max_rounds + 1),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let summary = counts
        .iter()
        .map(|&k| {
            let acc: Vec<f64> = rows
                .iter()
                .filter(|r| r.n_clusters == k)
                .map(|r| r.accuracy)
                .collect();
            let rounds: Vec<f64> = rows
                .iter()
                .filter(|r| r.n_clusters == k)
                .map(|r| r.rounds_to_target as f64)
                .collect();
            let (accuracy_mean, accuracy_std) = mean_std(&acc);
            ClusterSweepSummary {
                n_clusters: k,
                accuracy_mean,
                accuracy_std,
                rounds_mean: mean_std(&rounds).0,
            }
        })
        .collect();
    Ok((rows, summary))
}

pub fn cluster_sweep_csv(rows: &[ClusterSweepRow]) -> String {
    let mut out = String::from("n_clusters,seed,accuracy,rounds_to_target\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.n_clusters, r.seed, r.accuracy, r.rounds_to_target
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSweepRow {
    pub kind: ChannelKind,
    pub intensity: f64,
    pub noisy_data: bool,
    pub seed: u64,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSweepSummary {
    pub kind: ChannelKind,
    pub intensity: f64,
    pub noisy_data: bool,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
}

/// Grid over link channel kind, intensity, and clean versus noisy data.
/// Rows are sorted by (kind, intensity, dataset, seed).
pub fn sweep_channel_noise(
    base: &FederationConfig,
    data: &DatasetSpec,
    data_noise: DataNoise,
    fleet: &[DeviceProfile],
    kinds: &[ChannelKind],
    intensities: &[f64],
    seeds: &[u64],
) -> Result<(Vec<ChannelSweepRow>, Vec<ChannelSweepSummary>)> {
    let mut groups = Vec::new();
    for &kind in kinds {
        for &p in intensities {
            for noisy in [false, true] {
                groups.push((kind, p, noisy));
            }
        }
    }
    let cells: Vec<((ChannelKind, f64, bool), u64)> = groups
        .iter()
        .flat_map(|&g| seeds.iter().map(move |&s| (g, s)))
        .collect();
    let mut rows = par::map_slice(
        &cells,
        |&((kind, p, noisy), seed)| -> Result<ChannelSweepRow> {
            let mut c = base.clone();
            c.channel = ChannelSpec::new(kind, p)?;
            let mut spec = data.clone();
            spec.noise = if noisy {
                data_noise
            } else {
                DataNoise::default()
            };
            let out = run_seeded(&c, &spec, fleet, seed)?;
            Ok(ChannelSweepRow {
                kind,
                intensity: p,
                noisy_data: noisy,
                seed,
                accuracy: out.best.accuracy,
            })
        },
    )
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        a.kind
            .cmp(&b.kind)
            .then(a.intensity.total_cmp(&b.intensity))
            .then(a.noisy_data.cmp(&b.noisy_data))
            .then(a.seed.cmp(&b.seed))
    });
    let summary = groups
        .iter()
        .map(|&(kind, intensity, noisy_data)| {
            let acc: Vec<f64> = rows
                .iter()
                .filter(|r| {
                    r.kind == kind && r.intensity == intensity && r.noisy_data == noisy_data
                })
                .map(|r| r.accuracy)
                .collect();
            let (accuracy_mean, accuracy_std) = mean_std(&acc);
            ChannelSweepSummary {
                kind,
                intensity,
                noisy_data,
                accuracy_mean,
                accuracy_std,
            }
        })
        .collect();
    Ok((rows, summary))
}

pub fn channel_sweep_csv(rows: &[ChannelSweepRow]) -> String {
    let mut out = String::from("kind,intensity,dataset,seed,accuracy\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.kind,
            r.intensity,
            if r.noisy_data { "noisy" } else { "clean" },
            r.seed,
            r.accuracy
        );
    }
    out
}
