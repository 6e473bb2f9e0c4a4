use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::aggregate::{fedavg, normalize_weights};
use super::metrics::{classification_metrics, evaluate, Metrics};
use super::transmit::transmit_params;
use crate::dqnn::{
    forward, partition_circuit, predict, train_local, ModelRuntime, PartitionPlan, PartitionType,
    QnnModel, TrainConfig,
};
use crate::error::{Error, Result};
use crate::harness::{Dataset, ShardMode, Splits};
use crate::mitigation::Mitigation;
use crate::noise::{ChannelSpec, NoiseWeights};
use crate::selection::{
    greedy_select, random_select, SelectionParams, SelectionProblem, SelectionResult,
};
use crate::topology::{
    cluster_fleet, find_device, fleet_noise, Cluster, ClusteringParams, DeviceProfile,
};
use crate::{par, rng};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    /// Noise-aware greedy selection.
    #[default]
    Na,
    /// Seeded random prefix until the constraints are met.
    Random,
}

/// Everything a federated run needs besides the fleet and data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FederationConfig {
    pub n_clusters: usize,
    /// Training stops once global accuracy exceeds this.
    pub accuracy_threshold: f64,
    pub max_rounds: usize,
    /// `model_capacity` is the model's qubit count; `data_dim` its input width.
    pub selection: SelectionParams,
    pub selection_method: SelectionMethod,
    pub partition: PartitionType,
    pub mitigation: Mitigation,
    /// Link noise applied to the angles on download and upload.
    pub channel: ChannelSpec,
    pub n_layers: usize,
    pub local_epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    /// Training samples given to each cluster.
    pub shard_size: usize,
    pub shard_mode: ShardMode,
    pub clustering: ClusteringParams,
    pub noise_weights: NoiseWeights,
    /// Repeat selection and partitioning every round.
    pub reselect_each_round: bool,
    pub seed: u64,
}

impl Default for FederationConfig {
    fn default() -> Self {
        Self {
            n_clusters: 3,
            accuracy_threshold: 0.95,
            max_rounds: 5,
            selection: SelectionParams {
                model_capacity: 4,
                noise_threshold: 0.5,
                parallel_limit: 2,
                data_dim: 4,
                device_limit: 3,
            },
            selection_method: SelectionMethod::Na,
            partition: PartitionType::Sym,
            mitigation: Mitigation::None,
            channel: ChannelSpec::none(),
            n_layers: 2,
            local_epochs: 2,
            lr: 0.1,
            batch_size: 16,
            shard_size: 48,
            shard_mode: ShardMode::Iid,
            clustering: ClusteringParams::default(),
            noise_weights: NoiseWeights::default(),
            reselect_each_round: false,
            seed: 0,
        }
    }
}

impl FederationConfig {
    pub fn validate(&self) -> Result<()> {
        self.selection.validate()?;
        if self.n_clusters == 0 || self.max_rounds == 0 {
            return Err(Error::InvalidParameter(
                "need at least one cluster and one round".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.accuracy_threshold) {
            return Err(Error::InvalidParameter(format!(
                "accuracy threshold {} outside [0, 1]",
                self.accuracy_threshold
            )));
        }
        if self.selection.model_capacity == 0 || self.n_layers == 0 {
            return Err(Error::InvalidParameter(
                "model needs at least one qubit and one layer".into(),
            ));
        }
        if self.batch_size == 0 || self.shard_size == 0 {
            return Err(Error::InvalidParameter(
                "batch and shard sizes must be >= 1".into(),
            ));
        }
        if self.lr.is_nan() || self.lr < 0.0 {
            return Err(Error::InvalidParameter("learning rate must be >= 0".into()));
        }
        if let Mitigation::Zne(cfg) = &self.mitigation {
            cfg.validate()?;
        }
        Ok(())
    }
}

/// A cluster with its selected devices and partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterSetup {
    pub cluster: Cluster,
    pub selection: SelectionResult,
    pub plan: PartitionPlan,
}

/// Clusters the fleet, selects devices in each cluster and partitions the
/// model over them. Fails on the first infeasible cluster.
pub fn prepare_clusters(
    config: &FederationConfig,
    fleet: &[DeviceProfile],
) -> Result<Vec<ClusterSetup>> {
    config.validate()?;
    let noise: std::collections::BTreeMap<String, f64> = fleet_noise(fleet, &config.noise_weights)?
        .into_iter()
        .map(|(id, b)| (id, b.n_eff))
        .collect();
    let clusters = cluster_fleet(
        fleet,
        config.n_clusters,
        rng::derive(config.seed, &[rng::tag("cluster")]),
        &config.clustering,
    )?;
    clusters
        .into_iter()
        .enumerate()
        .map(|(k, cluster)| {
            let problem = SelectionProblem::for_cluster(&cluster, fleet, &noise, config.selection)?;
            let selection = match config.selection_method {
                SelectionMethod::Na => greedy_select(&problem),
                SelectionMethod::Random => random_select(
                    &problem,
                    rng::derive(config.seed, &[rng::tag("select"), k as u64]),
                ),
            };
            if !selection.feasible {
                return Err(Error::Infeasible(selection.violations.clone()));
            }
            let devices = selection
                .selected
                .iter()
                .map(|id| Ok((id.clone(), find_device(fleet, id)?.capacity)))
                .collect::<Result<Vec<_>>>()?;
            let plan = partition_circuit(
                config.selection.model_capacity,
                config.selection.data_dim,
                &devices,
                config.partition,
            )?;
            Ok(ClusterSetup {
                cluster,
                selection,
                plan,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub cluster_id: String,
    /// Final-epoch training loss.
    pub loss: f64,
    /// Local model on its own shard.
    pub accuracy: f64,
    pub f1: f64,
    /// Angles plus readout sent down and back up.
    pub params_transferred: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub clusters: Vec<ClusterRecord>,
    /// Aggregated model on the test set, evaluated noiselessly under each
    /// cluster's plan and averaged with the aggregation weights.
    pub global: Metrics,
    pub params_transferred: usize,
    /// Angles that decoded from a fully mixed state this round.
    pub degenerate_params: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FederationOutcome {
    /// Best global model seen.
    pub model: QnnModel,
    pub best_round: usize,
    pub best: Metrics,
    pub history: Vec<RoundRecord>,
    pub setups: Vec<ClusterSetup>,
    /// Normalised aggregation weights in cluster order.
    pub weights: Vec<f64>,
}

impl FederationOutcome {
    /// First round whose global accuracy reached `target`.
    pub fn rounds_to(&self, target: f64) -> Option<usize> {
        self.history
            .iter()
            .find(|r| r.global.accuracy >= target)
            .map(|r| r.round)
    }
}

struct ClusterState {
    runtime: ModelRuntime,
    shard: Dataset,
}

struct LocalResult {
    theta: Vec<f64>,
    readout: Vec<f64>,
    record: ClusterRecord,
    degenerate: usize,
}

fn local_round(
    config: &FederationConfig,
    global: &QnnModel,
    state: &ClusterState,
    cluster_id: &str,
    round: usize,
    k: usize,
) -> Result<LocalResult> {
    let mut local = global.clone();
    let down = transmit_params(&global.theta, &config.channel)?;
    local.theta = down.params;
    let train = TrainConfig {
        epochs: config.local_epochs,
        lr: config.lr,
        batch_size: config.batch_size,
        seed: rng::derive(config.seed, &[rng::tag("train"), round as u64, k as u64]),
    };
    let curve = train_local(&mut local, &state.runtime, &state.shard, &train)?;
    let mut preds = Vec::with_capacity(state.shard.len());
    for x in &state.shard.features {
        preds.push(predict(&forward(&local, &state.runtime, x)?.logits));
    }
    let (accuracy, f1) = classification_metrics(&preds, &state.shard.labels, state.shard.n_classes);
    let up = transmit_params(&local.theta, &config.channel)?;
    let sent = 2 * (global.n_params() + global.readout_flat().len());
    Ok(LocalResult {
        theta: up.params,
        readout: local.readout_flat(),
        record: ClusterRecord {
            cluster_id: cluster_id.to_string(),
            loss: curve.last().copied().unwrap_or(f64::NAN),
            accuracy,
            f1,
            params_transferred: sent,
        },
        degenerate: down.degenerate.len() + up.degenerate.len(),
    })
}

/// Server-side evaluation: the aggregated model run noiselessly under each
/// cluster's partition plan, averaged with the aggregation weights.
fn global_metrics(
    model: &QnnModel,
    setups: &[ClusterSetup],
    weights: &[f64],
    test: &Dataset,
) -> Result<Metrics> {
    let mut m = Metrics::default();
    let mut seen: Vec<(&PartitionPlan, Metrics)> = Vec::new();
    for (s, w) in setups.iter().zip(weights) {
        let e = match seen.iter().find(|(p, _)| {
            p.widths() == s.plan.widths()
                && p.parts
                    .iter()
                    .zip(&s.plan.parts)
                    .all(|(a, b)| a.features == b.features)
        }) {
            Some((_, e)) => *e,
            None => {
                let e = evaluate(model, &ModelRuntime::ideal(s.plan.clone())?, test)?;
                seen.push((&s.plan, e));
                e
            }
        };
        m.loss += w * e.loss;
        m.accuracy += w * e.accuracy;
        m.macro_f1 += w * e.macro_f1;
    }
    Ok(m)
}

/// Runs rounds until global test accuracy exceeds the threshold or the
/// round budget is spent. Each round: send the global angles through the
/// link, train every cluster on its shard, send the angles back, average
/// with quantum-volume weights, evaluate.
pub fn run_federation(
    config: &FederationConfig,
    fleet: &[DeviceProfile],
    data: &Splits,
) -> Result<FederationOutcome> {
    let mut setups = prepare_clusters(config, fleet)?;
    let train = &data.train;
    if train.n_features() != config.selection.data_dim {
        return Err(Error::DimensionMismatch(format!(
            "dataset has {} features, config data_dim is {}",
            train.n_features(),
            config.selection.data_dim
        )));
    }
    let shards = train.shards(
        setups.len(),
        config.shard_size,
        config.shard_mode,
        rng::derive(config.seed, &[rng::tag("shards")]),
    )?;
    let build = |setups: &[ClusterSetup]| -> Result<Vec<ClusterState>> {
        setups
            .iter()
            .zip(&shards)
            .map(|(s, shard)| {
                Ok(ClusterState {
                    runtime: ModelRuntime::for_devices(
                        s.plan.clone(),
                        fleet,
                        config.mitigation.clone(),
                    )?,
                    shard: shard.clone(),
                })
            })
            .collect()
    };
    let mut states = build(&setups)?;
    let qv_weights = |setups: &[ClusterSetup]| {
        normalize_weights(
            &setups
                .iter()
                .map(|s| s.selection.avg_quantum_volume)
                .collect::<Vec<_>>(),
        )
    };
    let mut weights = qv_weights(&setups)?;

    let mut global = QnnModel::new(
        config.selection.model_capacity,
        config.n_layers,
        train.n_classes,
        rng::derive(config.seed, &[rng::tag("init")]),
    )?;
    let mut history = Vec::new();
    let mut best: Option<(usize, Metrics, QnnModel)> = None;
    for round in 1..=config.max_rounds {
        if config.reselect_each_round && round > 1 {
            setups = prepare_clusters(config, fleet)?;
            states = build(&setups)?;
            weights = qv_weights(&setups)?;
        }
        let results = par::map_range(states.len(), |k| {
            local_round(config, &global, &states[k], &setups[k].cluster.id, round, k)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let thetas: Vec<Vec<f64>> = results.iter().map(|r| r.theta.clone()).collect();
        let readouts: Vec<Vec<f64>> = results.iter().map(|r| r.readout.clone()).collect();
        global.theta = fedavg(&thetas, &weights)?;
        global.set_readout_flat(&fedavg(&readouts, &weights)?)?;
        let metrics = global_metrics(&global, &setups, &weights, &data.test)?;
        let record = RoundRecord {
            round,
            params_transferred: results.iter().map(|r| r.record.params_transferred).sum(),
            degenerate_params: results.iter().map(|r| r.degenerate).sum(),
            clusters: results.into_iter().map(|r| r.record).collect(),
            global: metrics,
        };
        history.push(record);
        if best
            .as_ref()
            .is_none_or(|(_, m, _)| metrics.accuracy > m.accuracy)
        {
            best = Some((round, metrics, global.clone()));
        }
        if metrics.accuracy > config.accuracy_threshold {
            break;
        }
    }
    let (best_round, best, model) = best.expect("at least one round");
    Ok(FederationOutcome {
        model,
        best_round,
        best,
        history,
        setups,
        weights,
    })
}

/// History as CSV: one row per cluster per round plus a `global` row.
pub fn history_csv(history: &[RoundRecord]) -> String {
    let mut out = String::from("round,cluster_id,loss,accuracy,f1,params_transferred\n");
    for r in history {
        for c in &r.clusters {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.round, c.cluster_id, c.loss, c.accuracy, c.f1, c.params_transferred
            );
        }
        let _ = writeln!(
            out,
            "{},global,{},{},{},{}",
            r.round, r.global.loss, r.global.accuracy, r.global.macro_f1, r.params_transferred
        );
    }
    out
}
