use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::{generate_dataset, DataNoise, DataSource, DatasetSpec};
use crate::dqnn::PartitionType;
use crate::error::{Error, Result};
use crate::federation::{run_federation, FederationConfig, FederationOutcome, SelectionMethod};
use crate::mitigation::{Mitigation, ZneConfig};
use crate::par;
use crate::topology::DeviceProfile;

/// Clean two-class blob benchmark with four features in `[0, pi]`.
pub fn benchmark_dataset(seed: u64) -> DatasetSpec {
    DatasetSpec {
        source: DataSource::Blobs { separation: 4.0 },
        n_samples: 600,
        n_features: 4,
        n_classes: 2,
        noise: DataNoise::default(),
        splits: [0.7, 0.1, 0.2],
        seed,
    }
}

/// Noise used for the "noisy dataset" variants.
pub const BENCHMARK_DATA_NOISE: DataNoise = DataNoise {
    feature_sigma: 0.3,
    label_flip_prob: 0.1,
};

/// Three-cluster federation on the benchmark: 4-qubit, 2-layer model,
/// at least two devices per cluster, and small per-cluster shards (8
/// samples, 4 local epochs) so that each cluster alone is data-limited.
pub fn benchmark_config(seed: u64) -> FederationConfig {
    let mut c = FederationConfig::default();
    c.selection.noise_threshold = 1.0;
    c.lr = 0.3;
    c.local_epochs = 4;
    c.shard_size = 8;
    c.max_rounds = 10;
    c.seed = seed;
    c
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Preset {
    S1,
    S2,
    S3,
    S4,
    S5,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::S1, Preset::S2, Preset::S3, Preset::S4, Preset::S5];

    pub fn description(self) -> &'static str {
        match self {
            Preset::S1 => "single device, unpartitioned",
            Preset::S2 => "one cluster, symmetric partitioning",
            Preset::S3 => "one cluster, asymmetric partitioning",
            Preset::S4 => "three clusters, symmetric partitioning",
            Preset::S5 => "three clusters, asymmetric partitioning",
        }
    }

    /// Applies the preset's structure (cluster count, partitioning, device
    /// limits) to `base`.
    pub fn apply(self, base: &FederationConfig) -> FederationConfig {
        let mut c = base.clone();
        match self {
            Preset::S1 => {
                c.n_clusters = 1;
                c.selection.device_limit = 1;
                c.selection.parallel_limit = c.selection.data_dim;
                c.partition = PartitionType::Sym;
            }
            Preset::S2 | Preset::S3 => c.n_clusters = 1,
            Preset::S4 | Preset::S5 => c.n_clusters = 3,
        }
        match self {
            Preset::S3 | Preset::S5 => c.partition = PartitionType::Asym,
            Preset::S2 | Preset::S4 => c.partition = PartitionType::Sym,
            Preset::S1 => {}
        }
        c
    }

    /// Method variants reported for the preset.
    pub fn variants(self, base: &FederationConfig) -> Vec<(String, FederationConfig)> {
        let c = self.apply(base);
        let with = |method: SelectionMethod, mitigation: Mitigation| {
            let mut v = c.clone();
            v.selection_method = method;
            v.mitigation = mitigation;
            v
        };
        let zne = Mitigation::Zne(ZneConfig::default());
        let (prefix, random) = match self {
            Preset::S1 => {
                return vec![
                    ("QNN".into(), with(SelectionMethod::Na, Mitigation::None)),
                    ("QNN(ZNE)".into(), with(SelectionMethod::Na, zne)),
                    (
                        "QNN(PEC)".into(),
                        with(SelectionMethod::Na, Mitigation::Pec),
                    ),
                ]
            }
            Preset::S2 | Preset::S3 => ("DQNN", true),
            Preset::S4 | Preset::S5 => ("FedAvg", true),
        };
        let mut out = Vec::new();
        if random {
            out.push((
                format!("{prefix}(R)"),
                with(SelectionMethod::Random, Mitigation::None),
            ));
        }
        out.push((
            format!("{prefix}(NA)"),
            with(SelectionMethod::Na, Mitigation::None),
        ));
        out.push((format!("{prefix}(NA+ZNE)"), with(SelectionMethod::Na, zne)));
        out
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// One run of one variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRow {
    pub variant: String,
    pub seed: u64,
    pub accuracy: f64,
    pub f1: f64,
    pub rounds: usize,
}

/// Mean and sample standard deviation over seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub variant: String,
    pub runs: usize,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub f1_mean: f64,
    pub f1_std: f64,
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Groups rows by variant (first-appearance order) and summarises them.
pub fn summarize(rows: &[SeedRow]) -> Vec<SummaryRow> {
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.variant.as_str()) {
            names.push(&r.variant);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let acc: Vec<f64> = rows
                .iter()
                .filter(|r| r.variant == name)
                .map(|r| r.accuracy)
                .collect();
            let f1: Vec<f64> = rows
                .iter()
                .filter(|r| r.variant == name)
                .map(|r| r.f1)
                .collect();
            let (accuracy_mean, accuracy_std) = mean_std(&acc);
            let (f1_mean, f1_std) = mean_std(&f1);
            SummaryRow {
                variant: name.to_string(),
                runs: acc.len(),
                accuracy_mean,
                accuracy_std,
                f1_mean,
                f1_std,
            }
        })
        .collect()
}

pub fn seed_rows_csv(rows: &[SeedRow]) -> String {
    let mut out = String::from("variant,seed,accuracy,f1,rounds\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.variant, r.seed, r.accuracy, r.f1, r.rounds
        );
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("variant,runs,accuracy_mean,accuracy_std,f1_mean,f1_std\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.variant, r.runs, r.accuracy_mean, r.accuracy_std, r.f1_mean, r.f1_std
        );
    }
    out
}

/// Runs `config` on `data` regenerated with the run seed; the result is the
/// best global accuracy reached.
pub fn run_seeded(
    config: &FederationConfig,
    data: &DatasetSpec,
    fleet: &[DeviceProfile],
    seed: u64,
) -> Result<FederationOutcome> {
    let mut c = config.clone();
    c.seed = seed;
    let mut spec = data.clone();
    spec.seed = seed;
    run_federation(&c, fleet, &generate_dataset(&spec)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresetReport {
    pub preset: Preset,
    pub rows: Vec<SeedRow>,
    pub summary: Vec<SummaryRow>,
}

/// Every variant of `preset` over `seeds`; runs are independent and may
/// execute in parallel, rows come back in (variant, seed) order.
pub fn run_preset(
    preset: Preset,
    base: &FederationConfig,
    data: &DatasetSpec,
    fleet: &[DeviceProfile],
    seeds: &[u64],
) -> Result<PresetReport> {
    let variants = preset.variants(base);
    let cells: Vec<(usize, u64)> = (0..variants.len())
        .flat_map(|v| seeds.iter().map(move |&s| (v, s)))
        .collect();
    let rows = par::map_slice(&cells, |&(v, seed)| -> Result<SeedRow> {
        let (name, config) = &variants[v];
        let out = run_seeded(config, data, fleet, seed)?;
        Ok(SeedRow {
            variant: name.clone(),
            seed,
            accuracy: out.best.accuracy,
            f1: out.best.macro_f1,
            rounds: out.history.len(),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(PresetReport {
        preset,
        summary: summarize(&rows),
        rows,
    })
}
