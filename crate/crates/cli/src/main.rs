//! `nacqfl`: command-line front-end for the simulator.
//!
//! Exit codes: 0 on success, 2 for configuration or input errors, 3 when a
//! device selection is infeasible.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nacqfl::dqnn::{
    partition_circuit, train_local, Checkpoint, ModelRuntime, QnnModel, TrainConfig,
};
use nacqfl::federation::{
    evaluate, history_csv, prepare_clusters, run_federation, FederationConfig,
};
use nacqfl::harness::{
    benchmark_config, benchmark_dataset, bundled_fleet, channel_sweep_csv, cluster_sweep_config,
    cluster_sweep_csv, generate_dataset, run_preset, seed_rows_csv, summary_csv,
    sweep_channel_noise, sweep_clusters, DataNoise, DataSource, Dataset, DatasetSpec, Preset,
    BENCHMARK_DATA_NOISE,
};
use nacqfl::mitigation::{benchmark_row, BenchMethod, ZneConfig, DEFAULT_SHOTS};
use nacqfl::noise::{ChannelKind, ChannelSpec};
use nacqfl::selection::{
    brute_force_select, default_subset_cap, greedy_select, SelectionParams, SelectionProblem,
};
use nacqfl::topology::{
    cluster_fleet, fleet_noise, load_fleet, Cluster, ClusteringParams, DeviceProfile,
};

#[derive(Parser)]
#[command(
    name = "nacqfl",
    version,
    about = "Noise-aware clustered quantum federated learning simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Group a device fleet into clusters and elect their heads.
    Cluster(ClusterArgs),
    /// Pick low-noise devices inside one cluster.
    Select(SelectArgs),
    /// Train one partitioned model on a single device group.
    Train(TrainArgs),
    /// Run clustered federated training.
    Federate(FederateArgs),
    /// Run every method variant of an experiment preset.
    Preset(PresetArgs),
    /// Federation accuracy and rounds-to-target per cluster count.
    SweepClusters(SweepClustersArgs),
    /// Federation accuracy per link channel kind and intensity.
    SweepChannel(SweepChannelArgs),
    /// Mitigation on the fixed three-qubit benchmark circuit.
    MitigateBench(MitigateArgs),
    /// Write train/val/test CSV files for a dataset spec.
    MakeDataset(MakeDatasetArgs),
}

#[derive(Args)]
struct FleetArg {
    /// Fleet JSON (array of device profiles); the bundled fleet when omitted.
    #[arg(long)]
    fleet: Option<PathBuf>,
}

impl FleetArg {
    fn load(&self) -> Result<Vec<DeviceProfile>> {
        match &self.fleet {
            Some(p) => load_fleet(p).with_context(|| format!("loading fleet {}", p.display())),
            None => Ok(bundled_fleet()),
        }
    }
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    fleet: FleetArg,
    /// Number of clusters.
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Weight of geographic distance against link capacity.
    #[arg(long)]
    alpha: Option<f64>,
    /// Weight of link quality against classical resources in head election.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    fleet: FleetArg,
    /// `clusters.json#ID`, as written by `cluster`.
    #[arg(long)]
    cluster: String,
    #[arg(long)]
    model_qubits: usize,
    /// Noise threshold on the aggregate effective noise.
    #[arg(long)]
    delta: f64,
    /// Features one device may encode.
    #[arg(long)]
    plim: usize,
    /// Input dimension.
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    max_devices: usize,
    /// Exhaustive search instead of the greedy selector.
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunInputs {
    #[command(flatten)]
    fleet: FleetArg,
    /// Federation config JSON; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset spec JSON; the blob benchmark when omitted.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Overrides the seed of both config and dataset.
    #[arg(long)]
    seed: Option<u64>,
}

impl RunInputs {
    fn config(&self) -> Result<FederationConfig> {
        let mut c = match &self.config {
            Some(p) => read_json::<FederationConfig>(p)?,
            None => benchmark_config(0),
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        Ok(c)
    }

    fn dataset(&self, seed: u64) -> Result<DatasetSpec> {
        let mut spec = match &self.data {
            Some(p) => read_json::<DatasetSpec>(p)?,
            None => benchmark_dataset(seed),
        };
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        Ok(spec)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    inputs: RunInputs,
    /// Comma-separated device ids; the first cluster's selection when omitted.
    #[arg(long, value_delimiter = ',')]
    devices: Vec<String>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Checkpoint output (model and partition plan).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FederateArgs {
    #[command(flatten)]
    inputs: RunInputs,
    /// History CSV: one row per cluster per round plus a global row.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Full outcome (setups, weights, best model) as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SeedsArg {
    #[arg(long, value_delimiter = ',', default_values_t = [1u64, 2, 3, 4, 5])]
    seeds: Vec<u64>,
}

#[derive(Args)]
struct PresetArgs {
    /// S1 to S5.
    name: String,
    #[command(flatten)]
    inputs: RunInputs,
    #[command(flatten)]
    seeds: SeedsArg,
    /// Apply the benchmark feature noise and label flips to the dataset.
    #[arg(long)]
    noisy_data: bool,
    /// Summary CSV (mean and std per variant).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-seed CSV.
    #[arg(long)]
    rows: Option<PathBuf>,
}

#[derive(Args)]
struct SweepClustersArgs {
    #[command(flatten)]
    inputs: RunInputs,
    #[command(flatten)]
    seeds: SeedsArg,
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 3, 5, 7])]
    counts: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepChannelArgs {
    #[command(flatten)]
    inputs: RunInputs,
    #[command(flatten)]
    seeds: SeedsArg,
    #[arg(long, value_delimiter = ',', default_values_t = ["bitflip".to_string(), "phaseflip".into(), "depolarizing".into(), "ampdamp".into()])]
    kinds: Vec<String>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.01, 0.05, 0.1, 0.25])]
    intensities: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MitigationMethod {
    Zne,
    Pec,
}

#[derive(Args)]
struct MitigateArgs {
    /// Per-gate noise as `kind:p`.
    #[arg(long, default_value = "depolarizing:0.02")]
    noise: String,
    #[arg(long, value_enum)]
    method: MitigationMethod,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Shots per folded circuit (ZNE).
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    shots: usize,
    /// Quasi-probability samples (PEC).
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Blobs,
    Moons,
}

#[derive(Args)]
struct MakeDatasetArgs {
    /// Dataset spec JSON; overrides the flags below.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "blobs")]
    source: Source,
    #[arg(long, default_value_t = 600)]
    samples: usize,
    #[arg(long, default_value_t = 4)]
    features: usize,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    /// Blob centre distance, or moon jitter.
    #[arg(long, default_value_t = 4.0)]
    spread: f64,
    #[arg(long, default_value_t = 0.0)]
    feature_sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    label_flip: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving train.csv, val.csv and test.csv.
    #[arg(long)]
    out_dir: PathBuf,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn cmd_cluster(a: &ClusterArgs) -> Result<()> {
    let fleet = a.fleet.load()?;
    let mut params = ClusteringParams::default();
    params.alpha = a.alpha.unwrap_or(params.alpha);
    params.lambda = a.lambda.unwrap_or(params.lambda);
    let clusters = cluster_fleet(&fleet, a.n, a.seed, &params)?;
    emit(a.out.as_deref(), &pretty(&clusters)?)
}

fn cmd_select(a: &SelectArgs) -> Result<()> {
    let fleet = a.fleet.load()?;
    let (path, id) = a
        .cluster
        .split_once('#')
        .ok_or_else(|| anyhow!("--cluster must look like clusters.json#C1"))?;
    let clusters: Vec<Cluster> = read_json(Path::new(path))?;
    let cluster = clusters
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| anyhow!("no cluster `{id}` in {path}"))?;
    let noise: BTreeMap<String, f64> = fleet_noise(&fleet, &Default::default())?
        .into_iter()
        .map(|(k, b)| (k, b.n_eff))
        .collect();
    let params = SelectionParams {
        model_capacity: a.model_qubits,
        noise_threshold: a.delta,
        parallel_limit: a.plim,
        data_dim: a.dim,
        device_limit: a.max_devices,
    };
    let problem = SelectionProblem::for_cluster(cluster, &fleet, &noise, params)?;
    let result = if a.oracle {
        brute_force_select(&problem, default_subset_cap(&problem))?
    } else {
        greedy_select(&problem)
    };
    emit(a.out.as_deref(), &pretty(&result)?)?;
    if !result.feasible {
        bail!(nacqfl::Error::Infeasible(result.violations));
    }
    Ok(())
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let mut config = a.inputs.config()?;
    let fleet = a.inputs.fleet.load()?;
    let data = generate_dataset(&a.inputs.dataset(config.seed)?)?;
    if let Some(e) = a.epochs {
        config.local_epochs = e;
    }
    let plan = if a.devices.is_empty() {
        config.n_clusters = 1;
        prepare_clusters(&config, &fleet)?.remove(0).plan
    } else {
        let devices = a
            .devices
            .iter()
            .map(|id| {
                let d = fleet
                    .iter()
                    .find(|d| &d.id == id)
                    .ok_or_else(|| anyhow!("unknown device `{id}`"))?;
                Ok((d.id.clone(), d.capacity))
            })
            .collect::<Result<Vec<_>>>()?;
        partition_circuit(
            config.selection.model_capacity,
            data.train.n_features(),
            &devices,
            config.partition,
        )?
    };
    let runtime = ModelRuntime::for_devices(plan.clone(), &fleet, config.mitigation.clone())?;
    let mut model = QnnModel::new(
        config.selection.model_capacity,
        config.n_layers,
        data.train.n_classes,
        config.seed,
    )?;
    let curve = train_local(
        &mut model,
        &runtime,
        &data.train,
        &TrainConfig {
            epochs: config.local_epochs,
            lr: config.lr,
            batch_size: config.batch_size,
            seed: config.seed,
        },
    )?;
    let ideal = ModelRuntime::ideal(plan.clone())?;
    let report = serde_json::json!({
        "devices": plan.parts.iter().map(|p| &p.device_id).collect::<Vec<_>>(),
        "widths": plan.widths(),
        "loss_curve": curve,
        "train": evaluate(&model, &ideal, &data.train)?,
        "test": evaluate(&model, &ideal, &data.test)?,
    });
    print!("{}", pretty(&report)?);
    if let Some(out) = &a.out {
        Checkpoint { model, plan }.save(out)?;
    }
    Ok(())
}

fn cmd_federate(a: &FederateArgs) -> Result<()> {
    let config = a.inputs.config()?;
    let fleet = a.inputs.fleet.load()?;
    let data = generate_dataset(&a.inputs.dataset(config.seed)?)?;
    let outcome = run_federation(&config, &fleet, &data)?;
    emit(a.out.as_deref(), &history_csv(&outcome.history))?;
    if let Some(p) = &a.report {
        fs::write(p, pretty(&outcome)?).with_context(|| format!("writing {}", p.display()))?;
    }
    if a.out.is_some() {
        eprintln!(
            "best global accuracy {:.4} (macro F1 {:.4}) at round {} of {}",
            outcome.best.accuracy,
            outcome.best.macro_f1,
            outcome.best_round,
            outcome.history.len()
        );
    }
    Ok(())
}

fn cmd_preset(a: &PresetArgs) -> Result<()> {
    let preset: Preset = a.name.parse()?;
    let base = a.inputs.config()?;
    let mut data = a.inputs.dataset(base.seed)?;
    if a.noisy_data {
        data.noise = BENCHMARK_DATA_NOISE;
    }
    let report = run_preset(
        preset,
        &base,
        &data,
        &a.inputs.fleet.load()?,
        &a.seeds.seeds,
    )?;
    if let Some(p) = &a.rows {
        fs::write(p, seed_rows_csv(&report.rows))
            .with_context(|| format!("writing {}", p.display()))?;
    }
    emit(a.out.as_deref(), &summary_csv(&report.summary))
}

fn cmd_sweep_clusters(a: &SweepClustersArgs) -> Result<()> {
    let base = cluster_sweep_config(&a.inputs.config()?);
    let data = a.inputs.dataset(base.seed)?;
    let (rows, _) = sweep_clusters(
        &base,
        &data,
        &a.inputs.fleet.load()?,
        &a.counts,
        &a.seeds.seeds,
    )?;
    emit(a.out.as_deref(), &cluster_sweep_csv(&rows))
}

fn cmd_sweep_channel(a: &SweepChannelArgs) -> Result<()> {
    let base = a.inputs.config()?;
    let data = a.inputs.dataset(base.seed)?;
    let kinds = a
        .kinds
        .iter()
        .map(|k| k.parse())
        .collect::<nacqfl::Result<Vec<ChannelKind>>>()?;
    let noise = if data.noise.is_clean() {
        BENCHMARK_DATA_NOISE
    } else {
        data.noise
    };
    let (rows, _) = sweep_channel_noise(
        &base,
        &data,
        noise,
        &a.inputs.fleet.load()?,
        &kinds,
        &a.intensities,
        &a.seeds.seeds,
    )?;
    emit(a.out.as_deref(), &channel_sweep_csv(&rows))
}

fn cmd_mitigate(a: &MitigateArgs) -> Result<()> {
    let noise: ChannelSpec = a.noise.parse()?;
    let method = match a.method {
        MitigationMethod::Zne => BenchMethod::Zne {
            config: ZneConfig::default(),
            shots: a.shots,
        },
        MitigationMethod::Pec => BenchMethod::Pec { samples: a.samples },
    };
    let row = benchmark_row(&noise, &method, a.seed)?;
    let mut out = String::from("method,ideal,raw,mitigated,abs_error\n");
    writeln!(
        out,
        "{},{},{},{},{}",
        row.method, row.ideal, row.raw, row.mitigated, row.abs_error
    )?;
    emit(a.out.as_deref(), &out)
}

fn split_csv(d: &Dataset) -> String {
    let mut out = (0..d.n_features())
        .map(|j| format!("x{j},"))
        .collect::<String>()
        + "label\n";
    for (x, y) in d.features.iter().zip(&d.labels) {
        for v in x {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{y}");
    }
    out
}

fn cmd_make_dataset(a: &MakeDatasetArgs) -> Result<()> {
    let spec = match &a.spec {
        Some(p) => read_json(p)?,
        None => DatasetSpec {
            source: match a.source {
                Source::Blobs => DataSource::Blobs {
                    separation: a.spread,
                },
                Source::Moons => DataSource::Moons { jitter: a.spread },
            },
            n_samples: a.samples,
            n_features: a.features,
            n_classes: a.classes,
            noise: DataNoise {
                feature_sigma: a.feature_sigma,
                label_flip_prob: a.label_flip,
            },
            splits: [0.7, 0.1, 0.2],
            seed: a.seed,
        },
    };
    let splits = generate_dataset(&spec)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    for (name, d) in [
        ("train", &splits.train),
        ("val", &splits.val),
        ("test", &splits.test),
    ] {
        let path = a.out_dir.join(format!("{name}.csv"));
        fs::write(&path, split_csv(d)).with_context(|| format!("writing {}", path.display()))?;
    }
    fs::write(a.out_dir.join("spec.json"), pretty(&spec)?)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Cluster(a) => cmd_cluster(a),
        Command::Select(a) => cmd_select(a),
        Command::Train(a) => cmd_train(a),
        Command::Federate(a) => cmd_federate(a),
        Command::Preset(a) => cmd_preset(a),
        Command::SweepClusters(a) => cmd_sweep_clusters(a),
        Command::SweepChannel(a) => cmd_sweep_channel(a),
        Command::MitigateBench(a) => cmd_mitigate(a),
        Command::MakeDataset(a) => cmd_make_dataset(a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<nacqfl::Error>() {
        Some(nacqfl::Error::Infeasible(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
