//! Experiment harness: datasets, bundled device fixtures, presets and sweeps.

mod dataset;
mod fixtures;
mod presets;
mod sweep;

pub use dataset::{
    downsample, generate_dataset, read_idx_images, read_idx_labels, write_idx, DataNoise,
    DataSource, Dataset, DatasetSpec, IdxImages, ShardMode, Splits,
};
pub use fixtures::{bundled_fleet, bundled_fleet_json, synthetic_fleet, FLEET_SEED};
pub use presets::{
    benchmark_config, benchmark_dataset, mean_std, run_preset, run_seeded, seed_rows_csv,
    summarize, summary_csv, Preset, PresetReport, SeedRow, SummaryRow, BENCHMARK_DATA_NOISE,
};
pub use sweep::{
    channel_sweep_csv, cluster_sweep_config, cluster_sweep_csv, sweep_channel_noise,
    sweep_clusters, ChannelSweepRow, ChannelSweepSummary, ClusterSweepRow, ClusterSweepSummary,
    ROUNDS_TARGET,
};
