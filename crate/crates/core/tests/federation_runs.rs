use std::f64::consts::PI;

use nacqfl::dqnn::{train_local, ModelRuntime, QnnModel, TrainConfig};
use nacqfl::federation::{
    classification_metrics, history_csv, prepare_clusters, run_federation, transmit_params,
    FederationConfig,
};
use nacqfl::harness::{
    benchmark_config, benchmark_dataset, bundled_fleet, generate_dataset, Splits,
};
use nacqfl::noise::{ChannelKind, ChannelSpec};
use nacqfl::{rng, Error};

fn small(clusters: usize, rounds: usize) -> (FederationConfig, Splits) {
    let mut cfg = benchmark_config(3);
    cfg.n_clusters = clusters;
    cfg.max_rounds = rounds;
    cfg.local_epochs = 2;
    (cfg, generate_dataset(&benchmark_dataset(3)).unwrap())
}

#[test]
fn zero_learning_rate_keeps_accuracy_flat() {
    let (mut cfg, data) = small(3, 3);
    cfg.lr = 0.0;
    cfg.accuracy_threshold = 1.0;
    let out = run_federation(&cfg, &bundled_fleet(), &data).unwrap();
    assert_eq!(out.history.len(), 3);
    let first = out.history[0].global;
    assert!(out.history.iter().all(|r| r.global == first));
}

#[test]
fn threshold_controls_the_round_count() {
    let (mut cfg, data) = small(1, 5);
    cfg.accuracy_threshold = 0.0;
    assert_eq!(
        run_federation(&cfg, &bundled_fleet(), &data)
            .unwrap()
            .history
            .len(),
        1
    );
    cfg.accuracy_threshold = 1.0;
    let out = run_federation(&cfg, &bundled_fleet(), &data).unwrap();
    assert_eq!(out.history.len(), 5);
    assert_eq!(
        out.history.iter().map(|r| r.round).collect::<Vec<_>>(),
        [1, 2, 3, 4, 5]
    );
}

#[test]
fn more_rounds_never_lower_the_reported_accuracy() {
    let (mut cfg, data) = small(3, 3);
    cfg.accuracy_threshold = 1.0;
    let short = run_federation(&cfg, &bundled_fleet(), &data).unwrap();
    cfg.max_rounds = 6;
    let long = run_federation(&cfg, &bundled_fleet(), &data).unwrap();
    assert_eq!(short.history[..], long.history[..3]);
    assert!(long.best.accuracy >= short.best.accuracy);
}

#[test]
fn single_cluster_round_is_local_training() {
    let (mut cfg, data) = small(1, 1);
    cfg.accuracy_threshold = 1.0;
    let fleet = bundled_fleet();
    let out = run_federation(&cfg, &fleet, &data).unwrap();
    assert_eq!(out.weights, [1.0]);

    let setup = &prepare_clusters(&cfg, &fleet).unwrap()[0];
    let shard = data
        .train
        .shards(
            1,
            cfg.shard_size,
            cfg.shard_mode,
            rng::derive(cfg.seed, &[rng::tag("shards")]),
        )
        .unwrap()
        .remove(0);
    let runtime =
        ModelRuntime::for_devices(setup.plan.clone(), &fleet, cfg.mitigation.clone()).unwrap();
    let mut model = QnnModel::new(
        cfg.selection.model_capacity,
        cfg.n_layers,
        data.train.n_classes,
        rng::derive(cfg.seed, &[rng::tag("init")]),
    )
    .unwrap();
    let train = TrainConfig {
        epochs: cfg.local_epochs,
        lr: cfg.lr,
        batch_size: cfg.batch_size,
        seed: rng::derive(cfg.seed, &[rng::tag("train"), 1, 0]),
    };
    train_local(&mut model, &runtime, &shard, &train).unwrap();
    assert_eq!(out.model, model);
}

#[test]
fn reruns_are_byte_identical() {
    let (cfg, data) = small(3, 2);
    let a = run_federation(&cfg, &bundled_fleet(), &data).unwrap();
    let b = run_federation(&cfg, &bundled_fleet(), &data).unwrap();
    assert_eq!(history_csv(&a.history), history_csv(&b.history));
    assert_eq!(a, b);
}

#[test]
fn bad_configs_are_rejected() {
    let (mut cfg, data) = small(1, 1);
    cfg.selection.noise_threshold = 1e-6;
    assert!(matches!(
        run_federation(&cfg, &bundled_fleet(), &data),
        Err(Error::Infeasible(_))
    ));
    let (mut cfg, data) = small(1, 1);
    cfg.selection.data_dim = 3;
    cfg.selection.parallel_limit = 3;
    assert!(matches!(
        run_federation(&cfg, &bundled_fleet(), &data),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn links_behave_at_the_extremes() {
    let theta = [-2.5, -0.3, 0.0, 0.8, 2.2];
    for kind in ChannelKind::NOISY {
        let t = transmit_params(&theta, &ChannelSpec::new(kind, 0.0).unwrap()).unwrap();
        assert!(
            t.params
                .iter()
                .zip(&theta)
                .all(|(a, b)| (a - b).abs() < 1e-10),
            "{}",
            kind.name()
        );
    }
    let flipped = transmit_params(
        &theta[3..],
        &ChannelSpec::new(ChannelKind::BitFlip, 0.5).unwrap(),
    )
    .unwrap();
    assert!(flipped.params.iter().all(|v| (v - PI / 2.0).abs() < 1e-12));
    let dephased = transmit_params(
        &[0.8, 2.2],
        &ChannelSpec::new(ChannelKind::PhaseFlip, 0.5).unwrap(),
    )
    .unwrap();
    assert!(dephased.params[0].abs() < 1e-12 && (dephased.params[1] - PI).abs() < 1e-12);
    let gone = transmit_params(
        &theta,
        &ChannelSpec::new(ChannelKind::Depolarizing, 1.0).unwrap(),
    )
    .unwrap();
    assert_eq!(gone.degenerate, [0, 1, 2, 3, 4]);
    assert!(gone.params.iter().all(|&v| v == 0.0));
}

#[test]
fn constant_predictor_scores_one_third_f1() {
    let labels = [0, 1, 0, 1, 0, 1];
    let (acc, f1) = classification_metrics(&[0; 6], &labels, 2);
    assert!((acc - 0.5).abs() < 1e-12);
    assert!((f1 - 1.0 / 3.0).abs() < 1e-12);
    let (acc, f1) = classification_metrics(&labels, &labels, 2);
    assert_eq!((acc, f1), (1.0, 1.0));
}
