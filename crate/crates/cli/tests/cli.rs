use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nacqfl::harness::{write_idx, IdxImages};

fn nacqfl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nacqfl"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn cluster_then_select() {
    let dir = tempfile::tempdir().unwrap();
    let o = nacqfl(
        dir.path(),
        &[
            "cluster",
            "--n",
            "3",
            "--seed",
            "7",
            "--out",
            "clusters.json",
        ],
    );
    assert!(o.status.success(), "{o:?}");
    let clusters: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("clusters.json")).unwrap())
            .unwrap();
    assert_eq!(clusters.as_array().unwrap().len(), 3);

    let select = |extra: &[&str]| {
        let mut args = vec![
            "select",
            "--cluster",
            "clusters.json#C1",
            "--model-qubits",
            "4",
            "--plim",
            "2",
            "--dim",
            "4",
            "--max-devices",
            "3",
        ];
        args.extend_from_slice(extra);
        nacqfl(dir.path(), &args)
    };
    let o = select(&["--delta", "1.0"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["feasible"], true);
    let o = select(&["--delta", "1.0", "--oracle"]);
    let oracle: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(
        oracle["aggregate_noise"].as_f64().unwrap()
            <= r["aggregate_noise"].as_f64().unwrap() + 1e-12
    );
    assert_eq!(select(&["--delta", "0.0001"]).status.code(), Some(3));
    assert_eq!(select(&["--delta", "-1"]).status.code(), Some(2));
}

#[test]
fn federate_writes_history_csv() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.json"),
        r#"{"n_clusters": 2, "max_rounds": 2, "accuracy_threshold": 1.0}"#,
    )
    .unwrap();
    let o = nacqfl(
        dir.path(),
        &["federate", "--config", "run.json", "--out", "history.csv"],
    );
    assert!(o.status.success(), "{o:?}");
    let csv = fs::read_to_string(dir.path().join("history.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "round,cluster_id,loss,accuracy,f1,params_transferred"
    );
    assert_eq!(lines.len(), 1 + 2 * 3);
    assert_eq!(lines.iter().filter(|l| l.contains(",global,")).count(), 2);

    let again = nacqfl(dir.path(), &["federate", "--config", "run.json"]);
    assert_eq!(stdout(&again), csv);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), r#"{"n_clusters": "three"}"#).unwrap();
    assert_eq!(
        nacqfl(dir.path(), &["federate", "--config", "bad.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        nacqfl(dir.path(), &["federate", "--config", "missing.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(nacqfl(dir.path(), &["preset", "S9"]).status.code(), Some(2));
    assert_eq!(nacqfl(dir.path(), &["no-such-verb"]).status.code(), Some(2));
}

#[test]
fn mitigation_bench_csv() {
    let dir = tempfile::tempdir().unwrap();
    for method in ["zne", "pec"] {
        let o = nacqfl(
            dir.path(),
            &[
                "mitigate-bench",
                "--noise",
                "depolarizing:0.02",
                "--method",
                method,
                "--seed",
                "7",
            ],
        );
        assert!(o.status.success(), "{o:?}");
        let out = stdout(&o);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("method,ideal,raw,mitigated,abs_error"));
        let f: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(f[0], method);
        let v: Vec<f64> = f[1..].iter().map(|x| x.parse().unwrap()).collect();
        assert!((v[3] - (v[2] - v[0]).abs()).abs() < 1e-12);
        assert!(v[3] < (v[1] - v[0]).abs());
    }
    let o = nacqfl(
        dir.path(),
        &[
            "mitigate-bench",
            "--noise",
            "depolarizing",
            "--method",
            "zne",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn datasets_resolve_against_the_data_dir() {
    let data = tempfile::tempdir().unwrap();
    let images = IdxImages {
        count: 6,
        rows: 4,
        cols: 4,
        pixels: (0..96).map(|v| (v * 7 % 256) as u8).collect(),
    };
    let (img, lbl) = write_idx(&images, &[0, 1, 0, 1, 0, 1]);
    fs::write(data.path().join("img.idx"), img).unwrap();
    fs::write(data.path().join("lbl.idx"), lbl).unwrap();
    let work = tempfile::tempdir().unwrap();
    fs::write(
        work.path().join("spec.json"),
        r#"{"source": {"kind": "idx-digits", "images": "img.idx", "labels": "lbl.idx", "classes": [0, 1]},
            "n_samples": 6, "n_features": 4, "n_classes": 2, "splits": [0.5, 0.0, 0.5], "seed": 1}"#,
    )
    .unwrap();
    let run = |with_env: bool| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_nacqfl"));
        c.current_dir(work.path()).args([
            "make-dataset",
            "--spec",
            "spec.json",
            "--out-dir",
            "out",
        ]);
        if with_env {
            c.env("NACQFL_DATA_DIR", data.path());
        } else {
            c.env_remove("NACQFL_DATA_DIR");
        }
        c.output().unwrap()
    };
    assert_eq!(run(false).status.code(), Some(2));
    let o = run(true);
    assert!(o.status.success(), "{o:?}");
    let train = fs::read_to_string(work.path().join("out/train.csv")).unwrap();
    assert_eq!(train.lines().next(), Some("x0,x1,x2,x3,label"));
    let rows: usize = ["train", "val", "test"]
        .iter()
        .map(|f| {
            fs::read_to_string(work.path().join(format!("out/{f}.csv")))
                .unwrap()
                .lines()
                .count()
                - 1
        })
        .sum();
    assert_eq!(rows, 6);
}

#[test]
fn make_dataset_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = nacqfl(
            dir.path(),
            &[
                "make-dataset",
                "--samples",
                "60",
                "--seed",
                "3",
                "--out-dir",
                out,
            ],
        );
        assert!(o.status.success(), "{o:?}");
    }
    for f in ["train.csv", "val.csv", "test.csv"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(f)).unwrap(),
            fs::read(dir.path().join("b").join(f)).unwrap()
        );
    }
}

#[test]
fn train_saves_a_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let o = nacqfl(
        dir.path(),
        &[
            "train",
            "--devices",
            "A1,A2",
            "--epochs",
            "1",
            "--out",
            "model.json",
        ],
    );
    assert!(o.status.success(), "{o:?}");
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["devices"], serde_json::json!(["A1", "A2"]));
    assert!(report["test"]["accuracy"].as_f64().unwrap() > 0.5);
    let ckpt = nacqfl::dqnn::Checkpoint::load(dir.path().join("model.json")).unwrap();
    assert_eq!(ckpt.plan.n_qubits(), ckpt.model.n_qubits);
    assert_eq!(
        nacqfl(dir.path(), &["train", "--devices", "ZZ"])
            .status
            .code(),
        Some(2)
    );
}
