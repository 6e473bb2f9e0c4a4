//! Rayon pool against a single-thread pool on the hot training paths. The
//! single-thread pool runs the same code as the sequential build.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nacqfl::dqnn::{parameter_shift_grad, ModelRuntime, PartitionPlan, QnnModel};
use nacqfl::federation::evaluate;
use nacqfl::harness::{benchmark_dataset, generate_dataset};
use rayon::ThreadPoolBuilder;

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let default = ThreadPoolBuilder::new().build().expect("default pool");
    let label = format!("rayon-{}", default.current_num_threads());
    vec![
        (
            "sequential".into(),
            ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .expect("single pool"),
        ),
        (label, default),
    ]
}

fn training(c: &mut Criterion) {
    let data = generate_dataset(&benchmark_dataset(0)).expect("dataset");
    let model = QnnModel::new(4, 2, 2, 1).expect("model");
    let runtime = ModelRuntime::ideal(PartitionPlan::whole("bench", 4, 4)).expect("runtime");
    let batch: Vec<usize> = (0..32).collect();

    let mut group = c.benchmark_group("parameter_shift_grad");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter(|| {
                pool.install(|| {
                    parameter_shift_grad(&model, &runtime, &data.train, &batch).expect("grad")
                })
            })
        });
    }
    group.finish();

    let mut group = c.benchmark_group("evaluate");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter(|| pool.install(|| evaluate(&model, &runtime, &data.test).expect("evaluate")))
        });
    }
    group.finish();
}

criterion_group!(benches, training);
criterion_main!(benches);
