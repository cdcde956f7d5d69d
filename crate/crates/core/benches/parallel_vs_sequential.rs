use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cotforge_core::corpus::{lsh_dedup, DedupConfig, Document};
use cotforge_core::par::Executor;
use cotforge_core::simulator::{run_experiment, SimConfig};
use cotforge_core::verifier::grade;

fn executors() -> [(&'static str, Executor); 2] {
    [("sequential", Executor::sequential()), ("parallel", Executor::new(0))]
}

fn simulator(c: &mut Criterion) {
    let cfg = SimConfig {
        iterations: 5,
        ..SimConfig::default()
    };
    let mut group = c.benchmark_group("simulate_5_iters");
    group.sample_size(10);
    for (name, _) in executors() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let exec = if name == "parallel" { Executor::new(0) } else { Executor::sequential() };
                run_experiment(&cfg, exec).unwrap()
            })
        });
    }
    group.finish();
}

fn dedup(c: &mut Criterion) {
    let docs: Vec<Document> = (0..2000)
        .map(|i| {
            let text: Vec<String> = (0..120).map(|w| format!("t{}", (i / 3) * 7 + w)).collect();
            Document::new(format!("d{i:05}"), text.join(" "))
        })
        .collect();
    let cfg = DedupConfig::default();
    let mut group = c.benchmark_group("lsh_dedup_2000_docs");
    group.sample_size(10);
    for (name, exec) in executors() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| lsh_dedup(&docs, &cfg, &exec).unwrap()));
    }
    group.finish();
}

fn grading(c: &mut Criterion) {
    let cases: Vec<(String, String)> = (0..20_000)
        .map(|i| (format!("work... so \\boxed{{\\frac{{{}}}{{{}}}}}", i % 97, 1 + i % 13), format!("{}/{}", i % 89, 1 + i % 11)))
        .collect();
    let mut group = c.benchmark_group("grade_20000");
    for (name, exec) in executors() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| exec.map(&cases, |(r, g)| grade(r, g).1)));
    }
    group.finish();
}

criterion_group!(benches, simulator, dedup, grading);
criterion_main!(benches);
