use adw_core::averages::{Averager, Sampling};
use adw_core::par::Execution;
use adw_core::quantization::{assemble_generator, Grid};
use adw_core::symbols::{DampingDescriptor, Variant};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn two_strip() -> DampingDescriptor {
    DampingDescriptor::build_example(Variant::TwoStrip, 0.1, 0.1, 1.0).unwrap()
}

fn l_of_t(c: &mut Criterion) {
    let desc = two_strip();
    let sampling = Sampling::default();
    let mut group = c.benchmark_group("l_of_t");
    group.sample_size(20);
    for (name, exec) in MODES {
        let a = Averager::new(&desc).with_execution(exec);
        group.bench_function(BenchmarkId::new(name, "t=8"), |b| b.iter(|| a.l_of_t(black_box(8.0), &sampling).unwrap()));
    }
    group.finish();
}

fn agcc(c: &mut Criterion) {
    let desc = two_strip();
    let sampling = Sampling { n_x: 32, n_theta: 64, ..Default::default() };
    let mut group = c.benchmark_group("agcc");
    group.sample_size(10);
    for (name, exec) in MODES {
        let a = Averager::new(&desc).with_execution(exec);
        group.bench_function(name, |b| b.iter(|| a.agcc(0.5, 8.0, 0.01, &sampling).unwrap()));
    }
    group.finish();
}

fn generator(c: &mut Criterion) {
    let desc = two_strip();
    let mut group = c.benchmark_group("assemble_generator");
    group.sample_size(10);
    for (name, exec) in MODES {
        let grid = Grid::new(32).unwrap().with_execution(exec);
        group.bench_function(BenchmarkId::new(name, "n_max=6"), |b| b.iter(|| assemble_generator(&desc, 6, &grid).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, l_of_t, agcc, generator);
criterion_main!(benches);
