use capcone::equation::ConeParams;
use capcone::exec::Exec;
use capcone::integrate::Tolerance;
use capcone::shoot::{free_boundary_threshold, residual, scan_grid};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn residual_scan(c: &mut Criterion) {
    let p = ConeParams::new(5, 2).unwrap();
    let grid = scan_grid(&p);
    let mut group = c.benchmark_group("residual-scan");
    group.sample_size(20);
    for (name, exec) in [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| exec.map(&grid, |&t1| residual(&p, t1, 1.0).map(|r| r.r).ok()))
        });
    }
    group.finish();
}

fn threshold(c: &mut Criterion) {
    let p = ConeParams::new(4, 2).unwrap();
    let mut group = c.benchmark_group("free-boundary-threshold");
    group.sample_size(10);
    for (name, exec) in [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(free_boundary_threshold(&p, Tolerance::default(), exec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, residual_scan, threshold);
criterion_main!(benches);
