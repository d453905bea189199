use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mmlink::config::{BandConfig, EstimationMethod, SimConfig};
use mmlink::montecarlo::{run_sweep, Param, SweepAxis, SweepSpec};

fn small_spec() -> SweepSpec {
    let mut base = SimConfig::table1();
    base.mmw = BandConfig::mmw_table1().with_subcarriers(64);
    base.sub6 = BandConfig::sub6_table1().with_subcarriers(64);
    base.n_realizations = 8;
    SweepSpec {
        base,
        axes: vec![
            SweepAxis::reals(Param::KFactorDb, &[-20.0, 20.0]),
            SweepAxis::pilots(&[1, 2, 4]),
            SweepAxis::methods(&EstimationMethod::ALL),
        ],
    }
}

fn sweep(c: &mut Criterion) {
    let spec = small_spec();
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("sequential", 1), &1usize, |b, &w| {
        b.iter(|| run_sweep(&spec, w).unwrap())
    });
    group.bench_with_input(BenchmarkId::new("parallel", threads), &threads, |b, &w| {
        b.iter(|| run_sweep(&spec, w).unwrap())
    });
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
