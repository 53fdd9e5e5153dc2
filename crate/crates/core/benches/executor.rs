use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stbc_ia::metrics::{run_ber_point, run_mi, BerPolicy};
use stbc_ia::scheme::{Scheme, SchemeId};
use stbc_ia::{Constellation, Executor, RngSpec};

fn executors() -> Vec<(String, Executor)> {
    let n = std::thread::available_parallelism().map_or(1, |n| n.get()).max(2);
    vec![("sequential".into(), Executor::sequential()), (format!("parallel_{n}"), Executor::new(n))]
}

fn ber(c: &mut Criterion) {
    let policy = BerPolicy { target_bit_errors: u64::MAX, max_trials: 8192, batch: 256, first_wave: 4, max_wave: 16 };
    let mut g = c.benchmark_group("ber_point_8192");
    g.sample_size(10);
    for id in [SchemeId::XAlamouti, SchemeId::Jash] {
        let s = Scheme::from(id);
        for (name, exec) in executors() {
            g.bench_with_input(BenchmarkId::new(id.name(), &name), &exec, |b, e| {
                b.iter(|| run_ber_point(&s, Constellation::Qpsk, 20.0, 1.0, &policy, RngSpec::new(0), e).unwrap())
            });
        }
    }
    g.finish();
}

fn mi(c: &mut Criterion) {
    let grid: Vec<f64> = (0..=20).map(|k| 2.0 * k as f64).collect();
    let mut g = c.benchmark_group("mi_8192");
    g.sample_size(10);
    let s = Scheme::from(SchemeId::IbcAlamouti);
    for (name, exec) in executors() {
        g.bench_with_input(BenchmarkId::from_parameter(&name), &exec, |b, e| b.iter(|| run_mi(&s, &grid, 8192, RngSpec::new(0), e).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, ber, mi);
criterion_main!(benches);
