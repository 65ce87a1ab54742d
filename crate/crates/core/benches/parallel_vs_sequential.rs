use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rbsol::flow::{compare_to_oracle, CompareOptions};
use rbsol::par::Exec;
use rbsol::selfsim::flow_diffeo_with;
use rbsol::solver::{cylinder_fixture, gaussian_fixture, shoot_sweep, ShootOptions};
use rbsol::{make_grid, SolitonParams};
use std::hint::black_box;

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn params() -> SolitonParams {
    SolitonParams { n: 3, rho: 0.1, lambda: 1.0 }
}

fn diffeo(c: &mut Criterion) {
    let s = gaussian_fixture(&params(), &make_grid(0.0, 5.0, 801).unwrap()).unwrap();
    let mut group = c.benchmark_group("flow_diffeo_801");
    for (name, exec) in STRATEGIES {
        group.bench_function(name, |b| b.iter(|| flow_diffeo_with(black_box(&s), 0.2, 1e-10, exec).unwrap()));
    }
    group.finish();
}

fn shots(c: &mut Criterion) {
    let alphas: Vec<f64> = (0..32).map(|k| 0.5 + 0.02 * k as f64).collect();
    let mut group = c.benchmark_group("shoot_sweep_32");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_function(name, |b| {
            b.iter(|| shoot_sweep(&params(), black_box(&alphas), 3.0, 301, &ShootOptions::default(), exec))
        });
    }
    group.finish();
}

fn ladder(c: &mut Criterion) {
    let family = |count| cylinder_fixture(&params(), &make_grid(0.0, 5.0, count)?);
    let mut group = c.benchmark_group("oracle_ladder");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        let opts = CompareOptions { exec, ..CompareOptions::default() };
        group.bench_with_input(BenchmarkId::new(name, "51-101-201"), &opts, |b, opts| {
            b.iter(|| compare_to_oracle(family, 0.02, &[51, 101, 201], opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, diffeo, shots, ladder);
criterion_main!(benches);
