use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use teleres::fef::{self, FefConfig};
use teleres::gamma::{self, SearchConfig};
use teleres::random;
use teleres::state::SubsystemLayout;
use teleres::Jobs;

const MODES: [(&str, Jobs); 2] = [("sequential", Jobs::Fixed(1)), ("parallel", Jobs::Auto)];

fn gamma_restarts(c: &mut Criterion) {
    let mut group = c.benchmark_group("maximize_gamma");
    group.sample_size(10);
    for n in [2, 3] {
        let rho = random::random_density(&SubsystemLayout::multiqubit(n).unwrap(), 2, 7).unwrap();
        for (name, jobs) in MODES {
            let config = SearchConfig {
                jobs,
                ..SearchConfig::default()
            };
            group.bench_with_input(BenchmarkId::new(name, n), &rho, |b, rho| {
                b.iter(|| gamma::maximize_gamma(black_box(rho), &config).unwrap())
            });
        }
    }
    group.finish();
}

fn fef_restarts(c: &mut Criterion) {
    let mut group = c.benchmark_group("fef_optimize");
    group.sample_size(10);
    for d in [3, 5] {
        let layout = SubsystemLayout::bipartite(d).unwrap();
        let rho = random::random_density(&layout, d, 7).unwrap();
        for (name, jobs) in MODES {
            let config = FefConfig {
                jobs,
                ..FefConfig::default()
            };
            group.bench_with_input(BenchmarkId::new(name, d), &rho, |b, rho| {
                b.iter(|| fef::fef_optimize(black_box(rho), d, &config).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, gamma_restarts, fef_restarts);
criterion_main!(benches);
