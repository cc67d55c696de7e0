use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use takagi::extrema::grid_extrema_with;
use takagi::follmer::PathPowerSums;
use takagi::modulus::modulus_scan_with;
use takagi::quadvar::qv_approx_with;
use takagi::{CoefficientScheme, DyadicRational, Execution, GridPath, TakagiFunction};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn extrema(c: &mut Criterion) {
    let mut g = c.benchmark_group("grid_extrema");
    g.sample_size(10);
    let x = TakagiFunction::star();
    for level in [16u32, 20] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, level), &level, |b, &n| {
                b.iter(|| grid_extrema_with(&x, n, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn quadratic_variation(c: &mut Criterion) {
    let mut g = c.benchmark_group("qv_approx");
    g.sample_size(10);
    let x = TakagiFunction::new(CoefficientScheme::bernoulli(takagi::exact::rational(1, 2), 1).unwrap());
    let one = DyadicRational::one();
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, 18), |b| {
            b.iter(|| qv_approx_with(&x, 18, &one, exec).unwrap())
        });
    }
    g.finish();
}

fn modulus(c: &mut Criterion) {
    let mut g = c.benchmark_group("modulus_scan");
    g.sample_size(10);
    let x = TakagiFunction::hat();
    let h = DyadicRational::new(5, 7);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, 18), |b| {
            b.iter(|| modulus_scan_with(&x, 18, &h, exec).unwrap())
        });
    }
    g.finish();
}

fn paths(c: &mut Criterion) {
    let mut g = c.benchmark_group("grid_path");
    g.sample_size(10);
    let scheme = CoefficientScheme::AltMk;
    let x = TakagiFunction::hat();
    let one = DyadicRational::one();
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, 18), |b| {
            b.iter(|| GridPath::build(&scheme, 18, exec).unwrap())
        });
        g.bench_function(BenchmarkId::new(format!("ito_power_sums_{name}"), 16), |b| {
            b.iter(|| PathPowerSums::compute(&x, 16, &one, 4, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, extrema, quadratic_variation, modulus, paths);
criterion_main!(benches);
