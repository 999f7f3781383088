use std::hint::black_box;

use condflow_core::rng::{philox4x32, PathRng};
use condflow_core::simulate::{simulate_path, Recording, SimConfig};
use condflow_core::stats::ks_two_sample;
use condflow_core::{compute_scale, parse_expr, DiffusionSpec, GridConfig};
use criterion::{criterion_group, criterion_main, Criterion};

fn philox(c: &mut Criterion) {
    c.bench_function("philox4x32", |b| {
        let mut ctr = 0u32;
        b.iter(|| {
            ctr = ctr.wrapping_add(1);
            philox4x32(black_box([ctr, 0, 0, 0]), [7, 9])
        })
    });
    let rng = PathRng::new(1, 2);
    c.bench_function("path_rng_normal", |b| b.iter(|| rng.normal(black_box(17), 0)));
}

fn expr_eval(c: &mut Criterion) {
    let e = parse_expr("sqrt(1 + y^2) * exp(-y / 2) + log(y)").unwrap();
    c.bench_function("expr_eval", |b| b.iter(|| e.eval(black_box(1.3))));
}

fn scale(c: &mut Criterion) {
    let gbm = DiffusionSpec::geometric_brownian();
    let cfg = GridConfig::for_interval(gbm.interval, 1.0).with_range(0.1, 10.0);
    c.bench_function("compute_scale_gbm", |b| b.iter(|| compute_scale(&gbm, 1.0, &cfg).unwrap()));
}

fn simulate(c: &mut Criterion) {
    let bessel = DiffusionSpec::bessel3().restricted(0.0, 2.0).unwrap();
    let cfg = SimConfig::new(1e-3, 1.0, 1, 5).with_levels(&[2.0]).with_recording(Recording::Endpoints);
    let mut i = 0;
    c.bench_function("simulate_path_bessel3_1000_steps", |b| {
        b.iter(|| {
            i += 1;
            simulate_path(&bessel, 1.0, &cfg, i).unwrap()
        })
    });
}

fn ks(c: &mut Criterion) {
    let rng = PathRng::new(3, 0);
    let xs: Vec<f64> = (0..10_000).map(|i| rng.normal(i, 0)).collect();
    let ys: Vec<f64> = (0..10_000).map(|i| rng.normal(i, 1)).collect();
    c.bench_function("ks_two_sample_1e4", |b| b.iter(|| ks_two_sample(&xs, &ys).unwrap()));
}

criterion_group!(benches, philox, expr_eval, scale, simulate, ks);
criterion_main!(benches);
