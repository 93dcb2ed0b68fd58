//! Hot-path benchmarks: fiber solving, quadrature means, and exact
//! harmonic decomposition.

use criterion::{criterion_group, criterion_main, Criterion};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use semiharm_core::catalog;
use semiharm_core::covering::{BasePt, DEFAULT_SEED};
use semiharm_core::expr::parse;
use semiharm_core::fields::ScalarField;
use semiharm_core::harmpoly;
use semiharm_core::means::{self, Resolution};

fn bench_fiber_solve(c: &mut Criterion) {
    let cov = catalog::tri3();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let points: Vec<BasePt> = (0..256)
        .map(|_| cov.random_base_point(&mut rng, 0.9))
        .collect();
    c.bench_function("fiber_solve_tri3_256pts", |b| {
        b.iter(|| {
            for z in &points {
                black_box(cov.fiber(black_box(z)).unwrap());
            }
        })
    });
}

fn bench_solid_mean(c: &mut Criterion) {
    let cov = catalog::sqrt2();
    let a = catalog::center_over_origin(&cov).unwrap();
    let f = ScalarField::from_expr("abs2(w)", &parse("abs2(w)").unwrap(), &cov).unwrap();
    let res = Resolution::coarse(1);
    let ball = res.ball(1, a.base, 0.5);
    c.bench_function("solid_mean_sqrt2_coarse", |b| {
        b.iter(|| black_box(means::solid_mean(&cov, &f, &a, black_box(&ball)).unwrap()))
    });
}

fn bench_spherical_mean_m2(c: &mut Criterion) {
    let cov = catalog::prod2();
    let a = catalog::center_over_origin(&cov).unwrap();
    let f = ScalarField::from_expr("abs2(z1)", &parse("abs2(z1)").unwrap(), &cov).unwrap();
    let res = Resolution::coarse(2);
    let sphere = res.sphere(2, a.base, 0.5);
    c.bench_function("spherical_mean_prod2_coarse", |b| {
        b.iter(|| black_box(means::spherical_mean(&cov, &f, &a, black_box(&sphere)).unwrap()))
    });
}

fn bench_decompose(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let polys: Vec<_> = (0..8)
        .map(|_| harmpoly::random_poly(4, rng.gen_range(4..=8), &mut rng))
        .collect();
    c.bench_function("harmonic_decompose_n4_deg8_x8", |b| {
        b.iter(|| {
            for p in &polys {
                black_box(harmpoly::harmonic_decompose(black_box(p)));
            }
        })
    });
}

fn bench_residue_radial(c: &mut Criterion) {
    let cov = catalog::identity1();
    let a = catalog::center_over_origin(&cov).unwrap();
    let f = ScalarField::from_expr("abs2(z1)", &parse("abs2(z1)").unwrap(), &cov).unwrap();
    let res = Resolution::coarse(1);
    c.bench_function("harmonic_residue_identity_coarse", |b| {
        b.iter(|| {
            black_box(
                semiharm_core::residue::harmonic_residue(&cov, &f, &a, black_box(0.4), &res)
                    .unwrap(),
            )
        })
    });
}

criterion_group!(
    benches,
    bench_fiber_solve,
    bench_solid_mean,
    bench_spherical_mean_m2,
    bench_decompose,
    bench_residue_radial
);
criterion_main!(benches);
