//! Measures the cost centers behind the reduction pipeline: dense series
//! multiplication, k-th roots at deep floors, polynomial evaluation on a
//! series, and the end-to-end fibre count. Build with the default features
//! for the work-stealing path or with `--no-default-features` for the
//! sequential one; the numbers are directly comparable because the results
//! are bit-identical either way. With the parallel feature on, an extra
//! group pins the same multiply to a one-thread pool for an in-run contrast.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};

use linfty::fixtures;
use linfty::laurent2::{series_kth_root, series_mul, Exponent2, LaurentSeries2};
use linfty::reduction::{reduce_full, WPoly};
use linfty::scalars::{rat, rat_int, FieldSpec, Scalar};
use linfty::torus::{count_fibre, TorusSpec};

type S = LaurentSeries2<Scalar>;

/// A deliberately dense series: every exponent pair with total degree in
/// (floor, top] and |i| <= spread carries a nonzero coefficient.
fn dense_series(top: i64, floor: i64, spread: i64) -> S {
    let mut entries = Vec::new();
    for total in (floor + 1)..=top {
        for i in -spread..=spread {
            let p = i * i + total * total + 1;
            let q = i.abs() + 2;
            entries.push((Exponent2::new(i, total - i), Scalar::from_rat(rat(p, q))));
        }
    }
    S::from_terms(FieldSpec::Rational, entries, floor).unwrap()
}

fn bench_series_mul(c: &mut Criterion) {
    let a = dense_series(2, -26, 5);
    let b = dense_series(1, -26, 5);
    let mut g = c.benchmark_group("series");
    g.sample_size(20).measurement_time(Duration::from_secs(4));
    g.bench_function("mul_dense_308x297_terms", |bch| {
        bch.iter(|| series_mul(black_box(&a), black_box(&b)).unwrap())
    });
    g.finish();
}

fn bench_roots(c: &mut Criterion) {
    let g2 = S::from_terms(
        FieldSpec::Rational,
        vec![
            (Exponent2::new(2, 4), Scalar::from_int(1)),
            (Exponent2::new(1, 0), Scalar::from_int(1)),
        ],
        -40,
    )
    .unwrap();
    let mut g = c.benchmark_group("roots");
    g.sample_size(20).measurement_time(Duration::from_secs(4));
    g.bench_function("square_root_floor_minus_40", |bch| {
        bch.iter(|| series_kth_root(black_box(&g2), 2).unwrap())
    });
    g.finish();
}

fn bench_w_evaluation(c: &mut Criterion) {
    // The realistic argument is a root series; its term count grows with the
    // floor depth. 16 polynomial terms are enough for the per-term dispatch
    // to fan out.
    let (_, gsrc) = fixtures::square_root_pair(-36);
    let base = series_kth_root(&gsrc, 2).unwrap();
    let w = WPoly::new(
        2,
        (1..=16)
            .map(|e| (e, Scalar::from_rat(rat(e + 1, e + 2))))
            .collect(),
    )
    .unwrap();
    let mut g = c.benchmark_group("w_eval");
    g.sample_size(10).measurement_time(Duration::from_secs(4));
    g.bench_function("degree_16_on_a_root_series", |bch| {
        bch.iter(|| w.evaluate_series(black_box(&base)).unwrap())
    });
    g.finish();
}

fn bench_pipeline(c: &mut Criterion) {
    let (f, g2) = fixtures::counting_example();
    let mut g = c.benchmark_group("pipeline");
    g.sample_size(10).measurement_time(Duration::from_secs(5));
    g.bench_function("reduce_full", |bch| {
        bch.iter(|| reduce_full(black_box(&f), black_box(&g2)).unwrap())
    });
    g.bench_function("count_fibre_end_to_end", |bch| {
        bch.iter(|| {
            let red = reduce_full(black_box(&f), black_box(&g2)).unwrap();
            let spec = TorusSpec::symmetric(FieldSpec::Rational, rat_int(1), red.k).unwrap();
            count_fibre(&f, &g2, &red, &spec).unwrap()
        })
    });
    g.finish();
}

#[cfg(feature = "parallel")]
fn bench_pool_contrast(c: &mut Criterion) {
    let a = dense_series(2, -26, 5);
    let b = dense_series(1, -26, 5);
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let mut g = c.benchmark_group("thread_pool");
    g.sample_size(20).measurement_time(Duration::from_secs(4));
    g.bench_function("mul_default_pool", |bch| {
        bch.iter(|| series_mul(black_box(&a), black_box(&b)).unwrap())
    });
    g.bench_function("mul_one_thread_pool", |bch| {
        bch.iter(|| one.install(|| series_mul(black_box(&a), black_box(&b)).unwrap()))
    });
    g.finish();
}

#[cfg(not(feature = "parallel"))]
fn bench_pool_contrast(_c: &mut Criterion) {}

criterion_group!(
    benches,
    bench_series_mul,
    bench_roots,
    bench_w_evaluation,
    bench_pipeline,
    bench_pool_contrast
);
criterion_main!(benches);
