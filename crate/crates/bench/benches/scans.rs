use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_rational::Ratio;
use recur_bench::{rotation_query, skew_query};
use recur_core::returns::{return_set, Mode};
use recur_core::spectral::{d_eps_set, FourierData};
use recur_core::windows::{gen_example121, gen_poly_small};
use recur_core::{IntPoly, Scalar};

fn windows(c: &mut Criterion) {
    let alpha = Scalar::sqrt2_minus_1();
    let sq = IntPoly::monomial(1, 2);
    c.bench_function("gen_poly_small 2e5", |b| {
        b.iter(|| gen_poly_small(alpha, black_box(&sq), Ratio::new(1, 10), 1, 200_000).unwrap())
    });
    let s = gen_example121(-8, 1 << 20).unwrap();
    c.bench_function("gap_profile 1M", |b| b.iter(|| black_box(&s).gap_profile()));
    c.bench_function("pws_profile 1M", |b| b.iter(|| black_box(&s).pws_profile(5).unwrap()));
}

fn returns(c: &mut Criterion) {
    let exact = rotation_query(100_000, Mode::Exact);
    c.bench_function("exact rotation return set 1e5", |b| b.iter(|| return_set(black_box(&exact)).unwrap()));
    let sample = skew_query(20_000, 64);
    c.bench_function("sampled skew return set 2e4", |b| b.iter(|| return_set(black_box(&sample)).unwrap()));
}

fn spectral(c: &mut Criterion) {
    let f = FourierData::from_triples(&[(1, 0.3, 0.1), (-1, 0.3, -0.1), (2, 0.2, 0.0), (-2, 0.2, 0.0)]).unwrap();
    let alpha = Scalar::sqrt2_minus_1();
    c.bench_function("d_eps_set 1e4", |b| b.iter(|| d_eps_set(&f, &f, &alpha, Ratio::new(1, 100), 1, 10_000).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = windows, returns, spectral
}
criterion_main!(benches);
