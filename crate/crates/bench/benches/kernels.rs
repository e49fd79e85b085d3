use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use nilseq_core::exactnum::{classify_entropy, GeneratorSet, IntMatrix, IntegralPolynomial, PhaseScalar};
use nilseq_core::mobius::{correlate, sieve_mobius};
use nilseq_core::nctorus::{iterate_phase_polys, Automorphism, ThetaMatrix, WeylWord};
use nilseq_core::nilseq::poly_exp;
use nilseq_core::spectral::{decompose, GPolynomial, ShiftPhaseOperator, SparseVector};
use nilseq_core::sum::SumMethod;
use nilseq_core::torus::{monomial, weyl_test, Precision};

fn sqrt2() -> PhaseScalar {
    let mut gs = GeneratorSet::new();
    gs.declare("g1 = sqrt2 : 1.41421356237309504880").unwrap();
    gs.parse("g1").unwrap()
}

fn sieve(c: &mut Criterion) {
    let mut g = c.benchmark_group("sieve");
    g.sample_size(10);
    for n in [100_000u64, 1_000_000] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| sieve_mobius(black_box(n)).unwrap()));
    }
    g.finish();
}

fn correlation(c: &mut Criterion) {
    let table = sieve_mobius(1_000_000).unwrap();
    let xi = poly_exp(&monomial(vec![PhaseScalar::zero(), PhaseScalar::zero(), sqrt2()]));
    let mut g = c.benchmark_group("correlate");
    g.sample_size(10);
    g.bench_function("e(n^2 sqrt2) 1e6", |b| {
        b.iter(|| correlate(&table, &xi, &[1_000_000], SumMethod::Pairwise).unwrap())
    });
    g.finish();
}

fn weyl(c: &mut Criterion) {
    let p = monomial(vec![PhaseScalar::zero(), PhaseScalar::zero(), sqrt2()]);
    let mut g = c.benchmark_group("weyl");
    g.sample_size(10);
    for (name, precision) in [("exact", Precision::Exact), ("fast", Precision::Fast)] {
        g.bench_function(name, |b| {
            b.iter(|| weyl_test(&p, &[1], &[100_000], precision, SumMethod::Pairwise).unwrap())
        });
    }
    g.finish();
}

fn decomposition(c: &mut Criterion) {
    let shift = ShiftPhaseOperator::new(vec![1, 0], PhaseScalar::ratio(1, 5), vec![PhaseScalar::zero(); 2]).unwrap();
    let modulation = ShiftPhaseOperator::modulation(PhaseScalar::zero(), vec![sqrt2(), PhaseScalar::ratio(1, 3)]);
    let g = GPolynomial::new(
        2,
        vec![shift, modulation],
        vec![IntegralPolynomial::from_i64(&[0, 0, 1]), IntegralPolynomial::identity()],
    )
    .unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let u = SparseVector::from_sites([
        (vec![0, 0], num_complex::Complex64::new(h, 0.0)),
        (vec![1, 0], num_complex::Complex64::new(h, 0.0)),
    ]);
    c.bench_function("decompose quadratic shift", |b| b.iter(|| decompose(&g, &u, &u).unwrap()));
}

fn words(c: &mut Criterion) {
    let s = IntMatrix::from_i64(&[&[1, 1, 0], &[0, 1, 1], &[0, 0, 1]]);
    let theta = ThetaMatrix::from_upper(3, &[(1, 2, sqrt2())]).unwrap();
    let auto = Automorphism::new(s.clone(), theta).unwrap();
    let w = WeylWord::from_i64(PhaseScalar::zero(), &[1, -2, 3]);
    c.bench_function("iterate word 1000 steps", |b| b.iter(|| auto.iterate(&w, black_box(1000)).unwrap()));
    let rho = vec![1.into(), (-2).into(), 3.into()];
    c.bench_function("fit phase polynomials d=3", |b| b.iter(|| iterate_phase_polys(&auto, &rho, 1).unwrap()));
    c.bench_function("classify jordan 3x3", |b| b.iter(|| classify_entropy(&s).unwrap()));
}

criterion_group!(benches, sieve, correlation, weyl, decomposition, words);
criterion_main!(benches);
