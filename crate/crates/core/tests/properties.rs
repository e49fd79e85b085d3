//! Randomized invariants across modules.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nilseq_core::exactnum::{
    char_poly, classify_entropy, GeneratorSet, IntMatrix, IntegralPolynomial, PhaseScalar, UnipotentExpansion, Verdict,
};
use nilseq_core::mobius::{correlate, sieve_mobius};
use nilseq_core::nctorus::{iterate_phase_polys, word_mul, Automorphism, ThetaMatrix, WeylElement, WeylWord};
use nilseq_core::nilseq::{deinterleave, interleave, poly_exp, theta_kappa_k, SequenceStream, Tag};
use nilseq_core::spectral::{
    classify_atoms, decompose, polarize, GPolynomial, ShiftPhaseOperator, SparseVector,
};
use nilseq_core::sum::SumMethod;
use nilseq_core::torus::{monomial, orbit_point, TorusPoint};

fn gens() -> GeneratorSet {
    let mut gs = GeneratorSet::new();
    gs.declare("g1 = sqrt2 : 1.41421356237309504880").unwrap();
    gs.declare("g2 = sqrt3 : 1.73205080756887729352").unwrap();
    gs
}

fn elementary(d: usize, i: usize, j: usize, c: i64) -> IntMatrix {
    let mut e = IntMatrix::identity(d);
    e.set(i, j, BigInt::from(c));
    e
}

fn random_gl(rng: &mut ChaCha8Rng, d: usize, steps: usize) -> IntMatrix {
    let mut p = IntMatrix::identity(d);
    for _ in 0..steps {
        let i = rng.gen_range(0..d);
        let mut j = rng.gen_range(0..d);
        if i == j {
            j = (j + 1) % d;
        }
        let c = if rng.gen_bool(0.5) { 1 } else { -1 };
        p = p.mul(&elementary(d, i, j, c));
    }
    p
}

/// Block-diagonal (unipotent ⊕ finite order), conjugated by a random `P`.
fn random_quasi_unipotent(rng: &mut ChaCha8Rng, d: usize) -> IntMatrix {
    let finite: [&[&[i64]]; 4] = [&[&[-1]], &[&[0, -1], &[1, 0]], &[&[0, -1], &[1, 1]], &[&[0, -1], &[1, -1]]];
    let mut blocks = Vec::new();
    let mut left = d;
    if rng.gen_bool(0.5) {
        let f = finite[rng.gen_range(0..4)];
        if f.len() < d {
            blocks.push(IntMatrix::from_i64(f));
            left -= f.len();
        }
    }
    let mut u = IntMatrix::identity(left);
    for i in 0..left {
        for j in i + 1..left {
            u.set(i, j, BigInt::from(rng.gen_range(-2..=2)));
        }
    }
    blocks.insert(0, u);
    let s = IntMatrix::block_diag(&blocks);
    let p = random_gl(rng, d, 4);
    p.mul(&s).mul(&p.inverse_unimodular().unwrap())
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize, sites: usize, span: i64) -> SparseVector {
    let mut v = SparseVector::new();
    for _ in 0..sites {
        let k: Vec<i64> = (0..dim).map(|_| rng.gen_range(-span..=span)).collect();
        v.add_site(k, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    }
    v
}

fn random_phase(rng: &mut ChaCha8Rng, gs: &GeneratorSet) -> PhaseScalar {
    let a = rng.gen_range(-5..=5);
    let b = rng.gen_range(1..=7);
    let c = rng.gen_range(-3..=3);
    gs.parse(&format!("{a}/{b} + {c}*g1")).unwrap()
}

fn random_operator(rng: &mut ChaCha8Rng, gs: &GeneratorSet, dim: usize, diagonal: bool) -> ShiftPhaseOperator {
    let shift = (0..dim).map(|_| if diagonal { 0 } else { rng.gen_range(-2..=2) }).collect();
    let form = (0..dim).map(|_| random_phase(rng, gs)).collect();
    ShiftPhaseOperator::new(shift, random_phase(rng, gs), form).unwrap()
}

fn random_word(rng: &mut ChaCha8Rng, gs: &GeneratorSet, d: usize) -> WeylWord {
    WeylWord::from_i64(random_phase(rng, gs), &(0..d).map(|_| rng.gen_range(-4..=4)).collect::<Vec<_>>())
}

fn theta2() -> ThetaMatrix {
    ThetaMatrix::two(gens().parse("g1").unwrap())
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unipotent_expansion_is_exact(seed in any::<u64>(), d in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_quasi_unipotent(&mut rng, d);
        let rep = classify_entropy(&s).unwrap();
        prop_assert_eq!(rep.verdict, Verdict::ZeroEntropy);
        let m = rep.m.unwrap();
        let exp = UnipotentExpansion::new(&s, m).unwrap();
        for _ in 0..6 {
            let t = rng.gen_range(-20i64..=20);
            let r = rng.gen_range(0..m);
            let n = t * m as i64 + r as i64;
            prop_assert_eq!(exp.residue(r).eval(&BigInt::from(t)), s.pow_signed(n).unwrap());
        }
    }

    #[test]
    fn entropy_is_conjugation_invariant(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = if rng.gen_bool(0.5) { random_quasi_unipotent(&mut rng, d) } else { random_gl(&mut rng, d, 6) };
        let p = random_gl(&mut rng, d, 5);
        let conj = p.mul(&s).mul(&p.inverse_unimodular().unwrap());
        let a = classify_entropy(&s).unwrap();
        let b = classify_entropy(&conj).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert_eq!(a.m, b.m);
        prop_assert_eq!(&a.char_poly, &b.char_poly);
    }

    #[test]
    fn char_poly_of_block_diagonal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let da = rng.gen_range(2..=3);
        let a = random_gl(&mut rng, da, 5);
        let b = random_gl(&mut rng, 2, 5);
        let bd = IntMatrix::block_diag(&[a.clone(), b.clone()]);
        prop_assert_eq!(char_poly(&bd), char_poly(&a).mul(&char_poly(&b)));
    }

    #[test]
    fn phase_scalar_reduction(seed in any::<u64>(), k in -50i64..50, j in -50i64..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gs = gens();
        let a = random_phase(&mut rng, &gs);
        let r = a.reduce_mod_1();
        prop_assert_eq!(r.reduce_mod_1(), r.clone());
        let b = a.add(&PhaseScalar::from_int(k));
        let c = b.add(&PhaseScalar::from_int(j));
        prop_assert!(a.eq_mod_1(&b) && b.eq_mod_1(&c) && a.eq_mod_1(&c));
        prop_assert!(!a.eq_mod_1(&a.add(&PhaseScalar::ratio(1, 3))));
    }

    #[test]
    fn orbit_points_compose(seed in any::<u64>(), n in -15i64..15, m in -15i64..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gs = gens();
        let a = random_gl(&mut rng, 3, 5);
        let x = TorusPoint::new((0..3).map(|_| random_phase(&mut rng, &gs)).collect());
        let lhs = orbit_point(&a, &orbit_point(&a, &x, n).unwrap(), m).unwrap();
        prop_assert_eq!(lhs, orbit_point(&a, &x, n + m).unwrap());
    }

    #[test]
    fn interleave_roundtrip(m in 1usize..5, n in -200i64..200) {
        let gs = gens();
        let comps: Vec<SequenceStream> = (0..m)
            .map(|r| poly_exp(&monomial(vec![PhaseScalar::ratio(r as i64, 7), gs.parse("g1").unwrap(), PhaseScalar::ratio(1, 5)])))
            .collect();
        let xi = interleave(&comps, m).unwrap();
        let back = deinterleave(&xi, m).unwrap();
        for (c, b) in comps.iter().zip(&back) {
            prop_assert_eq!(c.at(n), b.at(n));
        }
        let again = interleave(&back, m).unwrap();
        prop_assert_eq!(again.at(n), xi.at(n));
    }

    #[test]
    fn theta_truncation_bound(s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let k = nilseq_core::nilseq::kappa_cutoff(1e-12);
        let a = theta_kappa_k(s, t, k);
        let b = theta_kappa_k(s, t, 2 * k);
        prop_assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn word_mul_associative_and_commutator(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gs = gens();
        let th = ThetaMatrix::from_upper(3, &[(0, 1, gs.parse("g1").unwrap()), (0, 2, PhaseScalar::ratio(1, 3)), (1, 2, gs.parse("1/2*g2").unwrap())]).unwrap();
        let (a, b, c) = (random_word(&mut rng, &gs, 3), random_word(&mut rng, &gs, 3), random_word(&mut rng, &gs, 3));
        let left = word_mul(&word_mul(&a, &b, &th).unwrap(), &c, &th).unwrap();
        let right = word_mul(&a, &word_mul(&b, &c, &th).unwrap(), &th).unwrap();
        prop_assert_eq!(left, right);
        let ab = word_mul(&a, &b, &th).unwrap();
        let ba = word_mul(&b, &a, &th).unwrap();
        let (x, y) = (a.exponents(), b.exponents());
        // ab = e(x'Θy)·ba with x'Θy = Σ_{j≠k} x_j y_k θ_jk
        let mut bilinear = PhaseScalar::zero();
        for j in 0..3 {
            for k in 0..3 {
                if j != k {
                    bilinear.add_assign(&th.get(j, k).scale_int(&(&x[j] * &y[k])));
                }
            }
        }
        prop_assert!(ab.phase().sub(ba.phase()).eq_mod_1(&bilinear));
    }

    #[test]
    fn apply_auto_multiplicative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gs = gens();
        let th = theta2();
        // any SL(2, Z) matrix is compatible with d = 2
        let s = random_gl(&mut rng, 2, 6);
        let s = if s.det() == BigInt::from(1) { s } else { s.mul(&IntMatrix::from_i64(&[&[0, 1], &[1, 0]])) };
        let auto = Automorphism::new(s, th.clone()).unwrap();
        let (a, b) = (random_word(&mut rng, &gs, 2), random_word(&mut rng, &gs, 2));
        let lhs = auto.apply(&word_mul(&a, &b, &th).unwrap()).unwrap();
        let rhs = word_mul(&auto.apply(&a).unwrap(), &auto.apply(&b).unwrap(), &th).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn iterated_exponents_and_phases(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = rng.gen_range(1..=3);
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        let s = IntMatrix::from_i64(&[&[sign, c], &[0, sign]]);
        let auto = Automorphism::new(s.clone(), theta2()).unwrap();
        let m = classify_entropy(&s).unwrap().m.unwrap();
        let rho = vec![BigInt::from(rng.gen_range(-3..=3)), BigInt::from(rng.gen_range(-3..=3))];
        let rep = iterate_phase_polys(&auto, &rho, m).unwrap();
        let start = WeylWord::new(PhaseScalar::zero(), rho.clone());
        for _ in 0..10 {
            let n = rng.gen_range(-50i64..=50);
            let direct = auto.iterate(&start, n).unwrap();
            let fitted = rep.eval(n);
            let expected = s.pow_signed(n).unwrap().mul_vec(&rho);
            prop_assert_eq!(direct.exponents(), expected.as_slice());
            prop_assert!(fitted.phase().eq_mod_1(direct.phase()));
            prop_assert_eq!(fitted.exponents(), direct.exponents());
        }
    }

    #[test]
    fn state_is_positive_and_trace_is_tracial(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let th = theta2();
        let elem = |rng: &mut ChaCha8Rng| WeylElement::from_terms((0..3).map(|_| {
            (vec![rng.gen_range(-2..=2), rng.gen_range(-2..=2)], Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        }));
        let (a, b) = (elem(&mut rng), elem(&mut rng));
        let ab = a.mul(&b, &th).unwrap().trace();
        let ba = b.mul(&a, &th).unwrap().trace();
        prop_assert!(close(ab, ba, 1e-12));
        let w = random_vector(&mut rng, 2, 4, 3);
        let w = w.scale(Complex64::new(1.0 / w.norm(), 0.0));
        let pos = a.adjoint(&th).unwrap().mul(&a, &th).unwrap();
        let rho = pos.state(&w, &th).unwrap();
        prop_assert!(rho.re >= -1e-12);
        prop_assert!(rho.im.abs() < 1e-12);
    }

    #[test]
    fn shift_phase_unitary_and_composition(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gs = gens();
        let w1 = random_operator(&mut rng, &gs, 2, false);
        let w2 = random_operator(&mut rng, &gs, 2, false);
        let psi = random_vector(&mut rng, 2, 6, 5);
        prop_assert!((w1.apply(&psi).unwrap().norm() - psi.norm()).abs() < 1e-12);
        let composed = w1.compose(&w2).unwrap();
        for _ in 0..50 {
            let k = vec![rng.gen_range(-9..=9), rng.gen_range(-9..=9)];
            let (p2, k2) = w2.apply_site(&k).unwrap();
            let (p1, k1) = w1.apply_site(&k2).unwrap();
            let (pc, kc) = composed.apply_site(&k).unwrap();
            prop_assert_eq!(k1, kc);
            prop_assert!(p1.add(&p2).eq_mod_1(&pc));
        }
        let mut acc = ShiftPhaseOperator::identity(2);
        for n in 0..=64 {
            prop_assert_eq!(w1.pow(n).unwrap(), acc.clone());
            prop_assert_eq!(w1.pow(-n).unwrap(), acc.inverse());
            acc = acc.compose(&w1).unwrap();
        }
    }

    #[test]
    fn decomposition_identity_and_polarization(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gs = gens();
        let diagonal = rng.gen_bool(0.4);
        let ops = vec![random_operator(&mut rng, &gs, 2, diagonal), random_operator(&mut rng, &gs, 2, true)];
        let exps = vec![
            IntegralPolynomial::from_i64(&[rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(0..=2)]),
            IntegralPolynomial::from_i64(&[rng.gen_range(-2..=2), rng.gen_range(-3..=3)]),
        ];
        let g = GPolynomial::new(2, ops, exps).unwrap();
        let u = random_vector(&mut rng, 2, 4, 3);
        let v = random_vector(&mut rng, 2, 4, 3);
        let d = decompose(&g, &u, &v).unwrap();
        let p = polarize(&g, &u, &v).unwrap();
        for n in -60i64..=60 {
            let direct = g.matrix_element(n, &u, &v).unwrap();
            prop_assert!(close(d.b(n) + d.c(n), direct, 1e-12), "n={}", n);
            prop_assert!(close(d.b(n), p.b(n), 1e-12));
            prop_assert!(close(d.c(n), p.c(n), 1e-12));
        }
        if let Some(hits) = d.certificate.hit_count(60) {
            let scanned = (-60i64..=60).filter(|&n| d.is_hit(n)).count();
            prop_assert_eq!(hits, scanned);
        }
    }

    #[test]
    fn atom_classes_translation_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gs = gens();
        let exps = vec![IntegralPolynomial::identity(), IntegralPolynomial::from_i64(&[0, 0, 1])];
        let atoms: Vec<(u64, f64, Vec<PhaseScalar>)> = (0..5)
            .map(|i| (i, 0.2, vec![random_phase(&mut rng, &gs), random_phase(&mut rng, &gs)]))
            .collect();
        let shift = [PhaseScalar::ratio(rng.gen_range(-5..=5), 7), PhaseScalar::ratio(rng.gen_range(-5..=5), 3)];
        let moved: Vec<_> = atoms
            .iter()
            .map(|(i, m, xi)| (*i, *m, xi.iter().zip(&shift).map(|(a, b)| a.add(b)).collect()))
            .collect();
        let a = classify_atoms(&atoms, &exps).unwrap();
        let b = classify_atoms(&moved, &exps).unwrap();
        let norm = |c: &Vec<Vec<u64>>| c.iter().map(|v| v.iter().copied().collect::<BTreeSet<_>>()).collect::<BTreeSet<_>>();
        prop_assert_eq!(norm(&a.classes), norm(&b.classes));
        prop_assert_eq!(a.w2_mass, b.w2_mass);
    }
}

#[test]
fn correlate_is_linear() {
    let gs = gens();
    let table = sieve_mobius(20_000).unwrap();
    let xi = poly_exp(&monomial(vec![PhaseScalar::zero(), gs.parse("g1").unwrap()]));
    let eta = poly_exp(&monomial(vec![PhaseScalar::zero(), PhaseScalar::zero(), gs.parse("g2").unwrap()]));
    let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(-0.7, 0.4));
    let combo = xi.scale(a).add(&eta.scale(b));
    let cps = [10, 100, 1000, 20_000];
    let rc = correlate(&table, &combo, &cps, SumMethod::Pairwise).unwrap();
    let rx = correlate(&table, &xi, &cps, SumMethod::Pairwise).unwrap();
    let ry = correlate(&table, &eta, &cps, SumMethod::Pairwise).unwrap();
    for i in 0..cps.len() {
        assert!(close(rc.value(i), a * rx.value(i) + b * ry.value(i), 1e-14));
    }
}

#[test]
fn zero_density_tagged_streams_have_small_averages() {
    let ind = nilseq_core::nilseq::indicator(&[-3, 0, 2, 17]);
    assert_eq!(ind.tag(), Tag::ZeroDensity);
    let gs = gens();
    let bounded = poly_exp(&monomial(vec![PhaseScalar::zero(), gs.parse("g1").unwrap(), gs.parse("g2").unwrap()]));
    let prod = ind.mul(&bounded);
    assert_eq!(prod.tag(), Tag::ZeroDensity);
    let checkpoints = [1_000, 10_000, 100_000];
    for s in [ind, prod] {
        let rep = nilseq_core::mobius::cesaro_stats(&s, &checkpoints, SumMethod::Pairwise);
        assert!(rep.rows.windows(2).all(|w| w[1].abs_avg <= w[0].abs_avg));
        assert!(rep.rows.last().unwrap().abs_avg < 0.01);
    }
}
