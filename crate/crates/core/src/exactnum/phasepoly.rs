use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::phase::{e_frac, ratio_f64, Generator, PhaseScalar, FRAC_BITS};
use super::poly::{binomial, binomial_to_monomial, forward_differences, IntegralPolynomial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// `Σ c_j n^j`
    Monomial,
    /// `Σ c_j C(n, j)`
    Binomial,
}

/// Polynomial in one integer variable with [`PhaseScalar`] coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhasePolynomial {
    coeffs: Vec<PhaseScalar>,
    basis: Basis,
}

impl PhasePolynomial {
    pub fn new(mut coeffs: Vec<PhaseScalar>, basis: Basis) -> Self {
        while coeffs.last().is_some_and(PhaseScalar::is_zero) {
            coeffs.pop();
        }
        PhasePolynomial { coeffs, basis }
    }

    pub fn zero() -> Self {
        PhasePolynomial::new(Vec::new(), Basis::Binomial)
    }

    pub fn constant(c: PhaseScalar) -> Self {
        PhasePolynomial::new(vec![c], Basis::Binomial)
    }

    /// `c · p(t)` for an integral polynomial `p`.
    pub fn from_integral(p: &IntegralPolynomial, c: &PhaseScalar) -> Self {
        PhasePolynomial::new(p.coeffs().iter().map(|k| c.scale_int(k)).collect(), Basis::Binomial)
    }

    /// Binomial-basis interpolation of the values at `t = 0, 1, ..., k`.
    pub fn interpolate(values: &[PhaseScalar]) -> Self {
        PhasePolynomial::new(forward_differences(values, |a, b| a.sub(b)), Basis::Binomial)
    }

    pub fn coeffs(&self) -> &[PhaseScalar] {
        &self.coeffs
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn eval(&self, t: &BigInt) -> PhaseScalar {
        let mut acc = PhaseScalar::zero();
        match self.basis {
            Basis::Binomial => {
                for (j, c) in self.coeffs.iter().enumerate() {
                    if !c.is_zero() {
                        acc.add_assign(&c.scale_int(&binomial(t, j)));
                    }
                }
            }
            Basis::Monomial => {
                let mut pw = BigInt::one();
                for c in &self.coeffs {
                    if !c.is_zero() {
                        acc.add_assign(&c.scale_int(&pw));
                    }
                    pw *= t;
                }
            }
        }
        acc
    }

    pub fn eval_i64(&self, t: i64) -> PhaseScalar {
        self.eval(&BigInt::from(t))
    }

    fn convert(&self, table: &[Vec<BigRational>]) -> Vec<PhaseScalar> {
        let n = self.coeffs.len();
        let mut out = vec![PhaseScalar::zero(); n];
        for (j, c) in self.coeffs.iter().enumerate() {
            for (i, m) in table[j].iter().enumerate().take(n) {
                if !m.is_zero() {
                    out[i].add_assign(&c.scale(m));
                }
            }
        }
        out
    }

    pub fn to_monomial(&self) -> PhasePolynomial {
        match self.basis {
            Basis::Monomial => self.clone(),
            Basis::Binomial => {
                let Some(deg) = self.degree() else {
                    return PhasePolynomial::new(Vec::new(), Basis::Monomial);
                };
                let table = binomial_to_monomial(deg);
                PhasePolynomial::new(self.convert(&table), Basis::Monomial)
            }
        }
    }

    pub fn to_binomial(&self) -> PhasePolynomial {
        match self.basis {
            Basis::Binomial => self.clone(),
            Basis::Monomial => {
                let Some(deg) = self.degree() else {
                    return PhasePolynomial::zero();
                };
                let values: Vec<PhaseScalar> = (0..=deg as i64).map(|t| self.eval_i64(t)).collect();
                PhasePolynomial::interpolate(&values)
            }
        }
    }

    pub fn add(&self, other: &PhasePolynomial) -> PhasePolynomial {
        let (a, b) = if self.basis == other.basis {
            (self.clone(), other.clone())
        } else {
            (self.to_binomial(), other.to_binomial())
        };
        let n = a.coeffs.len().max(b.coeffs.len());
        let coeffs = (0..n)
            .map(|i| match (a.coeffs.get(i), b.coeffs.get(i)) {
                (Some(x), Some(y)) => x.add(y),
                (Some(x), None) | (None, Some(x)) => x.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        PhasePolynomial::new(coeffs, a.basis)
    }

    pub fn neg(&self) -> PhasePolynomial {
        PhasePolynomial::new(self.coeffs.iter().map(PhaseScalar::neg).collect(), self.basis)
    }

    pub fn sub(&self, other: &PhasePolynomial) -> PhasePolynomial {
        self.add(&other.neg())
    }

    pub fn scale_int(&self, k: &BigInt) -> PhasePolynomial {
        PhasePolynomial::new(self.coeffs.iter().map(|c| c.scale_int(k)).collect(), self.basis)
    }

    /// Product with an integral polynomial, in the binomial basis.
    pub fn mul_integral(&self, p: &IntegralPolynomial) -> PhasePolynomial {
        let (Some(da), Some(db)) = (self.degree(), p.degree()) else {
            return PhasePolynomial::zero();
        };
        let values: Vec<PhaseScalar> = (0..=(da + db) as i64)
            .map(|t| self.eval_i64(t).scale_int(&p.eval_i64(t)))
            .collect();
        PhasePolynomial::interpolate(&values)
    }

    /// `p(q(t))` for an integral inner polynomial.
    pub fn compose(&self, inner: &IntegralPolynomial) -> PhasePolynomial {
        let deg = self.degree().unwrap_or(0) * inner.degree().unwrap_or(0);
        let values: Vec<PhaseScalar> = (0..=deg as i64).map(|t| self.eval(&inner.eval_i64(t))).collect();
        PhasePolynomial::interpolate(&values)
    }

    /// Reduces the rational part of every binomial coefficient into `[0,1)`.
    ///
    /// Integer binomial coefficients give an integer-valued polynomial, so
    /// the result agrees with `self` modulo 1 at every integer.
    pub fn reduce_mod_1(&self) -> PhasePolynomial {
        let b = self.to_binomial();
        PhasePolynomial::new(b.coeffs.iter().map(PhaseScalar::reduce_mod_1).collect(), Basis::Binomial)
    }

    /// True when `self(t) ≡ other(t) (mod 1)` for every integer `t`.
    pub fn eq_mod_1(&self, other: &PhasePolynomial) -> bool {
        self.reduce_mod_1() == other.reduce_mod_1()
    }

    /// True when some non-constant coefficient is irrational.
    pub fn has_irrational_nonconstant(&self) -> bool {
        self.coeffs.iter().skip(1).any(|c| !c.is_rational())
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().all(PhaseScalar::is_rational)
    }

    /// Fast exact evaluator of `frac(p(n))`.
    pub fn compile(&self) -> PhaseEvaluator {
        PhaseEvaluator::new(self)
    }
}

impl fmt::Display for PhasePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let var = |j: usize| match (self.basis, j) {
            (_, 0) => String::new(),
            (Basis::Monomial, 1) => "n".to_string(),
            (Basis::Monomial, j) => format!("n^{j}"),
            (Basis::Binomial, j) => format!("C(n,{j})"),
        };
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| if j == 0 { c.to_string() } else { format!("({c})*{}", var(j)) })
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Monomial integer coefficients over a common denominator, evaluated with
/// big-integer Horner steps; no rational normalization per call.
#[derive(Clone, Debug)]
pub struct PhaseEvaluator {
    rational_num: Vec<BigInt>,
    rational_den: BigInt,
    irrational: Vec<IrrationalChannel>,
}

#[derive(Clone, Debug)]
struct IrrationalChannel {
    num: Vec<BigInt>,
    fixed: BigInt,
    modulus: BigInt,
}

fn common_denominator<'a>(qs: impl Iterator<Item = &'a BigRational>) -> BigInt {
    qs.fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

fn numerators(qs: &[BigRational], den: &BigInt) -> Vec<BigInt> {
    qs.iter().map(|q| q.numer() * (den / q.denom())).collect()
}

fn horner(coeffs: &[BigInt], n: &BigInt) -> BigInt {
    coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * n + c)
}

impl PhaseEvaluator {
    fn new(p: &PhasePolynomial) -> Self {
        let mono = p.to_monomial();
        let rational: Vec<BigRational> = mono.coeffs.iter().map(|c| c.rational_part().clone()).collect();
        let rational_den = common_denominator(rational.iter());
        let rational_num = numerators(&rational, &rational_den);

        let mut per_gen: BTreeMap<Generator, Vec<BigRational>> = BTreeMap::new();
        for (j, c) in mono.coeffs.iter().enumerate() {
            for (g, q) in c.irrational_part() {
                let v = per_gen
                    .entry(g.clone())
                    .or_insert_with(|| vec![BigRational::zero(); mono.coeffs.len()]);
                v[j] = q.clone();
            }
        }
        let irrational = per_gen
            .into_iter()
            .map(|(g, qs)| {
                let den = common_denominator(qs.iter());
                IrrationalChannel {
                    num: numerators(&qs, &den),
                    fixed: g.fixed().clone(),
                    modulus: den << FRAC_BITS,
                }
            })
            .collect();
        PhaseEvaluator {
            rational_num,
            rational_den,
            irrational,
        }
    }

    /// `frac(p(n))` in `[0, 1)`.
    pub fn frac(&self, n: i64) -> f64 {
        let n = BigInt::from(n);
        let r = horner(&self.rational_num, &n).mod_floor(&self.rational_den);
        let mut x = ratio_f64(&r, &self.rational_den);
        for ch in &self.irrational {
            let v = (horner(&ch.num, &n) * &ch.fixed).mod_floor(&ch.modulus);
            x += ratio_f64(&v, &ch.modulus);
        }
        let x = x - x.floor();
        if x >= 1.0 {
            0.0
        } else {
            x
        }
    }

    /// `e(p(n))`.
    pub fn exp(&self, n: i64) -> num_complex::Complex64 {
        e_frac(self.frac(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::phase::GeneratorSet;

    fn gs() -> GeneratorSet {
        let mut gs = GeneratorSet::new();
        gs.declare("g1 = sqrt2 : 1.41421356237309504880").unwrap();
        gs.declare("g2 = sqrt3 : 1.73205080756887729352").unwrap();
        gs
    }

    #[test]
    fn basis_conversion_round_trip() {
        let gs = gs();
        let p = PhasePolynomial::new(
            vec![gs.parse("1/3").unwrap(), gs.parse("g1").unwrap(), gs.parse("1/2 + g2").unwrap()],
            Basis::Monomial,
        );
        let b = p.to_binomial();
        assert_eq!(b.basis(), Basis::Binomial);
        for t in -10..=10 {
            assert_eq!(p.eval_i64(t), b.eval_i64(t));
        }
        assert_eq!(b.to_monomial(), p);
    }

    #[test]
    fn reduction_preserves_values_mod_one() {
        let gs = gs();
        let p = PhasePolynomial::new(
            vec![gs.parse("7/3").unwrap(), gs.parse("5/2 + g1").unwrap(), gs.parse("-9/4").unwrap()],
            Basis::Binomial,
        );
        let r = p.reduce_mod_1();
        for t in -20..=20 {
            assert!(p.eval_i64(t).eq_mod_1(&r.eval_i64(t)));
        }
        assert!(p.eq_mod_1(&r));
    }

    #[test]
    fn compiled_matches_exact() {
        let gs = gs();
        let p = PhasePolynomial::new(
            vec![gs.parse("1/7").unwrap(), gs.parse("-1/3 + 2*g1").unwrap(), gs.parse("g2 - 1/5*g1").unwrap()],
            Basis::Monomial,
        );
        let ev = p.compile();
        for n in [-100_000i64, -17, -1, 0, 1, 2, 999, 123_456] {
            let exact = p.eval_i64(n).frac_f64();
            let fast = ev.frac(n);
            let d = (exact - fast).abs();
            assert!(d.min(1.0 - d) < 1e-12, "n={n}: {exact} vs {fast}");
        }
    }

    #[test]
    fn product_with_integral_polynomial() {
        let gs = gs();
        let p = PhasePolynomial::new(vec![gs.parse("1/2").unwrap(), gs.parse("g1").unwrap()], Basis::Monomial);
        let q = IntegralPolynomial::from_i64(&[0, 0, 1]); // C(t,2)
        let pq = p.mul_integral(&q);
        for t in -8..=8 {
            assert_eq!(pq.eval_i64(t), p.eval_i64(t).scale_int(&q.eval_i64(t)));
        }
    }

    #[test]
    fn irrational_flag_ignores_constant_term() {
        let gs = gs();
        let c = PhasePolynomial::new(vec![gs.parse("g1").unwrap(), gs.parse("1/2").unwrap()], Basis::Monomial);
        assert!(!c.has_irrational_nonconstant());
        let l = PhasePolynomial::new(vec![gs.parse("0").unwrap(), gs.parse("g1").unwrap()], Basis::Monomial);
        assert!(l.has_irrational_nonconstant());
        assert!(l.to_binomial().has_irrational_nonconstant());
    }
}
