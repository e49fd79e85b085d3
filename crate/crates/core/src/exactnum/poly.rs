//! Integer polynomials in two bases.
//!
//! [`ZPoly`] is the usual monomial basis with integer coefficients, used for
//! characteristic polynomials and cyclotomic division. [`IntegralPolynomial`]
//! stores integer-valued polynomials in the binomial basis
//! `C(t,0), C(t,1), ...`, where integer coefficients are exactly the
//! polynomials taking integer values on the integers.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

fn trim<T: Zero>(v: &mut Vec<T>) {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
}

/// Generalized binomial coefficient `C(t, j) = t(t-1)...(t-j+1)/j!`, valid
/// for negative `t`.
pub fn binomial(t: &BigInt, j: usize) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..j {
        num *= t - BigInt::from(i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// Row `j` holds the monomial coefficients of `C(t, j)`, for `j <= deg`.
pub fn binomial_to_monomial(deg: usize) -> Vec<Vec<BigRational>> {
    let mut rows = Vec::with_capacity(deg + 1);
    // falling factorial t(t-1)...(t-j+1), ascending coefficients
    let mut falling: Vec<BigInt> = vec![BigInt::one()];
    let mut fact = BigInt::one();
    for j in 0..=deg {
        if j > 0 {
            fact *= BigInt::from(j);
        }
        rows.push(
            falling
                .iter()
                .map(|c| BigRational::new(c.clone(), fact.clone()))
                .collect(),
        );
        // multiply by (t - j)
        let mut next = vec![BigInt::zero(); falling.len() + 1];
        for (i, c) in falling.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * BigInt::from(j);
        }
        falling = next;
    }
    rows
}

/// Forward differences `Δ^j f(0)` of the values `f(0), f(1), ...`: the
/// binomial-basis coefficients of the interpolating polynomial.
pub fn forward_differences<T: Clone>(values: &[T], sub: impl Fn(&T, &T) -> T) -> Vec<T> {
    let mut row = values.to_vec();
    let mut out = Vec::with_capacity(values.len());
    while !row.is_empty() {
        out.push(row[0].clone());
        row = row.windows(2).map(|w| sub(&w[1], &w[0])).collect();
    }
    out
}

/// Monomial-basis polynomial with integer coefficients (ascending powers).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ZPoly {
    coeffs: Vec<BigInt>,
}

impl ZPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        trim(&mut coeffs);
        ZPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        ZPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn one() -> Self {
        ZPoly::from_i64(&[1])
    }

    /// `x^k - 1`.
    pub fn x_pow_minus_one(k: usize) -> Self {
        let mut c = vec![BigInt::zero(); k + 1];
        c[0] = BigInt::from(-1);
        c[k] = BigInt::one();
        ZPoly::new(c)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn mul(&self, other: &ZPoly) -> ZPoly {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return ZPoly::default();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ZPoly::new(out)
    }

    /// Quotient and remainder by a monic divisor.
    pub fn div_rem_monic(&self, divisor: &ZPoly) -> (ZPoly, ZPoly) {
        let dd = divisor.degree().expect("nonzero divisor");
        assert!(divisor.leading().is_some_and(One::is_one), "divisor must be monic");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (ZPoly::default(), self.clone());
        }
        let mut quot = vec![BigInt::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = rem[i + dd].clone();
            if c.is_zero() {
                continue;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= &c * d;
            }
            quot[i] = c;
        }
        (ZPoly::new(quot), ZPoly::new(rem))
    }

    /// Exact quotient by a monic divisor, if it divides.
    pub fn div_exact_monic(&self, divisor: &ZPoly) -> Option<ZPoly> {
        let (q, r) = self.div_rem_monic(divisor);
        r.coeffs.is_empty().then_some(q)
    }

    pub fn to_rational(&self) -> Vec<BigRational> {
        self.coeffs.iter().map(|c| BigRational::from_integer(c.clone())).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

impl fmt::Display for ZPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_mag = !mag.is_one() || i == 0;
            if show_mag {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for ZPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Rational polynomial helpers (monomial basis, ascending).
pub(crate) mod qpoly {
    use super::*;

    pub fn normalize(mut p: Vec<BigRational>) -> Vec<BigRational> {
        trim(&mut p);
        p
    }

    pub fn derivative(p: &[BigRational]) -> Vec<BigRational> {
        normalize(
            p.iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let n = a.len().max(b.len());
        normalize(
            (0..n)
                .map(|i| {
                    a.get(i).cloned().unwrap_or_else(BigRational::zero)
                        - b.get(i).cloned().unwrap_or_else(BigRational::zero)
                })
                .collect(),
        )
    }

    pub fn div_rem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
        let b = normalize(b.to_vec());
        let db = b.len() - 1;
        let mut rem = normalize(a.to_vec());
        if rem.len() <= db {
            return (Vec::new(), rem);
        }
        let mut quot = vec![BigRational::zero(); rem.len() - db];
        let lead = b[db].clone();
        for i in (0..quot.len()).rev() {
            let c = &rem[i + db] / &lead;
            if c.is_zero() {
                continue;
            }
            for (j, d) in b.iter().enumerate() {
                rem[i + j] -= &c * d;
            }
            quot[i] = c;
        }
        (normalize(quot), normalize(rem))
    }

    pub fn monic(p: Vec<BigRational>) -> Vec<BigRational> {
        let p = normalize(p);
        match p.last().cloned() {
            Some(l) => p.into_iter().map(|c| c / &l).collect(),
            None => p,
        }
    }

    pub fn gcd(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let mut a = normalize(a.to_vec());
        let mut b = normalize(b.to_vec());
        while !b.is_empty() {
            let (_, r) = div_rem(&a, &b);
            a = b;
            b = r;
        }
        monic(a)
    }

    /// Squarefree decomposition (Yun): pairs `(factor, multiplicity)` with
    /// monic squarefree factors.
    pub fn squarefree(p: &[BigRational]) -> Vec<(Vec<BigRational>, usize)> {
        let f = monic(p.to_vec());
        if f.len() <= 1 {
            return Vec::new();
        }
        let df = derivative(&f);
        let a0 = gcd(&f, &df);
        let mut b = div_rem(&f, &a0).0;
        let c = div_rem(&df, &a0).0;
        let mut d = sub(&c, &derivative(&b));
        let mut out = Vec::new();
        let mut i = 1;
        while b.len() > 1 {
            let a = gcd(&b, &d);
            let nb = div_rem(&b, &a).0;
            let c = div_rem(&d, &a).0;
            d = sub(&c, &derivative(&nb));
            if a.len() > 1 {
                out.push((a, i));
            }
            b = nb;
            i += 1;
        }
        out
    }
}

/// Integer-valued polynomial in the binomial basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IntegralPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntegralPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        trim(&mut coeffs);
        IntegralPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        IntegralPolynomial::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntegralPolynomial::default()
    }

    pub fn constant(c: BigInt) -> Self {
        IntegralPolynomial::new(vec![c])
    }

    /// The polynomial `t`.
    pub fn identity() -> Self {
        IntegralPolynomial::from_i64(&[0, 1])
    }

    /// Interpolates the values `f(0), ..., f(k)`.
    pub fn from_values(values: &[BigInt]) -> Self {
        IntegralPolynomial::new(forward_differences(values, |a, b| a - b))
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn eval(&self, t: &BigInt) -> BigInt {
        // Horner in the binomial basis:
        // Σ c_j C(t,j) = c_0 + t/1 (c_1 + (t-1)/2 (c_2 + ...)); evaluated via
        // explicit binomials to stay in the integers
        let mut acc = BigInt::zero();
        let mut b = BigInt::one();
        for (j, c) in self.coeffs.iter().enumerate() {
            if j > 0 {
                b = b * (t - BigInt::from(j - 1)) / BigInt::from(j);
            }
            if !c.is_zero() {
                acc += c * &b;
            }
        }
        acc
    }

    pub fn eval_i64(&self, t: i64) -> BigInt {
        self.eval(&BigInt::from(t))
    }

    /// Evaluation with i128 arithmetic when it cannot overflow.
    pub fn eval_i128(&self, t: i64) -> Option<i128> {
        let t = t as i128;
        let mut acc: i128 = 0;
        let mut b: i128 = 1;
        for (j, c) in self.coeffs.iter().enumerate() {
            if j > 0 {
                b = b.checked_mul(t - (j as i128 - 1))? / j as i128;
            }
            let c = c.to_i128()?;
            acc = acc.checked_add(c.checked_mul(b)?)?;
        }
        Some(acc)
    }

    pub fn add(&self, other: &IntegralPolynomial) -> IntegralPolynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        IntegralPolynomial::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).cloned().unwrap_or_default()
                        + other.coeffs.get(i).cloned().unwrap_or_default()
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &IntegralPolynomial) -> IntegralPolynomial {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> IntegralPolynomial {
        IntegralPolynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, c: &BigInt) -> IntegralPolynomial {
        IntegralPolynomial::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Product, through exact interpolation of the values.
    pub fn mul(&self, other: &IntegralPolynomial) -> IntegralPolynomial {
        let (Some(da), Some(db)) = (self.degree(), other.degree()) else {
            return IntegralPolynomial::zero();
        };
        let values: Vec<BigInt> = (0..=(da + db) as i64)
            .map(|t| self.eval_i64(t) * other.eval_i64(t))
            .collect();
        IntegralPolynomial::from_values(&values)
    }

    /// `p(q(t))`, through exact interpolation.
    pub fn compose(&self, inner: &IntegralPolynomial) -> IntegralPolynomial {
        let deg = self.degree().unwrap_or(0) * inner.degree().unwrap_or(0);
        let values: Vec<BigInt> = (0..=deg as i64).map(|t| self.eval(&inner.eval_i64(t))).collect();
        IntegralPolynomial::from_values(&values)
    }

    pub fn to_monomial(&self) -> Vec<BigRational> {
        let Some(deg) = self.degree() else {
            return Vec::new();
        };
        let table = binomial_to_monomial(deg);
        let mut out = vec![BigRational::zero(); deg + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            for (i, m) in table[j].iter().enumerate() {
                out[i] += m * BigRational::from_integer(c.clone());
            }
        }
        qpoly::normalize(out)
    }
}

impl fmt::Display for IntegralPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| match j {
                0 => c.to_string(),
                _ => format!("{c}*C(t,{j})"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Square matrix whose entries are integral polynomials in `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    dim: usize,
    entries: Vec<IntegralPolynomial>,
}

impl PolyMatrix {
    pub fn new(dim: usize, entries: Vec<IntegralPolynomial>) -> Self {
        assert_eq!(entries.len(), dim * dim);
        PolyMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &IntegralPolynomial {
        &self.entries[i * self.dim + j]
    }

    pub fn eval(&self, t: &BigInt) -> super::IntMatrix {
        super::IntMatrix::new(self.dim, self.entries.iter().map(|p| p.eval(t)).collect())
            .expect("square")
    }

    /// `P(t) v` as a vector of integral polynomials.
    pub fn apply(&self, v: &[BigInt]) -> Vec<IntegralPolynomial> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim).fold(IntegralPolynomial::zero(), |acc, j| {
                    acc.add(&self.get(i, j).scale(&v[j]))
                })
            })
            .collect()
    }

    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(IntegralPolynomial::is_constant)
    }
}
