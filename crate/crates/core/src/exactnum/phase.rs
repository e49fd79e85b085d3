//! Exact phases: elements of the rational span of 1 and a finite set of
//! declared irrational generators.
//!
//! Generators are assumed rationally independent of each other and of 1;
//! this is not checked. Each generator carries a fixed-point numeric value
//! with [`FRAC_BITS`] fractional bits, used only when a phase is turned into a
//! float.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Fractional bits carried by every generator value.
pub const FRAC_BITS: u32 = 256;

#[derive(Debug)]
struct GeneratorInner {
    name: String,
    label: String,
    decimal: String,
    fixed: BigInt,
}

/// A declared irrational generator such as `g1 = sqrt2 : 1.41421356237309504880`.
#[derive(Clone, Debug)]
pub struct Generator(Arc<GeneratorInner>);

impl PartialEq for Generator {
    fn eq(&self, other: &Self) -> bool {
        self.0.name == other.0.name
    }
}
impl Eq for Generator {}
impl PartialOrd for Generator {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Generator {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // g2 < g10
        (self.0.name.len(), &self.0.name).cmp(&(other.0.name.len(), &other.0.name))
    }
}
impl Hash for Generator {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.name.hash(state)
    }
}

impl Generator {
    /// Declares a generator. Known labels (`sqrtK`, `pi`, `golden`) are
    /// evaluated to [`FRAC_BITS`] bits and the decimal is checked against
    /// them; any other label takes its value from the decimal alone.
    pub fn new(name: &str, label: &str, decimal: &str) -> Result<Self> {
        if !is_ident(name) {
            return Err(Error::Parse(format!("bad generator name `{name}`")));
        }
        let dec = parse_decimal(decimal)?;
        let digits = decimal.split('.').nth(1).map_or(0, |f| f.trim().len()) as u32;
        let fixed = match known_constant(label)? {
            Some(fixed) => {
                let known = BigRational::new(fixed.clone(), BigInt::one() << FRAC_BITS);
                let tol = BigRational::new(BigInt::one(), BigInt::from(10u32).pow(digits));
                if (known - &dec).abs() > tol {
                    return Err(Error::Parse(format!(
                        "declared value {decimal} disagrees with {label}"
                    )));
                }
                fixed
            }
            None => round_fixed(&dec),
        };
        if fixed.is_zero() {
            return Err(Error::Parse(format!("generator `{name}` is zero")));
        }
        Ok(Generator(Arc::new(GeneratorInner {
            name: name.to_string(),
            label: label.to_string(),
            decimal: decimal.trim().to_string(),
            fixed,
        })))
    }

    /// `name = sqrtK`, with the decimal generated from the exact value.
    pub fn sqrt(name: &str, k: u64) -> Result<Self> {
        let label = format!("sqrt{k}");
        let fixed = known_constant(&label)?.expect("sqrt label");
        let decimal = fixed_to_decimal(&fixed, 30);
        Generator::new(name, &label, &decimal)
    }

    /// Parses `g1 = sqrt2 : 1.41421356237309504880`.
    pub fn declare(line: &str) -> Result<Self> {
        let (name, rest) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected `name = label : value` in `{line}`")))?;
        let (label, value) = rest
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected `label : value` in `{line}`")))?;
        Generator::new(name.trim(), label.trim(), value.trim())
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    pub fn decimal(&self) -> &str {
        &self.0.decimal
    }

    /// `round(value * 2^FRAC_BITS)`.
    pub fn fixed(&self) -> &BigInt {
        &self.0.fixed
    }

    pub fn to_f64(&self) -> f64 {
        ratio_f64(&self.0.fixed, &(BigInt::one() << FRAC_BITS))
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {} : {}", self.0.name, self.0.label, self.0.decimal)
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn round_fixed(q: &BigRational) -> BigInt {
    let scaled = q * BigRational::from_integer(BigInt::one() << FRAC_BITS);
    scaled.round().to_integer()
}

fn fixed_to_decimal(fixed: &BigInt, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let v = (fixed * &scale) >> FRAC_BITS;
    let (int, frac) = v.div_mod_floor(&scale);
    format!("{int}.{:0>width$}", frac.to_string(), width = digits as usize)
}

fn known_constant(label: &str) -> Result<Option<BigInt>> {
    if let Some(k) = label.strip_prefix("sqrt") {
        let k: u64 = k
            .parse()
            .map_err(|_| Error::Parse(format!("bad sqrt label `{label}`")))?;
        let r = k.sqrt();
        if r * r == k {
            return Err(Error::Parse(format!("{label} is rational")));
        }
        let v = (BigInt::from(k) << (2 * FRAC_BITS)).sqrt();
        return Ok(Some(v));
    }
    match label {
        "pi" => Ok(Some(pi_fixed())),
        "golden" | "phi" => {
            let s5 = (BigInt::from(5) << (2 * FRAC_BITS)).sqrt();
            Ok(Some(((BigInt::one() << FRAC_BITS) + s5) >> 1))
        }
        _ => Ok(None),
    }
}

fn arctan_inv(x: u64, bits: u32) -> BigInt {
    // sum (-1)^k / ((2k+1) x^(2k+1)) in fixed point
    let one = BigInt::one() << bits;
    let x2 = BigInt::from(x * x);
    let mut power = &one / BigInt::from(x);
    let mut total = BigInt::zero();
    let mut k = 0u64;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
        power /= &x2;
        k += 1;
    }
    total
}

fn pi_fixed() -> BigInt {
    let guard = 32;
    let bits = FRAC_BITS + guard;
    let pi = BigInt::from(16) * arctan_inv(5, bits) - BigInt::from(4) * arctan_inv(239, bits);
    (pi + (BigInt::one() << (guard - 1))) >> guard
}

/// Parses `3`, `-2/7`, `0.125` or `-1.5` into an exact rational.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad number `{s}`"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let denom = BigInt::from(10u32).pow(frac.len() as u32);
    let q = BigRational::new(digits, denom);
    Ok(if neg { -q } else { q })
}

/// `a / b` as an f64 for big integers of any size (b > 0).
pub(crate) fn ratio_f64(a: &BigInt, b: &BigInt) -> f64 {
    let shift = b.bits().max(a.bits()).saturating_sub(900);
    let a = a >> shift;
    let b = b >> shift;
    a.to_f64().unwrap_or(f64::NAN) / b.to_f64().unwrap_or(f64::NAN)
}

/// `frac(q)` in `[0, 1)` as an f64.
pub(crate) fn frac_rational(q: &BigRational) -> f64 {
    let r = q.numer().mod_floor(q.denom());
    ratio_f64(&r, q.denom())
}

/// An exact phase `rational + Σ c_g · g`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PhaseScalar {
    rational: BigRational,
    irrational: BTreeMap<Generator, BigRational>,
}

impl PhaseScalar {
    pub fn zero() -> Self {
        PhaseScalar {
            rational: BigRational::zero(),
            irrational: BTreeMap::new(),
        }
    }

    pub fn from_rational(q: BigRational) -> Self {
        PhaseScalar {
            rational: q,
            irrational: BTreeMap::new(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()))
    }

    /// `num / den`.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(num.into(), den.into()))
    }

    pub fn generator(g: &Generator) -> Self {
        Self::generator_times(g, BigRational::one())
    }

    pub fn generator_times(g: &Generator, c: BigRational) -> Self {
        let mut irrational = BTreeMap::new();
        if !c.is_zero() {
            irrational.insert(g.clone(), c);
        }
        PhaseScalar {
            rational: BigRational::zero(),
            irrational,
        }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn irrational_part(&self) -> &BTreeMap<Generator, BigRational> {
        &self.irrational
    }

    /// The scalar with its rational part dropped.
    pub fn irrational_only(&self) -> PhaseScalar {
        PhaseScalar {
            rational: BigRational::zero(),
            irrational: self.irrational.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.irrational.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.irrational.is_empty()
    }

    pub fn is_integer(&self) -> bool {
        self.is_rational() && self.rational.is_integer()
    }

    pub fn add(&self, other: &PhaseScalar) -> PhaseScalar {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &PhaseScalar) {
        self.rational += &other.rational;
        for (g, c) in &other.irrational {
            let entry = self.irrational.entry(g.clone()).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                self.irrational.remove(g);
            }
        }
    }

    pub fn sub(&self, other: &PhaseScalar) -> PhaseScalar {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PhaseScalar {
        PhaseScalar {
            rational: -&self.rational,
            irrational: self.irrational.iter().map(|(g, c)| (g.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, q: &BigRational) -> PhaseScalar {
        if q.is_zero() {
            return PhaseScalar::zero();
        }
        PhaseScalar {
            rational: &self.rational * q,
            irrational: self.irrational.iter().map(|(g, c)| (g.clone(), c * q)).collect(),
        }
    }

    pub fn scale_int(&self, n: &BigInt) -> PhaseScalar {
        self.scale(&BigRational::from_integer(n.clone()))
    }

    /// Product of two phases; at least one factor must be rational.
    pub fn mul(&self, other: &PhaseScalar) -> Result<PhaseScalar> {
        if other.is_rational() {
            Ok(self.scale(&other.rational))
        } else if self.is_rational() {
            Ok(other.scale(&self.rational))
        } else {
            let l = self.irrational.keys().next().expect("irrational");
            let r = other.irrational.keys().next().expect("irrational");
            Err(Error::NonClosedProduct {
                left: l.name().to_string(),
                right: r.name().to_string(),
            })
        }
    }

    /// Rational part reduced into `[0, 1)`.
    pub fn reduce_mod_1(&self) -> PhaseScalar {
        let fl = self.rational.floor();
        PhaseScalar {
            rational: &self.rational - fl,
            irrational: self.irrational.clone(),
        }
    }

    pub fn eq_mod_1(&self, other: &PhaseScalar) -> bool {
        let d = self.sub(other);
        d.is_integer()
    }

    /// The real value (not reduced), from the declared generator values.
    pub fn to_f64(&self) -> f64 {
        let mut v = self.rational.to_f64().unwrap_or(f64::NAN);
        for (g, c) in &self.irrational {
            v += c.to_f64().unwrap_or(f64::NAN) * g.to_f64();
        }
        v
    }

    /// Fractional part in `[0, 1)`, exact up to the generator precision no
    /// matter how large the coefficients are.
    pub fn frac_f64(&self) -> f64 {
        let mut x = frac_rational(&self.rational);
        for (g, c) in &self.irrational {
            let num = c.numer() * g.fixed();
            let den = c.denom() << FRAC_BITS;
            let r = num.mod_floor(&den);
            x += ratio_f64(&r, &den);
        }
        let x = x - x.floor();
        if x >= 1.0 {
            0.0
        } else {
            x
        }
    }

    /// `floor(frac(self) · 2^FRAC_BITS)` up to one unit per generator.
    pub fn frac_fixed(&self) -> BigInt {
        let one = BigInt::one() << FRAC_BITS;
        let r = self.rational.numer().mod_floor(self.rational.denom());
        let mut acc = (r << FRAC_BITS) / self.rational.denom();
        for (g, c) in &self.irrational {
            let den = c.denom() << FRAC_BITS;
            acc += (c.numer() * g.fixed()).mod_floor(&den) / c.denom();
        }
        acc.mod_floor(&one)
    }

    /// `e(self) = exp(2πi·self)`.
    pub fn exp_2pi_i(&self) -> num_complex::Complex64 {
        e_frac(self.frac_f64())
    }
}

/// `exp(2πi·x)`.
pub fn e_frac(x: f64) -> num_complex::Complex64 {
    let (s, c) = (2.0 * std::f64::consts::PI * x).sin_cos();
    num_complex::Complex64::new(c, s)
}

impl serde::Serialize for PhaseScalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for PhaseScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if !self.rational.is_zero() || self.irrational.is_empty() {
            write!(f, "{}", self.rational)?;
            first = false;
        }
        for (g, c) in &self.irrational {
            let (neg, mag) = if c.is_negative() { (true, -c) } else { (false, c.clone()) };
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            if mag.is_one() {
                write!(f, "{}", g.name())?;
            } else {
                write!(f, "{}*{}", mag, g.name())?;
            }
            first = false;
        }
        Ok(())
    }
}

impl std::ops::Add for &PhaseScalar {
    type Output = PhaseScalar;
    fn add(self, rhs: &PhaseScalar) -> PhaseScalar {
        PhaseScalar::add(self, rhs)
    }
}

impl std::ops::Sub for &PhaseScalar {
    type Output = PhaseScalar;
    fn sub(self, rhs: &PhaseScalar) -> PhaseScalar {
        PhaseScalar::sub(self, rhs)
    }
}

impl std::ops::Neg for &PhaseScalar {
    type Output = PhaseScalar;
    fn neg(self) -> PhaseScalar {
        PhaseScalar::neg(self)
    }
}

/// Declared generators and the products between them that are known to stay
/// inside the span.
#[derive(Clone, Debug, Default)]
pub struct GeneratorSet {
    gens: BTreeMap<String, Generator>,
    products: HashMap<(Generator, Generator), PhaseScalar>,
}

impl GeneratorSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, g: Generator) -> Result<()> {
        if self.gens.contains_key(g.name()) {
            return Err(Error::Parse(format!("generator `{}` declared twice", g.name())));
        }
        self.gens.insert(g.name().to_string(), g);
        Ok(())
    }

    /// Declares a generator from `g1 = sqrt2 : 1.41421356237309504880`.
    pub fn declare(&mut self, line: &str) -> Result<Generator> {
        let g = Generator::declare(line)?;
        self.insert(g.clone())?;
        Ok(g)
    }

    /// Declares a product such as `g1*g1 = 2`.
    pub fn declare_product(&mut self, line: &str) -> Result<()> {
        let (lhs, rhs) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected `gA*gB = value` in `{line}`")))?;
        let (a, b) = lhs
            .split_once('*')
            .ok_or_else(|| Error::Parse(format!("expected `gA*gB` in `{line}`")))?;
        let a = self.get(a.trim())?.clone();
        let b = self.get(b.trim())?.clone();
        let value = self.parse(rhs)?;
        self.products.insert((a.clone(), b.clone()), value.clone());
        self.products.insert((b, a), value);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Generator> {
        self.gens
            .get(name)
            .ok_or_else(|| Error::Parse(format!("undeclared generator `{name}`")))
    }

    pub fn generators(&self) -> impl Iterator<Item = &Generator> {
        self.gens.values()
    }

    /// Product using the declared generator products.
    pub fn mul(&self, a: &PhaseScalar, b: &PhaseScalar) -> Result<PhaseScalar> {
        if a.is_rational() || b.is_rational() {
            return a.mul(b);
        }
        let mut out = PhaseScalar::from_rational(&a.rational * &b.rational);
        out.add_assign(&PhaseScalar {
            rational: BigRational::zero(),
            irrational: a.irrational.iter().map(|(g, c)| (g.clone(), c * &b.rational)).collect(),
        });
        out.add_assign(&PhaseScalar {
            rational: BigRational::zero(),
            irrational: b.irrational.iter().map(|(g, c)| (g.clone(), c * &a.rational)).collect(),
        });
        for (ga, ca) in &a.irrational {
            for (gb, cb) in &b.irrational {
                let prod = self
                    .products
                    .get(&(ga.clone(), gb.clone()))
                    .ok_or_else(|| Error::NonClosedProduct {
                        left: ga.name().to_string(),
                        right: gb.name().to_string(),
                    })?;
                out.add_assign(&prod.scale(&(ca * cb)));
            }
        }
        Ok(out)
    }

    /// Parses a literal such as `1/3 + 2*g1 - 0.5*g2`.
    pub fn parse(&self, s: &str) -> Result<PhaseScalar> {
        parse_scalar(s, |name| self.get(name).cloned())
    }
}

/// Parses a purely rational literal such as `-3/4`.
pub fn parse_rational_scalar(s: &str) -> Result<PhaseScalar> {
    parse_scalar(s, |name| Err(Error::Parse(format!("undeclared generator `{name}`"))))
}

fn parse_scalar(s: &str, lookup: impl Fn(&str) -> Result<Generator>) -> Result<PhaseScalar> {
    let src = s.trim();
    if src.is_empty() {
        return Err(Error::Parse("empty phase literal".into()));
    }
    // split into signed terms, keeping a sign that follows `*` or `/` attached
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut current = String::new();
    let mut negative = false;
    for ch in src.chars().filter(|c| !c.is_whitespace()) {
        if ch == '+' || ch == '-' {
            if current.is_empty() {
                negative ^= ch == '-';
            } else if matches!(current.chars().last(), Some('*' | '/')) {
                current.push(ch);
            } else {
                terms.push((negative, std::mem::take(&mut current)));
                negative = ch == '-';
            }
        } else {
            current.push(ch);
        }
    }
    terms.push((negative, current));

    let mut out = PhaseScalar::zero();
    for (neg, term) in terms {
        if term.is_empty() {
            return Err(Error::Parse(format!("bad phase literal `{s}`")));
        }
        let mut coeff = BigRational::one();
        let mut generator: Option<Generator> = None;
        for factor in term.split('*') {
            if factor.is_empty() {
                return Err(Error::Parse(format!("bad phase literal `{s}`")));
            }
            if is_ident(factor) {
                if generator.is_some() {
                    return Err(Error::Parse(format!(
                        "product of generators in literal `{s}`"
                    )));
                }
                generator = Some(lookup(factor)?);
            } else {
                coeff *= parse_decimal(factor)?;
            }
        }
        if neg {
            coeff = -coeff;
        }
        let piece = match generator {
            Some(g) => PhaseScalar::generator_times(&g, coeff),
            None => PhaseScalar::from_rational(coeff),
        };
        out.add_assign(&piece);
    }
    Ok(out)
}
