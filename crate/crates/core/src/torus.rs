//! Toral automorphisms: exact orbits, character sequences and their residue
//! polynomial forms, and Weyl exponential-sum tests.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::DD;
use crate::error::{Error, Result};
use crate::exactnum::{
    classify_entropy, e_frac, Basis, IntMatrix, IntegralPolynomial, PhasePolynomial, PhaseScalar, UnipotentExpansion,
    Verdict, FRAC_BITS,
};
use crate::nilseq::{interleave, poly_exp, SequenceStream, Tag};
use crate::sum::{par_tree_sum, prefix_sums, SumMethod};

/// A point of `T^d`, coordinates reduced into `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusPoint {
    coords: Vec<PhaseScalar>,
}

impl TorusPoint {
    pub fn new(coords: Vec<PhaseScalar>) -> Self {
        TorusPoint {
            coords: coords.iter().map(PhaseScalar::reduce_mod_1).collect(),
        }
    }

    pub fn coords(&self) -> &[PhaseScalar] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// `x ↦ e(⟨v, x⟩)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Character(pub Vec<i64>);

impl Character {
    pub fn pair(&self, x: &[PhaseScalar]) -> PhaseScalar {
        let mut acc = PhaseScalar::zero();
        for (v, c) in self.0.iter().zip(x) {
            if *v != 0 {
                acc.add_assign(&c.scale_int(&BigInt::from(*v)));
            }
        }
        acc
    }
}

fn apply(a: &IntMatrix, x: &[PhaseScalar]) -> Vec<PhaseScalar> {
    (0..a.dim())
        .map(|i| {
            let mut acc = PhaseScalar::zero();
            for (j, c) in x.iter().enumerate() {
                let e = a.get(i, j);
                if !e.is_zero() {
                    acc.add_assign(&c.scale_int(e));
                }
            }
            acc.reduce_mod_1()
        })
        .collect()
}

fn check_dim(a: &IntMatrix, got: usize) -> Result<()> {
    if a.dim() != got {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got,
        });
    }
    Ok(())
}

/// `A^n x mod 1`, exact; negative `n` uses the exact inverse.
pub fn orbit_point(a: &IntMatrix, x: &TorusPoint, n: i64) -> Result<TorusPoint> {
    a.require_gl()?;
    check_dim(a, x.dim())?;
    let an = a.pow_signed(n)?;
    Ok(TorusPoint {
        coords: apply(&an, &x.coords),
    })
}

/// Residue-class phase polynomials `f_r(t) = ⟨v, P_r(t) x⟩`.
pub fn character_polynomials(exp: &UnipotentExpansion, x: &TorusPoint, v: &Character) -> Vec<PhasePolynomial> {
    let d = x.dim();
    exp.residues()
        .iter()
        .map(|pr| {
            let mut f = PhasePolynomial::zero();
            for l in 0..d {
                let q = (0..d).fold(IntegralPolynomial::zero(), |acc, j| {
                    acc.add(&pr.get(j, l).scale(&BigInt::from(v.0[j])))
                });
                if !q.is_zero() {
                    f = f.add(&PhasePolynomial::from_integral(&q, &x.coords[l]));
                }
            }
            f.reduce_mod_1()
        })
        .collect()
}

/// Character sequence `a_n = e(⟨v, A^n x⟩)`.
#[derive(Clone, Debug)]
pub struct CharacterSeq {
    pub stream: SequenceStream,
    /// Unipotence order (zero entropy only).
    pub m: Option<u64>,
    /// `f_r` for `r = 0..m` (zero entropy only).
    pub residue_polys: Option<Vec<PhasePolynomial>>,
}

pub fn character_seq(a: &IntMatrix, x: &TorusPoint, v: &Character) -> Result<CharacterSeq> {
    check_dim(a, x.dim())?;
    check_dim(a, v.0.len())?;
    let report = classify_entropy(a)?;
    if report.verdict == Verdict::ZeroEntropy {
        let m = report.m.expect("zero entropy carries m");
        let exp = UnipotentExpansion::new(a, m)?;
        let polys = character_polynomials(&exp, x, v);
        let comps: Vec<SequenceStream> = polys.iter().map(poly_exp).collect();
        let stream = interleave(&comps, m as usize)?.with_note(format!("e(<{:?}, A^n x>)", v.0));
        return Ok(CharacterSeq {
            stream,
            m: Some(m),
            residue_polys: Some(polys),
        });
    }
    let (a, x, v) = (a.clone(), x.clone(), v.clone());
    let stream = SequenceStream::new(
        move |n| {
            let an = a.pow_signed(n).expect("unimodular");
            v.pair(&apply(&an, &x.coords)).exp_2pi_i()
        },
        Some(1.0),
        Tag::Unknown,
        "character of a positive-entropy orbit",
    );
    Ok(CharacterSeq {
        stream,
        m: None,
        residue_polys: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolyFormReport {
    pub m: u64,
    pub checked: usize,
    pub residue_polys: Vec<String>,
}

/// Checks `⟨v, A^n x⟩ ≡ f_r(t) (mod 1)` for `n = tm + r` over `range`, with
/// the orbit side computed by exact step-by-step iteration.
pub fn verify_polynomial_form(
    a: &IntMatrix,
    x: &TorusPoint,
    v: &Character,
    range: RangeInclusive<i64>,
) -> Result<PolyFormReport> {
    check_dim(a, x.dim())?;
    check_dim(a, v.0.len())?;
    let report = classify_entropy(a)?;
    let m = report
        .m
        .ok_or_else(|| Error::Invalid("polynomial form needs a zero-entropy matrix".into()))?;
    let exp = UnipotentExpansion::new(a, m)?;
    let polys = character_polynomials(&exp, x, v);
    let inv = a.inverse_unimodular()?;
    let (lo, hi) = (*range.start(), *range.end());
    let mut checked = 0;
    let mut check = |n: i64, y: &[PhaseScalar]| -> Result<()> {
        let (t, r) = exp.split(n);
        if !v.pair(y).eq_mod_1(&polys[r as usize].eval_i64(t)) {
            return Err(Error::MismatchAt(n));
        }
        checked += 1;
        Ok(())
    };
    let mut y = x.coords.clone();
    for n in 0..=hi.max(0) {
        if n > 0 {
            y = apply(a, &y);
        }
        if n >= lo {
            check(n, &y)?;
        }
    }
    let mut y = x.coords.clone();
    for n in (lo.min(0)..0).rev() {
        y = apply(&inv, &y);
        if n <= hi {
            check(n, &y)?;
        }
    }
    Ok(PolyFormReport {
        m,
        checked,
        residue_polys: polys.iter().map(ToString::to_string).collect(),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    /// Exact phases from big-integer evaluation of every term.
    #[default]
    Exact,
    /// Double-double forward differences.
    Fast,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub re: f64,
    pub im: f64,
    /// `(1/(2N+1)) |Σ_{|n|≤N} e(k p(n))|`
    pub abs_avg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylHarmonic {
    pub k: i64,
    /// Some non-constant coefficient of `k·p` is irrational.
    pub expect_zero: bool,
    pub rows: Vec<WeylRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylReport {
    pub polynomial: String,
    pub precision: Precision,
    pub harmonics: Vec<WeylHarmonic>,
}

/// `frac(P(n))` for `n = 0..len` by double-double forward differences.
fn forward_phases(p: &PhasePolynomial, len: usize) -> Vec<f64> {
    let b = p.to_binomial();
    let mut state: Vec<DD> = b.coeffs().iter().map(|c| DD::from_fixed(&c.frac_fixed(), FRAC_BITS)).collect();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(state.first().map_or(0.0, |v| v.to_f64()));
        for j in 0..state.len().saturating_sub(1) {
            state[j] = state[j].add(state[j + 1]).frac();
        }
    }
    out
}

/// `e(P(n))` for the first `len` integers of the two-sided order.
pub fn two_sided_exps(p: &PhasePolynomial, len: usize, precision: Precision) -> Vec<Complex64> {
    match precision {
        Precision::Exact => {
            let ev = p.compile();
            (0..len)
                .into_par_iter()
                .map(|i| ev.exp(crate::sum::two_sided_value(i)))
                .collect()
        }
        Precision::Fast => {
            let half = len / 2 + 1;
            let reflected = p.compose(&IntegralPolynomial::from_i64(&[0, -1]));
            let (pos, neg) = rayon::join(|| forward_phases(p, half), || forward_phases(&reflected, half));
            (0..len)
                .into_par_iter()
                .map(|i| {
                    let n = crate::sum::two_sided_value(i);
                    let x = if n >= 0 { pos[n as usize] } else { neg[(-n) as usize] };
                    e_frac(x)
                })
                .collect()
        }
    }
}

/// Two-sided Weyl averages for each harmonic at each checkpoint.
pub fn weyl_test(
    p: &PhasePolynomial,
    harmonics: &[i64],
    checkpoints: &[u64],
    precision: Precision,
    method: SumMethod,
) -> Result<WeylReport> {
    if harmonics.contains(&0) {
        return Err(Error::Invalid("harmonics must be nonzero".into()));
    }
    let max = checkpoints.iter().copied().max().unwrap_or(0) as usize;
    let cps: Vec<usize> = checkpoints.iter().map(|&c| 2 * c as usize + 1).collect();
    let harmonics = harmonics
        .iter()
        .map(|&k| {
            let kp = p.scale_int(&BigInt::from(k));
            let vals = two_sided_exps(&kp, 2 * max + 1, precision);
            let sums = prefix_sums(&vals, &cps, method);
            let rows = checkpoints
                .iter()
                .zip(sums)
                .map(|(&n, s)| {
                    let avg = s / (2 * n + 1) as f64;
                    WeylRow {
                        n,
                        re: avg.re,
                        im: avg.im,
                        abs_avg: avg.norm(),
                    }
                })
                .collect();
            WeylHarmonic {
                k,
                expect_zero: kp.has_irrational_nonconstant(),
                rows,
            }
        })
        .collect();
    Ok(WeylReport {
        polynomial: p.to_string(),
        precision,
        harmonics,
    })
}

/// Exact periodicity data for a rational-coefficient phase polynomial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodReport {
    pub k: i64,
    /// `L` with `k·p(n + L) ≡ k·p(n) (mod 1)`, verified as a polynomial identity.
    pub period: u64,
    /// Common denominator `Q` of the values `k·p(n) mod 1`.
    pub denominator: u64,
    /// Start and length of the checked window (a whole number of periods).
    pub window_start: i64,
    pub window_len: u64,
    /// Residue histogram of the window equals `(window_len / L)` times the
    /// histogram of one period.
    pub histogram_matches: bool,
    pub period_mean: [f64; 2],
    pub window_mean: [f64; 2],
}

/// Histogram of `Q · frac(P(n))` over `n ∈ [start, start + len)`.
fn residue_histogram(p: &PhasePolynomial, q: &BigInt, start: i64, len: u64) -> BTreeMap<u64, u64> {
    let mut h = BTreeMap::new();
    for n in start..start + len as i64 {
        let v = p.eval_i64(n);
        let r = v.rational_part();
        let num = (r.numer() * q / r.denom()).mod_floor(q);
        *h.entry(num.to_u64().expect("residue fits")).or_insert(0) += 1;
    }
    h
}

fn histogram_mean(h: &BTreeMap<u64, u64>, q: u64, len: u64) -> Complex64 {
    let terms: Vec<Complex64> = h
        .iter()
        .map(|(&r, &c)| e_frac(r as f64 / q as f64) * (c as f64 / len as f64))
        .collect();
    // frequencies are correctly rounded quotients, so equal histograms up to
    // scaling give identical terms
    par_tree_sum(&terms, SumMethod::Pairwise)
}

/// Period of `e(k p(n))` for rational `p` and the exact window check:
/// a centred window of `repeats` periods has exactly `repeats` times the
/// residue histogram of one period, hence the same mean.
pub fn rational_period_check(p: &PhasePolynomial, k: i64, repeats: u64, max_period: u64) -> Result<PeriodReport> {
    let kp = p.scale_int(&BigInt::from(k)).reduce_mod_1();
    if !kp.is_rational() {
        return Err(Error::NotRational);
    }
    let mut period = BigInt::one();
    let mut denom = BigInt::one();
    let mut fact = BigInt::one();
    for (j, c) in kp.coeffs().iter().enumerate() {
        if j > 0 {
            fact *= BigInt::from(j);
        }
        let den = c.rational_part().denom().clone();
        denom = denom.lcm(&den);
        if j > 0 && !c.is_zero() {
            period = period.lcm(&(&den * &fact));
        }
    }
    let l = period
        .to_u64()
        .filter(|&l| l <= max_period)
        .ok_or_else(|| Error::Invalid(format!("period {period} exceeds {max_period}")))?;
    let shifted = kp.compose(&IntegralPolynomial::from_i64(&[l as i64, 1]));
    let diff = shifted.sub(&kp);
    if !diff.to_binomial().coeffs().iter().all(PhaseScalar::is_integer) {
        return Err(Error::Invalid(format!("{l} is not a period")));
    }
    let q = denom.to_u64().ok_or_else(|| Error::Invalid("denominator too large".into()))?;
    let qb = BigInt::from(q);
    let one = residue_histogram(&kp, &qb, 0, l);
    let window_len = l * repeats;
    let window_start = -((window_len / 2) as i64);
    let win = residue_histogram(&kp, &qb, window_start, window_len);
    let scaled: BTreeMap<u64, u64> = one.iter().map(|(&r, &c)| (r, c * repeats)).collect();
    let pm = histogram_mean(&one, q, l);
    let wm = histogram_mean(&win, q, window_len);
    Ok(PeriodReport {
        k,
        period: l,
        denominator: q,
        window_start,
        window_len,
        histogram_matches: win == scaled,
        period_mean: [pm.re, pm.im],
        window_mean: [wm.re, wm.im],
    })
}

/// Polynomial with monomial coefficients `coeffs`, as a convenience for
/// harmonics and tests.
pub fn monomial(coeffs: Vec<PhaseScalar>) -> PhasePolynomial {
    PhasePolynomial::new(coeffs, Basis::Monomial)
}
