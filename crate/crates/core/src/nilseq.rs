//! Tagged bounded sequences on `Z` and the explicit nilsequence constructors.
//!
//! Membership in the class of nilsequences cannot be decided from finitely
//! many terms, so every stream carries a tag fixed by how it was built:
//! constructors that are nilsequences by construction produce `Nil`, and the
//! algebra operations propagate tags conservatively.

use std::fmt;
use std::io::Write;
use std::ops::RangeInclusive;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dd::DD;
use crate::error::{Error, Result};
use crate::exactnum::{binomial, e_frac, Basis, PhasePolynomial, PhaseScalar, FRAC_BITS};

/// Class of a sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Tag {
    /// Nilsequence from a `step`-step construction (0 for constants).
    Nil { step: u32 },
    /// Bounded, two-sided Cesàro average of `|a_n|` tends to 0.
    ZeroDensity,
    /// Nilsequence plus zero-density sequence.
    AlmostNil,
    Unknown,
}

impl Tag {
    /// Tag of a sum, also used to join interleaved components.
    pub fn add(self, other: Tag) -> Tag {
        use Tag::*;
        match (self, other) {
            (Unknown, _) | (_, Unknown) => Unknown,
            (Nil { step: a }, Nil { step: b }) => Nil { step: a.max(b) },
            (ZeroDensity, ZeroDensity) => ZeroDensity,
            _ => AlmostNil,
        }
    }

    /// Tag of a pointwise product. A zero-density factor absorbs any bounded
    /// cofactor.
    pub fn mul(self, other: Tag, both_bounded: bool) -> Tag {
        use Tag::*;
        match (self, other) {
            (ZeroDensity, _) | (_, ZeroDensity) if both_bounded => ZeroDensity,
            (Unknown, _) | (_, Unknown) => Unknown,
            (Nil { step: a }, Nil { step: b }) => Nil { step: a.max(b) },
            (ZeroDensity, _) | (_, ZeroDensity) => Unknown,
            _ => AlmostNil,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Nil { step } => write!(f, "nil(step {step})"),
            Tag::ZeroDensity => write!(f, "zero-density"),
            Tag::AlmostNil => write!(f, "almost-nil"),
            Tag::Unknown => write!(f, "unknown"),
        }
    }
}

type Evaluator = Arc<dyn Fn(i64) -> Complex64 + Send + Sync>;

/// A lazy complex sequence `n ↦ a_n` on `Z` with a bound and a class tag.
#[derive(Clone)]
pub struct SequenceStream {
    eval: Evaluator,
    bound: Option<f64>,
    tag: Tag,
    note: String,
}

impl fmt::Debug for SequenceStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SequenceStream")
            .field("bound", &self.bound)
            .field("tag", &self.tag)
            .field("note", &self.note)
            .finish_non_exhaustive()
    }
}

impl SequenceStream {
    pub fn new(
        eval: impl Fn(i64) -> Complex64 + Send + Sync + 'static,
        bound: Option<f64>,
        tag: Tag,
        note: impl Into<String>,
    ) -> Self {
        SequenceStream {
            eval: Arc::new(eval),
            bound,
            tag,
            note: note.into(),
        }
    }

    pub fn constant(c: Complex64) -> Self {
        SequenceStream::new(move |_| c, Some(c.norm()), Tag::Nil { step: 0 }, format!("constant {c}"))
    }

    pub fn at(&self, n: i64) -> Complex64 {
        (self.eval)(n)
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    pub fn tag(&self) -> Tag {
        self.tag
    }

    pub fn note(&self) -> &str {
        &self.note
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Values on a range, evaluated in parallel; the result is in order.
    pub fn values(&self, range: RangeInclusive<i64>) -> Vec<Complex64> {
        range.into_par_iter().map(|n| self.at(n)).collect()
    }

    /// Values in the two-sided order `0, 1, -1, 2, -2, ...`, `len` of them.
    pub fn two_sided_values(&self, len: usize) -> Vec<Complex64> {
        (0..len)
            .into_par_iter()
            .map(|i| self.at(crate::sum::two_sided_value(i)))
            .collect()
    }

    pub fn add(&self, other: &SequenceStream) -> SequenceStream {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        SequenceStream::new(
            move |n| a(n) + b(n),
            self.bound.zip(other.bound).map(|(x, y)| x + y),
            self.tag.add(other.tag),
            format!("({}) + ({})", self.note, other.note),
        )
    }

    pub fn mul(&self, other: &SequenceStream) -> SequenceStream {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let bounded = self.bound.is_some() && other.bound.is_some();
        SequenceStream::new(
            move |n| a(n) * b(n),
            self.bound.zip(other.bound).map(|(x, y)| x * y),
            self.tag.mul(other.tag, bounded),
            format!("({}) * ({})", self.note, other.note),
        )
    }

    pub fn scale(&self, c: Complex64) -> SequenceStream {
        let a = self.eval.clone();
        let tag = if c == Complex64::new(0.0, 0.0) { Tag::Nil { step: 0 } } else { self.tag };
        SequenceStream::new(
            move |n| c * a(n),
            self.bound.map(|b| b * c.norm()),
            tag,
            format!("{c} * ({})", self.note),
        )
    }

    pub fn conj(&self) -> SequenceStream {
        let a = self.eval.clone();
        SequenceStream::new(move |n| a(n).conj(), self.bound, self.tag, format!("conj({})", self.note))
    }

    /// `n ↦ a_{n+k}`.
    pub fn shift(&self, k: i64) -> SequenceStream {
        let a = self.eval.clone();
        SequenceStream::new(move |n| a(n + k), self.bound, self.tag, format!("shift({}, {k})", self.note))
    }

    /// Writes `n,re,im` rows.
    pub fn write_csv<W: Write>(&self, range: RangeInclusive<i64>, mut w: W) -> Result<()> {
        writeln!(w, "n,re,im")?;
        let start = *range.start();
        for (i, v) in self.values(range).into_iter().enumerate() {
            writeln!(w, "{},{},{}", start + i as i64, v.re, v.im)?;
        }
        Ok(())
    }
}

/// `n ↦ e(p(n))`.
pub fn poly_exp(p: &PhasePolynomial) -> SequenceStream {
    let ev = p.compile();
    let step = p.degree().unwrap_or(0) as u32;
    SequenceStream::new(move |n| ev.exp(n), Some(1.0), Tag::Nil { step }, format!("e({p})"))
}

/// `q_n(t) = e(n(n−1)/2 · t)`.
pub fn quadratic_seq(t: &PhaseScalar) -> SequenceStream {
    let p = PhasePolynomial::new(vec![PhaseScalar::zero(), PhaseScalar::zero(), t.clone()], Basis::Binomial);
    poly_exp(&p).with_note(format!("q_n({t})"))
}

/// Indicator of a finite set: zero density.
pub fn indicator(support: &[i64]) -> SequenceStream {
    let mut set = support.to_vec();
    set.sort_unstable();
    set.dedup();
    let bound = if set.is_empty() { 0.0 } else { 1.0 };
    let note = format!("1{set:?}");
    SequenceStream::new(
        move |n| {
            if set.binary_search(&n).is_ok() {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        },
        Some(bound),
        Tag::ZeroDensity,
        note,
    )
}

/// `ξ(tm + r) = η_r(t)`.
pub fn interleave(components: &[SequenceStream], m: usize) -> Result<SequenceStream> {
    if m == 0 || components.len() != m {
        return Err(Error::ArityMismatch {
            expected: m,
            got: components.len(),
        });
    }
    if m == 1 {
        return Ok(components[0].clone());
    }
    let evals: Vec<Evaluator> = components.iter().map(|c| c.eval.clone()).collect();
    let bound = components
        .iter()
        .map(|c| c.bound)
        .try_fold(0.0f64, |acc, b| b.map(|b| acc.max(b)));
    let tag = components.iter().skip(1).fold(components[0].tag, |t, c| t.add(c.tag));
    let mi = m as i64;
    Ok(SequenceStream::new(
        move |n| {
            let (t, r) = (n.div_euclid(mi), n.rem_euclid(mi));
            evals[r as usize](t)
        },
        bound,
        tag,
        format!("interleave[{}]", components.iter().map(|c| c.note.as_str()).collect::<Vec<_>>().join("; ")),
    ))
}

/// `η_r(t) = ξ(tm + r)`; restriction to an arithmetic progression keeps the
/// class.
pub fn deinterleave(xi: &SequenceStream, m: usize) -> Result<Vec<SequenceStream>> {
    if m == 0 {
        return Err(Error::ArityMismatch { expected: 1, got: 0 });
    }
    let mi = m as i64;
    Ok((0..mi)
        .map(|r| {
            let a = xi.eval.clone();
            SequenceStream::new(move |t| a(t * mi + r), xi.bound, xi.tag, format!("{}[{m}t+{r}]", xi.note))
        })
        .collect())
}

/// Smallest `K ≥ 2` with `2e^{−π(K−1)²} / (1 − e^{−2π(K−1)}) < ε`.
pub fn kappa_cutoff(eps: f64) -> i64 {
    let pi = std::f64::consts::PI;
    let mut k = 2i64;
    loop {
        let a = (k - 1) as f64;
        if 2.0 * (-pi * a * a).exp() / (1.0 - (-2.0 * pi * a).exp()) < eps {
            return k;
        }
        k += 1;
    }
}

fn kappa_terms(t0: f64, k_max: i64, phase: impl Fn(i64) -> f64) -> Complex64 {
    let pi = std::f64::consts::PI;
    let mut acc = Complex64::new(0.0, 0.0);
    // symmetric order keeps the small tail terms from being absorbed early
    for k in (-k_max..=k_max).rev().filter(|k| k.abs() == k_max).chain(
        (1..k_max).rev().flat_map(|a| [a, -a]).chain(std::iter::once(0)),
    ) {
        let x = t0 + k as f64;
        acc += e_frac(phase(k)) * (-pi * x * x).exp();
    }
    acc
}

/// `κ(s, t) = Σ_k exp(−π(t+k)²) e(ks)`, truncated to `|k + round(t)| ≤ K`.
pub fn theta_kappa(s: f64, t: f64, eps: f64) -> Complex64 {
    assert!(eps > 0.0, "ε must be positive");
    theta_kappa_k(s, t, kappa_cutoff(eps))
}

/// [`theta_kappa`] with an explicit cutoff `K`.
pub fn theta_kappa_k(s: f64, t: f64, k_max: i64) -> Complex64 {
    let j = t.round();
    let t0 = t - j;
    // k = k' − j with |k'| ≤ K
    kappa_terms(t0, k_max, |kp| DD::prod((kp as f64) - j, s).frac().to_f64())
}

/// `ω_n(α, β) = κ(nα, nβ) · e(n(n−1)/2 · αβ)` with all phases accumulated
/// in double-double so that large `n` keep full accuracy.
pub fn heisenberg_seq(alpha: f64, beta: f64) -> SequenceStream {
    const EPS: f64 = 1e-12;
    let k_max = kappa_cutoff(EPS);
    let ab = DD::prod(alpha, beta);
    let bound = theta_kappa(0.0, 0.0, EPS).re;
    SequenceStream::new(
        move |n| {
            let nf = n as f64;
            let nb = DD::prod(nf, beta);
            let j = nb.hi.round();
            let t0 = nb.sub(DD::new(j)).to_f64();
            let s = DD::prod(nf, alpha).frac();
            let c2 = nf * (nf - 1.0) / 2.0;
            let quad = ab.mul_f64(c2).frac();
            kappa_terms(t0, k_max, |kp| s.mul_f64(kp as f64 - j).add(quad).frac().to_f64())
        },
        Some(bound),
        Tag::Nil { step: 2 },
        format!("omega_n({alpha}, {beta})"),
    )
}

/// State of the skew product `T(y₁, …, y_k) = (y₁ + α, y₂ + y₁, …, y_k + y_{k−1})`
/// on `T^k`, all coordinates exact and reduced mod 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkewProductState {
    pub alpha: PhaseScalar,
    pub x: Vec<PhaseScalar>,
}

impl SkewProductState {
    pub fn k(&self) -> usize {
        self.x.len()
    }

    pub fn step(&self) -> SkewProductState {
        let mut y = Vec::with_capacity(self.x.len());
        for i in 0..self.x.len() {
            let inc = if i == 0 { &self.alpha } else { &self.x[i - 1] };
            y.push(self.x[i].add(inc).reduce_mod_1());
        }
        SkewProductState {
            alpha: self.alpha.clone(),
            x: y,
        }
    }

    pub fn step_back(&self) -> SkewProductState {
        let mut y: Vec<PhaseScalar> = Vec::with_capacity(self.x.len());
        for i in 0..self.x.len() {
            let dec = if i == 0 { self.alpha.clone() } else { y[i - 1].clone() };
            y.push(self.x[i].sub(&dec).reduce_mod_1());
        }
        SkewProductState {
            alpha: self.alpha.clone(),
            x: y,
        }
    }

    /// `T^n` by repeated application.
    pub fn iterate(&self, n: i64) -> SkewProductState {
        let mut s = self.clone();
        for _ in 0..n.unsigned_abs() {
            s = if n > 0 { s.step() } else { s.step_back() };
        }
        s
    }

    /// `i`-th coordinate (1-based) of `T^n` from the closed form
    /// `C(n,i)α + Σ_{l=1..i} C(n, i−l) x_l`.
    pub fn closed_form(&self, n: i64, i: usize) -> PhaseScalar {
        let n = BigInt::from(n);
        let mut acc = self.alpha.scale_int(&binomial(&n, i));
        for l in 1..=i {
            acc.add_assign(&self.x[l - 1].scale_int(&binomial(&n, i - l)));
        }
        acc.reduce_mod_1()
    }

    /// The polynomial read off the last coordinate.
    pub fn polynomial(&self) -> PhasePolynomial {
        let k = self.k();
        let mut coeffs: Vec<PhaseScalar> = (0..k).map(|j| self.x[k - 1 - j].clone()).collect();
        coeffs.push(self.alpha.clone());
        PhasePolynomial::new(coeffs, Basis::Binomial)
    }

    /// Double-double copy for float iteration.
    pub fn to_float(&self) -> FloatSkewState {
        let conv = |p: &PhaseScalar| DD::from_fixed(&p.frac_fixed(), FRAC_BITS);
        FloatSkewState {
            alpha: conv(&self.alpha),
            x: self.x.iter().map(conv).collect(),
        }
    }
}

/// Skew product with double-double coordinates in `[0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatSkewState {
    pub alpha: DD,
    pub x: Vec<DD>,
}

impl FloatSkewState {
    pub fn step(&mut self) {
        for i in (0..self.x.len()).rev() {
            let inc = if i == 0 { self.alpha } else { self.x[i - 1] };
            self.x[i] = self.x[i].add(inc).frac();
        }
    }

    /// Last coordinate of `T^n` for `n = 0..=n_max`.
    pub fn last_coordinates(mut self, n_max: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            if n > 0 {
                self.step();
            }
            out.push(self.x.last().map_or(0.0, |v| v.to_f64()));
        }
        out
    }
}

/// Skew-product realization of `e(p(n))` for a polynomial of degree `k ≥ 1`.
#[derive(Clone, Debug)]
pub struct FurstenbergOrbit {
    pub state: SkewProductState,
    pub stream: SequenceStream,
}

/// Solves `p(n) = C(n,k)α + C(n,k−1)x₁ + … + x_k` for `α` and the `x_i`.
pub fn furstenberg_orbit(p: &PhasePolynomial) -> Result<FurstenbergOrbit> {
    let b = p.to_binomial();
    let k = match b.degree() {
        Some(k) if k >= 1 => k,
        _ => return Err(Error::DegreeZero),
    };
    let c = b.coeffs();
    let state = SkewProductState {
        alpha: c[k].reduce_mod_1(),
        x: (1..=k).map(|i| c[k - i].reduce_mod_1()).collect(),
    };
    let last = state.polynomial().compile();
    let stream = SequenceStream::new(
        move |n| last.exp(n),
        Some(1.0),
        Tag::Nil { step: k as u32 },
        format!("furstenberg({p})"),
    );
    Ok(FurstenbergOrbit { state, stream })
}
