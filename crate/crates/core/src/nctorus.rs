//! Noncommutative torus `A_Θ`: normal-ordered Weyl words, the automorphism
//! induced by an integer matrix, polynomial form of its iterates, and vector
//! states in the trace representation on `ℓ²(Z^d)`.
//!
//! Words are `e(φ)·u₁^{x₁}⋯u_d^{x_d}` with `u_j u_k = e(θ_jk) u_k u_j`, so
//! `u^x · u^y = e(B(x, y)) u^{x+y}` where `B(x, y) = Σ_{j>k} x_j y_k θ_jk`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{
    binomial, classify_entropy, IntMatrix, IntegralPolynomial, PhasePolynomial, PhaseScalar, UnipotentExpansion, Verdict,
};
use crate::nilseq::{interleave, SequenceStream};
use crate::spectral::{decompose_family, DecompositionResult, OperatorFamily, ShiftPhaseOperator, Site, SparseVector};

/// Skew-symmetric `d×d` matrix of phases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaMatrix {
    d: usize,
    entries: Vec<PhaseScalar>,
}

impl ThetaMatrix {
    pub fn new(rows: Vec<Vec<PhaseScalar>>) -> Result<Self> {
        let d = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: r.len() });
        }
        for j in 0..d {
            for k in 0..d {
                if !rows[j][k].add(&rows[k][j]).is_zero() {
                    return Err(Error::Invalid(format!("theta is not skew-symmetric at ({j}, {k})")));
                }
            }
        }
        Ok(ThetaMatrix {
            d,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds from the strict upper triangle `θ_jk`, `j < k` (0-based).
    pub fn from_upper(d: usize, upper: &[(usize, usize, PhaseScalar)]) -> Result<Self> {
        let mut rows = vec![vec![PhaseScalar::zero(); d]; d];
        for (j, k, t) in upper {
            if *j >= *k || *k >= d {
                return Err(Error::Invalid(format!("({j}, {k}) is not above the diagonal")));
            }
            rows[*j][*k] = t.clone();
            rows[*k][*j] = t.neg();
        }
        ThetaMatrix::new(rows)
    }

    /// `d = 2` with `θ₁₂ = θ`.
    pub fn two(theta12: PhaseScalar) -> Self {
        ThetaMatrix::from_upper(2, &[(0, 1, theta12)]).expect("2x2 skew")
    }

    pub fn zero(d: usize) -> Self {
        ThetaMatrix {
            d,
            entries: vec![PhaseScalar::zero(); d * d],
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, j: usize, k: usize) -> &PhaseScalar {
        &self.entries[j * self.d + k]
    }

    /// `B(x, y) = Σ_{j>k} x_j y_k θ_jk`.
    pub fn cocycle(&self, x: &[BigInt], y: &[BigInt]) -> PhaseScalar {
        let mut acc = PhaseScalar::zero();
        for k in 0..self.d {
            if y[k].is_zero() {
                continue;
            }
            for j in k + 1..self.d {
                if !x[j].is_zero() {
                    acc.add_assign(&self.get(j, k).scale_int(&(&x[j] * &y[k])));
                }
            }
        }
        acc
    }

    /// Linear form `k ↦ B(x, k)`: coefficient `Σ_{j>l} x_j θ_jl` at `l`.
    pub fn left_form(&self, x: &[BigInt]) -> Vec<PhaseScalar> {
        (0..self.d)
            .map(|l| {
                let mut acc = PhaseScalar::zero();
                for j in l + 1..self.d {
                    if !x[j].is_zero() {
                        acc.add_assign(&self.get(j, l).scale_int(&x[j]));
                    }
                }
                acc
            })
            .collect()
    }

    /// Checks `S'ΘS − Θ` is an integer matrix.
    pub fn check_compatible(&self, s: &IntMatrix) -> Result<()> {
        if s.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: s.dim(),
            });
        }
        let d = self.d;
        // ΘS
        let ts: Vec<PhaseScalar> = (0..d * d)
            .map(|idx| {
                let (a, k) = (idx / d, idx % d);
                let mut acc = PhaseScalar::zero();
                for b in 0..d {
                    if !s.get(b, k).is_zero() {
                        acc.add_assign(&self.get(a, b).scale_int(s.get(b, k)));
                    }
                }
                acc
            })
            .collect();
        for j in 0..d {
            for k in 0..d {
                let mut acc = PhaseScalar::zero();
                for a in 0..d {
                    if !s.get(a, j).is_zero() {
                        acc.add_assign(&ts[a * d + k].scale_int(s.get(a, j)));
                    }
                }
                if !acc.sub(self.get(j, k)).is_integer() {
                    return Err(Error::NotCompatible { row: j, col: k });
                }
            }
        }
        Ok(())
    }
}

/// `e(phase) · u₁^{x₁}⋯u_d^{x_d}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeylWord {
    phase: PhaseScalar,
    exponents: Vec<BigInt>,
}

impl WeylWord {
    pub fn new(phase: PhaseScalar, exponents: Vec<BigInt>) -> Self {
        WeylWord {
            phase: phase.reduce_mod_1(),
            exponents,
        }
    }

    pub fn from_i64(phase: PhaseScalar, exponents: &[i64]) -> Self {
        WeylWord::new(phase, exponents.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn identity(d: usize) -> Self {
        WeylWord::new(PhaseScalar::zero(), vec![BigInt::zero(); d])
    }

    /// The generator `u_j` (0-based).
    pub fn generator(d: usize, j: usize) -> Self {
        let mut w = WeylWord::identity(d);
        w.exponents[j] = BigInt::one();
        w
    }

    pub fn phase(&self) -> &PhaseScalar {
        &self.phase
    }

    pub fn exponents(&self) -> &[BigInt] {
        &self.exponents
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents_i64(&self) -> Result<Site> {
        self.exponents
            .iter()
            .map(|x| x.to_i64().ok_or(Error::ExponentOverflow(0)))
            .collect()
    }
}

impl fmt::Display for WeylWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e({})", self.phase)?;
        for (j, x) in self.exponents.iter().enumerate() {
            if !x.is_zero() {
                write!(f, " u{}^{}", j + 1, x)?;
            }
        }
        Ok(())
    }
}

fn check_dim(theta: &ThetaMatrix, got: usize) -> Result<()> {
    if theta.dim() != got {
        return Err(Error::DimensionMismatch {
            expected: theta.dim(),
            got,
        });
    }
    Ok(())
}

/// Normal-ordered product `a·b`.
pub fn word_mul(a: &WeylWord, b: &WeylWord, theta: &ThetaMatrix) -> Result<WeylWord> {
    check_dim(theta, a.dim())?;
    check_dim(theta, b.dim())?;
    let phase = a.phase.add(&b.phase).add(&theta.cocycle(&a.exponents, &b.exponents));
    Ok(WeylWord::new(
        phase,
        a.exponents.iter().zip(&b.exponents).map(|(x, y)| x + y).collect(),
    ))
}

/// `w^n = e(nφ + C(n,2) B(x,x)) u^{nx}`, valid for every integer `n`.
pub fn word_pow(w: &WeylWord, n: &BigInt, theta: &ThetaMatrix) -> Result<WeylWord> {
    check_dim(theta, w.dim())?;
    let self_pair = theta.cocycle(&w.exponents, &w.exponents);
    let phase = w.phase.scale_int(n).add(&self_pair.scale_int(&binomial(n, 2)));
    Ok(WeylWord::new(phase, w.exponents.iter().map(|x| x * n).collect()))
}

pub fn word_inverse(w: &WeylWord, theta: &ThetaMatrix) -> Result<WeylWord> {
    word_pow(w, &BigInt::from(-1), theta)
}

/// The automorphism `α(u_j) = u₁^{s_1j}⋯u_d^{s_dj}` of `A_Θ`.
#[derive(Clone, Debug)]
pub struct Automorphism {
    s: IntMatrix,
    s_inv: IntMatrix,
    theta: ThetaMatrix,
    images: Vec<WeylWord>,
}

impl Automorphism {
    pub fn new(s: IntMatrix, theta: ThetaMatrix) -> Result<Self> {
        s.require_gl()?;
        theta.check_compatible(&s)?;
        let s_inv = s.inverse_unimodular()?;
        let images = (0..s.dim()).map(|j| WeylWord::new(PhaseScalar::zero(), s.column(j))).collect();
        Ok(Automorphism { s, s_inv, theta, images })
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.s
    }

    pub fn theta(&self) -> &ThetaMatrix {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    pub fn apply(&self, w: &WeylWord) -> Result<WeylWord> {
        check_dim(&self.theta, w.dim())?;
        let mut acc = WeylWord::new(w.phase.clone(), vec![BigInt::zero(); self.dim()]);
        for (img, x) in self.images.iter().zip(&w.exponents) {
            if !x.is_zero() {
                acc = word_mul(&acc, &word_pow(img, x, &self.theta)?, &self.theta)?;
            }
        }
        Ok(acc)
    }

    /// `α⁻¹`: with `y = S⁻¹x` and `α(u^y) = e(c) u^x`, `α⁻¹(e(φ)u^x) = e(φ − c) u^y`.
    pub fn apply_inverse(&self, w: &WeylWord) -> Result<WeylWord> {
        check_dim(&self.theta, w.dim())?;
        let y = self.s_inv.mul_vec(&w.exponents);
        let image = self.apply(&WeylWord::new(PhaseScalar::zero(), y.clone()))?;
        Ok(WeylWord::new(w.phase.sub(&image.phase), y))
    }

    /// `αⁿ(w)` by repeated application.
    pub fn iterate(&self, w: &WeylWord, n: i64) -> Result<WeylWord> {
        let mut acc = w.clone();
        for _ in 0..n.unsigned_abs() {
            acc = if n > 0 { self.apply(&acc)? } else { self.apply_inverse(&acc)? };
        }
        Ok(acc)
    }
}

/// `apply_auto` as a free function; checks compatibility on every call.
pub fn apply_auto(s: &IntMatrix, w: &WeylWord, theta: &ThetaMatrix) -> Result<WeylWord> {
    Automorphism::new(s.clone(), theta.clone())?.apply(w)
}

/// `α^{tm+r}(u^ρ) = e(p_{0r}(t)) u^{(p_{1r}(t), …, p_{dr}(t))}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueForm {
    pub r: u64,
    pub exponents: Vec<IntegralPolynomial>,
    pub phase: PhasePolynomial,
}

impl ResidueForm {
    pub fn eval(&self, t: i64) -> WeylWord {
        WeylWord::new(self.phase.eval_i64(t), self.exponents.iter().map(|p| p.eval_i64(t)).collect())
    }

    /// `t ↦ π(α^{tm+r}(u^ρ))` in the trace representation.
    pub fn operator_family(&self, theta: &ThetaMatrix) -> OperatorFamily {
        let d = theta.dim();
        let form = (0..d)
            .map(|l| {
                (l + 1..d).fold(PhasePolynomial::zero(), |acc, j| {
                    acc.add(&PhasePolynomial::from_integral(&self.exponents[j], theta.get(j, l)))
                })
            })
            .collect();
        OperatorFamily::new(self.exponents.clone(), self.phase.clone(), form).expect("matching dimension")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhasePolyReport {
    pub m: u64,
    pub rho: Vec<BigInt>,
    /// Degree bound used by the fitter, `2d − 1`.
    pub bound: usize,
    pub residues: Vec<ResidueForm>,
}

impl PhasePolyReport {
    pub fn eval(&self, n: i64) -> WeylWord {
        let m = self.m as i64;
        self.residues[n.rem_euclid(m) as usize].eval(n.div_euclid(m))
    }
}

#[derive(Serialize)]
struct ResidueJson {
    r: u64,
    exponents: Vec<String>,
    phase: String,
}

#[derive(Serialize)]
pub struct PhasePolyJson {
    m: u64,
    bound: usize,
    residues: Vec<ResidueJson>,
}

impl PhasePolyReport {
    pub fn to_json(&self) -> PhasePolyJson {
        PhasePolyJson {
            m: self.m,
            bound: self.bound,
            residues: self
                .residues
                .iter()
                .map(|r| ResidueJson {
                    r: r.r,
                    exponents: r.exponents.iter().map(|p| p.to_string()).collect(),
                    phase: r.phase.to_string(),
                })
                .collect(),
        }
    }
}

/// Number of held-out points checked after fitting.
const HELD_OUT: usize = 3;

/// Polynomial form of `αⁿ(u^ρ)` per residue class mod `m`.
pub fn iterate_phase_polys(auto: &Automorphism, rho: &[BigInt], m: u64) -> Result<PhasePolyReport> {
    check_dim(&auto.theta, rho.len())?;
    let expansion = UnipotentExpansion::new(&auto.s, m)?;
    let d = auto.dim();
    let bound = 2 * d - 1;
    let samples = bound + 1 + HELD_OUT;
    let mut words = Vec::with_capacity(samples * m as usize);
    let mut w = WeylWord::new(PhaseScalar::zero(), rho.to_vec());
    for _ in 0..samples * m as usize {
        words.push(w.clone());
        w = auto.apply(&w)?;
    }
    let mut residues = Vec::with_capacity(m as usize);
    for r in 0..m {
        let exponents = expansion.residue(r).apply(rho);
        let at = |t: usize| &words[t * m as usize + r as usize];
        for t in 0..samples {
            let n = (t as u64 * m + r) as i64;
            let predicted: Vec<BigInt> = exponents.iter().map(|p| p.eval_i64(t as i64)).collect();
            if predicted != at(t).exponents {
                return Err(Error::MismatchAt(n));
            }
        }
        let values: Vec<PhaseScalar> = (0..=bound).map(|t| at(t).phase.clone()).collect();
        let phase = PhasePolynomial::interpolate(&values).reduce_mod_1();
        for t in bound + 1..samples {
            if !phase.eval_i64(t as i64).eq_mod_1(&at(t).phase) {
                return Err(Error::DegreeBoundExceeded {
                    bound,
                    residue: r,
                    t: t as i64,
                });
            }
        }
        residues.push(ResidueForm { r, exponents, phase });
    }
    Ok(PhasePolyReport {
        m,
        rho: rho.to_vec(),
        bound,
        residues,
    })
}

/// `π(w)` on `ℓ²(Z^d)`: `δ_k ↦ e(φ + B(x, k)) δ_{x+k}`.
pub fn word_operator(w: &WeylWord, theta: &ThetaMatrix) -> Result<ShiftPhaseOperator> {
    check_dim(theta, w.dim())?;
    ShiftPhaseOperator::new(w.exponents_i64()?, w.phase.clone(), theta.left_form(&w.exponents))
}

pub fn gns_apply(w: &WeylWord, psi: &SparseVector, theta: &ThetaMatrix) -> Result<SparseVector> {
    if let Some(d) = psi.dim() {
        check_dim(theta, d)?;
    }
    word_operator(w, theta)?.apply(psi)
}

/// Finite combination `Σ a_x u^x`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeylElement {
    terms: BTreeMap<Site, Complex64>,
}

impl WeylElement {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Site, Complex64)>) -> Self {
        let mut out = WeylElement::new();
        for (x, c) in terms {
            out.add_term(x, c);
        }
        out
    }

    pub fn from_word(w: &WeylWord) -> Result<Self> {
        Ok(WeylElement::from_terms([(w.exponents_i64()?, w.phase.exp_2pi_i())]))
    }

    pub fn add_term(&mut self, x: Site, c: Complex64) {
        let e = self.terms.entry(x.clone()).or_insert(Complex64::zero());
        *e += c;
        if *e == Complex64::zero() {
            self.terms.remove(&x);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Site, Complex64> {
        &self.terms
    }

    /// `τ(a) = a_0`.
    pub fn trace(&self) -> Complex64 {
        self.terms
            .iter()
            .find(|(x, _)| x.iter().all(|&v| v == 0))
            .map(|(_, c)| *c)
            .unwrap_or(Complex64::zero())
    }

    pub fn add(&self, other: &WeylElement) -> WeylElement {
        let mut out = self.clone();
        for (x, c) in &other.terms {
            out.add_term(x.clone(), *c);
        }
        out
    }

    pub fn mul(&self, other: &WeylElement, theta: &ThetaMatrix) -> Result<WeylElement> {
        let mut out = WeylElement::new();
        for (x, a) in &self.terms {
            let xb: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
            for (y, b) in &other.terms {
                let yb: Vec<BigInt> = y.iter().map(|&v| BigInt::from(v)).collect();
                let w = word_mul(&WeylWord::new(PhaseScalar::zero(), xb.clone()), &WeylWord::new(PhaseScalar::zero(), yb), theta)?;
                out.add_term(w.exponents_i64()?, a * b * w.phase.exp_2pi_i());
            }
        }
        Ok(out)
    }

    /// `a* = Σ ā_x (u^x)^{-1}`.
    pub fn adjoint(&self, theta: &ThetaMatrix) -> Result<WeylElement> {
        let mut out = WeylElement::new();
        for (x, c) in &self.terms {
            let inv = word_inverse(&WeylWord::from_i64(PhaseScalar::zero(), x), theta)?;
            out.add_term(inv.exponents_i64()?, c.conj() * inv.phase.exp_2pi_i());
        }
        Ok(out)
    }

    /// `π(a) ψ`.
    pub fn apply(&self, psi: &SparseVector, theta: &ThetaMatrix) -> Result<SparseVector> {
        let mut out = SparseVector::new();
        for (x, c) in &self.terms {
            let img = gns_apply(&WeylWord::from_i64(PhaseScalar::zero(), x), psi, theta)?;
            out = out.add(&img.scale(*c))?;
        }
        Ok(out)
    }

    /// Vector state `⟨π(a) w, w⟩`.
    pub fn state(&self, w: &SparseVector, theta: &ThetaMatrix) -> Result<Complex64> {
        Ok(self.apply(w, theta)?.inner(w))
    }

    /// `α(a)`.
    pub fn apply_auto(&self, auto: &Automorphism) -> Result<WeylElement> {
        let mut out = WeylElement::new();
        for (x, c) in &self.terms {
            let img = auto.apply(&WeylWord::from_i64(PhaseScalar::zero(), x))?;
            out.add_term(img.exponents_i64()?, c * img.phase.exp_2pi_i());
        }
        Ok(out)
    }

    /// `αⁿ(a)` by word iteration.
    pub fn apply_auto_n(&self, auto: &Automorphism, n: i64) -> Result<WeylElement> {
        let mut out = WeylElement::new();
        for (x, c) in &self.terms {
            let img = auto.iterate(&WeylWord::from_i64(PhaseScalar::zero(), x), n)?;
            out.add_term(img.exponents_i64()?, c * img.phase.exp_2pi_i());
        }
        Ok(out)
    }
}

/// Tolerance on `‖w‖ = 1` for state vectors.
pub const UNIT_TOL: f64 = 1e-12;

/// `n ↦ ρ(αⁿ u) = ⟨π(αⁿu) w, w⟩`, decomposed per residue class.
#[derive(Clone, Debug)]
pub struct NcStateSeq {
    pub m: u64,
    pub reports: Vec<(Complex64, PhasePolyReport)>,
    pub per_residue: Vec<DecompositionResult>,
}

impl NcStateSeq {
    pub fn at(&self, n: i64) -> Complex64 {
        let m = self.m as i64;
        self.per_residue[n.rem_euclid(m) as usize].a(n.div_euclid(m))
    }

    pub fn b(&self, n: i64) -> Complex64 {
        let m = self.m as i64;
        self.per_residue[n.rem_euclid(m) as usize].b(n.div_euclid(m))
    }

    pub fn c(&self, n: i64) -> Complex64 {
        let m = self.m as i64;
        self.per_residue[n.rem_euclid(m) as usize].c(n.div_euclid(m))
    }

    pub fn stream(&self) -> Result<SequenceStream> {
        let parts: Vec<SequenceStream> = self.per_residue.iter().map(DecompositionResult::a_stream).collect();
        Ok(interleave(&parts, self.m as usize)?.with_note("rho(alpha^n u)"))
    }

    pub fn b_stream(&self) -> Result<SequenceStream> {
        let parts: Vec<SequenceStream> = self.per_residue.iter().map(DecompositionResult::b_stream).collect();
        interleave(&parts, self.m as usize)
    }

    pub fn c_stream(&self) -> Result<SequenceStream> {
        let parts: Vec<SequenceStream> = self.per_residue.iter().map(DecompositionResult::c_stream).collect();
        interleave(&parts, self.m as usize)
    }
}

/// Builds `ρ(αⁿ u)` for a zero-entropy automorphism.
pub fn state_seq(auto: &Automorphism, u: &WeylElement, w: &SparseVector) -> Result<NcStateSeq> {
    let norm = w.norm();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnitVector { norm });
    }
    if let Some(d) = w.dim() {
        check_dim(&auto.theta, d)?;
    }
    let report = classify_entropy(&auto.s)?;
    let m = match (report.verdict, report.m) {
        (Verdict::ZeroEntropy, Some(m)) => m,
        _ => return Err(Error::NotUnipotent { m: 0 }),
    };
    let mut reports = Vec::new();
    for (x, c) in &u.terms {
        check_dim(&auto.theta, x.len())?;
        let rho: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        reports.push((*c, iterate_phase_polys(auto, &rho, m)?));
    }
    let per_residue = (0..m as usize)
        .map(|r| {
            let parts = reports
                .iter()
                .map(|(c, rep)| Ok((*c, decompose_family(&rep.residues[r].operator_family(&auto.theta), w, w)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(DecompositionResult::combine(&parts))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NcStateSeq { m, reports, per_residue })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClockShiftReport {
    pub q: u64,
    pub p: i64,
    /// `max |UV − e(p/q) VU|`
    pub relation_deviation: f64,
    pub words: usize,
    /// `max` over words of `|matrix product − e(φ) U^a V^b|`
    pub max_word_deviation: f64,
}

type CMat = Vec<Complex64>;

fn cmat_mul(a: &CMat, b: &CMat, q: usize) -> CMat {
    let mut out = vec![Complex64::zero(); q * q];
    for i in 0..q {
        for k in 0..q {
            let aik = a[i * q + k];
            if aik == Complex64::zero() {
                continue;
            }
            for j in 0..q {
                out[i * q + j] += aik * b[k * q + j];
            }
        }
    }
    out
}

fn cmat_pow(base: &CMat, inv: &CMat, n: i64, q: usize) -> CMat {
    let mut acc: CMat = (0..q * q).map(|i| if i / q == i % q { Complex64::new(1.0, 0.0) } else { Complex64::zero() }).collect();
    let m = if n >= 0 { base } else { inv };
    for _ in 0..n.unsigned_abs() {
        acc = cmat_mul(&acc, m, q);
    }
    acc
}

fn cmat_dist(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Checks the `q×q` clock/shift representation of `u₁u₂ = e(p/q) u₂u₁`
/// against the symbolic word algebra. Words are lists of
/// `(generator 0|1, exponent)`.
pub fn clock_shift_check(theta12: &PhaseScalar, words: &[Vec<(usize, i64)>]) -> Result<ClockShiftReport> {
    if !theta12.is_rational() {
        return Err(Error::NotRational);
    }
    let theta = theta12.reduce_mod_1();
    let frac = theta.rational_part();
    let q = frac.denom().to_u64().ok_or(Error::NotRational)?;
    let p = frac.numer().to_i64().ok_or(Error::NotRational)?;
    let qs = q as usize;
    let omega = |k: i64| crate::exactnum::e_frac(((k * p).rem_euclid(q as i64)) as f64 / q as f64);
    let clock: CMat = (0..qs * qs)
        .map(|i| if i / qs == i % qs { omega((i / qs) as i64) } else { Complex64::zero() })
        .collect();
    let clock_inv: CMat = clock.iter().map(|c| c.conj()).collect();
    // V e_j = e_{j+1}
    let shift: CMat = (0..qs * qs)
        .map(|i| if i / qs == (i % qs + 1) % qs { Complex64::new(1.0, 0.0) } else { Complex64::zero() })
        .collect();
    let shift_inv: CMat = (0..qs * qs).map(|i| shift[(i % qs) * qs + i / qs]).collect();
    let uv = cmat_mul(&clock, &shift, qs);
    let vu: CMat = cmat_mul(&shift, &clock, qs).into_iter().map(|c| c * omega(1)).collect();
    let relation_deviation = cmat_dist(&uv, &vu);

    let th = ThetaMatrix::two(theta);
    let mats = [(&clock, &clock_inv), (&shift, &shift_inv)];
    let mut max_word_deviation = 0.0f64;
    for word in words {
        let mut sym = WeylWord::identity(2);
        let mut mat = cmat_pow(&clock, &clock_inv, 0, qs);
        for &(g, e) in word {
            if g > 1 {
                return Err(Error::DimensionMismatch { expected: 2, got: g + 1 });
            }
            let letter = word_pow(&WeylWord::generator(2, g), &BigInt::from(e), &th)?;
            sym = word_mul(&sym, &letter, &th)?;
            mat = cmat_mul(&mat, &cmat_pow(mats[g].0, mats[g].1, e, qs), qs);
        }
        let a = sym.exponents[0].to_i64().ok_or(Error::ExponentOverflow(0))?;
        let b = sym.exponents[1].to_i64().ok_or(Error::ExponentOverflow(0))?;
        let expect: CMat = cmat_mul(&cmat_pow(&clock, &clock_inv, a, qs), &cmat_pow(&shift, &shift_inv, b, qs), qs)
            .into_iter()
            .map(|c| c * sym.phase.exp_2pi_i())
            .collect();
        max_word_deviation = max_word_deviation.max(cmat_dist(&mat, &expect));
    }
    Ok(ClockShiftReport {
        q,
        p,
        relation_deviation,
        words: words.len(),
        max_word_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::GeneratorSet;

    fn shear() -> IntMatrix {
        IntMatrix::from_i64(&[&[1, 1], &[0, 1]])
    }

    fn th(s: &str) -> ThetaMatrix {
        let mut gs = GeneratorSet::new();
        gs.declare("g1 = sqrt2 : 1.41421356237309504880").unwrap();
        ThetaMatrix::two(gs.parse(s).unwrap())
    }

    fn word(phase: &str, x: &[i64]) -> WeylWord {
        WeylWord::from_i64(crate::exactnum::parse_rational_scalar(phase).unwrap(), x)
    }

    #[test]
    fn word_mul_examples() {
        let t = th("g1");
        let u1 = WeylWord::generator(2, 0);
        let u2 = WeylWord::generator(2, 1);
        let p = word_mul(&u2, &u1, &t).unwrap();
        assert_eq!(p.exponents_i64().unwrap(), vec![1, 1]);
        assert!(p.phase().eq_mod_1(t.get(1, 0)));
        assert_eq!(word_mul(&WeylWord::identity(2), &u2, &t).unwrap(), u2);
        let q = ThetaMatrix::two(PhaseScalar::ratio(1, 4));
        let w = word_mul(&u1, &u2, &q).unwrap();
        let sq = word_mul(&w, &w, &q).unwrap();
        assert_eq!(sq, word("3/4", &[2, 2]));
        assert!(word_mul(&WeylWord::identity(3), &u1, &q).is_err());
    }

    #[test]
    fn apply_auto_examples() {
        let t = ThetaMatrix::two(PhaseScalar::ratio(1, 4));
        let u2 = WeylWord::generator(2, 1);
        assert_eq!(apply_auto(&IntMatrix::identity(2), &u2, &t).unwrap(), u2);
        assert_eq!(apply_auto(&shear(), &u2, &t).unwrap(), word("0", &[1, 1]));
        let sq = word_pow(&u2, &BigInt::from(2), &t).unwrap();
        // (u₁u₂)² = e(−θ₁₂) u₁²u₂²
        assert_eq!(apply_auto(&shear(), &sq, &t).unwrap(), word("3/4", &[2, 2]));
    }

    #[test]
    fn compatibility_check() {
        // S'ΘS = det(S)·Θ for d = 2, so det −1 needs 2θ ∈ Z
        let flip = IntMatrix::from_i64(&[&[0, 1], &[1, 0]]);
        assert_eq!(
            Automorphism::new(flip.clone(), th("g1")).unwrap_err(),
            Error::NotCompatible { row: 0, col: 1 }
        );
        assert!(Automorphism::new(flip, ThetaMatrix::two(PhaseScalar::ratio(1, 2))).is_ok());
        assert!(Automorphism::new(shear(), th("g1")).is_ok());
        assert!(ThetaMatrix::new(vec![vec![PhaseScalar::zero(), PhaseScalar::ratio(1, 3)], vec![PhaseScalar::ratio(1, 3), PhaseScalar::zero()]]).is_err());
    }

    #[test]
    fn inverse_undoes_apply() {
        let a = Automorphism::new(shear(), th("g1")).unwrap();
        for x in [[1, 0], [0, 1], [3, -2], [-5, 7]] {
            let w = WeylWord::from_i64(PhaseScalar::ratio(1, 7), &x);
            assert_eq!(a.apply_inverse(&a.apply(&w).unwrap()).unwrap(), w);
            assert_eq!(a.apply(&a.apply_inverse(&w).unwrap()).unwrap(), w);
        }
    }

    #[test]
    fn phase_poly_examples() {
        let t = th("g1");
        let id = Automorphism::new(IntMatrix::identity(2), t.clone()).unwrap();
        let rep = iterate_phase_polys(&id, &[BigInt::from(2), BigInt::from(3)], 1).unwrap();
        assert!(rep.residues[0].phase.coeffs().is_empty());
        assert!(rep.residues[0].exponents.iter().all(IntegralPolynomial::is_constant));

        let a = Automorphism::new(shear(), ThetaMatrix::two(PhaseScalar::ratio(1, 4))).unwrap();
        let rep = iterate_phase_polys(&a, &[BigInt::zero(), BigInt::one()], 1).unwrap();
        assert_eq!(rep.residues[0].exponents, vec![IntegralPolynomial::identity(), IntegralPolynomial::from_i64(&[1])]);
        let direct = a.iterate(&WeylWord::generator(2, 1), 50).unwrap();
        assert_eq!(rep.eval(50), direct);

        let a = Automorphism::new(shear(), t).unwrap();
        let rep = iterate_phase_polys(&a, &[BigInt::from(1), BigInt::from(1)], 1).unwrap();
        for n in -50..=50 {
            assert_eq!(rep.eval(n), a.iterate(&word("0", &[1, 1]), n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn phase_poly_quasi_unipotent() {
        // −shear has m = 2; d = 3 block with a Heisenberg-compatible Θ
        let s = IntMatrix::from_i64(&[&[-1, -1], &[0, -1]]);
        let a = Automorphism::new(s, th("g1")).unwrap();
        let rep = iterate_phase_polys(&a, &[BigInt::from(2), BigInt::from(-1)], 2).unwrap();
        assert_eq!(rep.residues.len(), 2);
        for n in -40..=40 {
            assert_eq!(rep.eval(n), a.iterate(&word("0", &[2, -1]), n).unwrap(), "n={n}");
        }
        let s3 = IntMatrix::from_i64(&[&[1, 1, 0], &[0, 1, 1], &[0, 0, 1]]);
        let t3 = ThetaMatrix::from_upper(3, &[(0, 1, PhaseScalar::ratio(1, 3))]).unwrap();
        assert!(Automorphism::new(s3.clone(), t3).is_err());
        // compatibility forces θ₁₂, θ₁₃ ∈ Z and leaves θ₂₃ free
        let t3 = ThetaMatrix::from_upper(3, &[(1, 2, th("g1").get(0, 1).clone())]).unwrap();
        let a3 = Automorphism::new(s3, t3).unwrap();
        for rho in [[0, 0, 1], [1, -2, 3]] {
            let rho_b: Vec<BigInt> = rho.iter().map(|&v| BigInt::from(v)).collect();
            let rep = iterate_phase_polys(&a3, &rho_b, 1).unwrap();
            assert!(rep.residues[0].phase.degree().unwrap_or(0) <= rep.bound);
            for n in -20..=20 {
                assert_eq!(rep.eval(n), a3.iterate(&word("0", &rho), n).unwrap(), "n={n}");
            }
        }
    }

    #[test]
    fn gns_examples() {
        let t = th("g1");
        let psi = SparseVector::basis(vec![0, 1]);
        assert_eq!(gns_apply(&WeylWord::identity(2), &psi, &t).unwrap(), psi);
        let out = gns_apply(&WeylWord::generator(2, 0), &psi, &t).unwrap();
        let oracle = word_mul(&WeylWord::generator(2, 0), &WeylWord::generator(2, 1), &t).unwrap();
        assert_eq!(out, SparseVector::basis(vec![1, 1]).scale(oracle.phase().exp_2pi_i()));
        // u₂ past δ_{e₁} picks up e(θ₂₁)
        let out = gns_apply(&WeylWord::generator(2, 1), &SparseVector::basis(vec![1, 0]), &t).unwrap();
        let (k, c) = out.sites().iter().next().unwrap();
        assert_eq!(k, &vec![1, 1]);
        assert!((c - t.get(1, 0).exp_2pi_i()).norm() < 1e-15);
    }

    #[test]
    fn gns_is_left_multiplication() {
        let t = th("g1");
        for x in [[1, 0], [0, 1], [2, -3], [-1, 4]] {
            for k in [[0, 0], [1, 1], [-2, 5]] {
                let w = WeylWord::from_i64(PhaseScalar::ratio(1, 9), &x);
                let out = gns_apply(&w, &SparseVector::basis(k.to_vec()), &t).unwrap();
                let prod = word_mul(&w, &WeylWord::from_i64(PhaseScalar::zero(), &k), &t).unwrap();
                let expect = SparseVector::basis(prod.exponents_i64().unwrap()).scale(prod.phase().exp_2pi_i());
                let diff = out.add(&expect.scale(Complex64::new(-1.0, 0.0))).unwrap();
                assert!(diff.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn state_seq_examples() {
        let t = th("g1");
        let id = Automorphism::new(IntMatrix::identity(2), t.clone()).unwrap();
        let one = WeylElement::from_word(&WeylWord::identity(2)).unwrap();
        let w = SparseVector::from_sites([(vec![0, 0], Complex64::new(0.6, 0.0)), (vec![3, 1], Complex64::new(0.0, 0.8))]);
        let seq = state_seq(&id, &one, &w).unwrap();
        for n in -10..=10 {
            assert!((seq.at(n) - 1.0).norm() < 1e-15);
        }
        let u1 = WeylElement::from_word(&WeylWord::generator(2, 0)).unwrap();
        let seq = state_seq(&id, &u1, &SparseVector::basis(vec![0, 0])).unwrap();
        assert!((-10..=10).all(|n| seq.at(n) == Complex64::zero()));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let w = SparseVector::from_sites([(vec![0, 0], Complex64::new(h, 0.0)), (vec![-1, 0], Complex64::new(h, 0.0))]);
        let seq = state_seq(&id, &u1, &w).unwrap();
        let oracle = word_mul(&WeylWord::generator(2, 0), &WeylWord::from_i64(PhaseScalar::zero(), &[-1, 0]), &t).unwrap();
        assert!((seq.at(3) - 0.5 * oracle.phase().exp_2pi_i()).norm() < 1e-15);
        assert!(matches!(
            state_seq(&id, &u1, &SparseVector::basis(vec![0, 0]).scale(Complex64::new(2.0, 0.0))),
            Err(Error::NotUnitVector { .. })
        ));
    }

    #[test]
    fn state_seq_matches_word_iteration() {
        let t = th("g1");
        let a = Automorphism::new(shear(), t.clone()).unwrap();
        let u = WeylElement::from_terms([
            (vec![0, 1], Complex64::new(0.5, 0.0)),
            (vec![1, -1], Complex64::new(0.0, 0.25)),
            (vec![0, 0], Complex64::new(0.25, 0.0)),
        ]);
        let w = SparseVector::from_sites([
            (vec![0, 0], Complex64::new(0.6, 0.0)),
            (vec![1, 0], Complex64::new(0.0, 0.48)),
            (vec![5, 0], Complex64::new(0.64, 0.0)),
        ]);
        let seq = state_seq(&a, &u, &w).unwrap();
        for n in -30..=30 {
            let direct = u.apply_auto_n(&a, n).unwrap().state(&w, &t).unwrap();
            assert!((seq.at(n) - direct).norm() < 1e-12, "n={n}");
            assert!((seq.b(n) + seq.c(n) - seq.at(n)).norm() < 1e-15);
        }
    }

    #[test]
    fn clock_shift_examples() {
        let r = clock_shift_check(&PhaseScalar::zero(), &[vec![(0, 1), (1, 1)]]).unwrap();
        assert_eq!(r.q, 1);
        assert_eq!(r.relation_deviation, 0.0);
        let pauli = clock_shift_check(&PhaseScalar::ratio(1, 2), &[vec![(0, 1), (1, 1), (0, -1)]]).unwrap();
        assert_eq!(pauli.q, 2);
        assert!(pauli.relation_deviation < 1e-15);
        assert!(pauli.max_word_deviation < 1e-15);
        let five = clock_shift_check(&PhaseScalar::ratio(2, 5), &[vec![(1, 2), (0, -1), (1, -3), (0, 2), (1, 1)]]).unwrap();
        assert!(five.relation_deviation < 1e-14 && five.max_word_deviation < 1e-14);
        let mut gs = GeneratorSet::new();
        gs.declare("g1 = sqrt2 : 1.41421356237309504880").unwrap();
        assert_eq!(clock_shift_check(&gs.parse("g1").unwrap(), &[]).unwrap_err(), Error::NotRational);
    }
}
