//! Shift-phase unitaries on `ℓ²(Z^δ)` plus a commuting atomic sector, and
//! the split `⟨g(n)u, v⟩ = b_n + c_n` into an explicit nilsequence and a
//! certified zero-density residual.
//!
//! Every operator has the form `δ_k ↦ e(φ + L(k)) δ_{k+r}` with a linear
//! phase form `L`; compositions stay in this class and commutators are
//! scalars, so the generated groups are 2-step nilpotent.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{Basis, IntegralPolynomial, PhaseEvaluator, PhasePolynomial, PhaseScalar};
use crate::nilseq::{SequenceStream, Tag};

pub type Site = Vec<i64>;

fn add_sites(a: &[i64], b: &[i64]) -> Result<Site> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.checked_add(*y).ok_or(Error::ExponentOverflow(0)))
        .collect()
}

fn pair(form: &[PhaseScalar], k: &[i64]) -> PhaseScalar {
    let mut acc = PhaseScalar::zero();
    for (l, c) in form.iter().zip(k) {
        if *c != 0 && !l.is_zero() {
            acc.add_assign(&l.scale_int(&BigInt::from(*c)));
        }
    }
    acc
}

/// `δ_k ↦ e(φ + L(k)) δ_{k+r}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ShiftPhaseOperator {
    shift: Site,
    phase: PhaseScalar,
    form: Vec<PhaseScalar>,
}

impl ShiftPhaseOperator {
    pub fn new(shift: Site, phase: PhaseScalar, form: Vec<PhaseScalar>) -> Result<Self> {
        if shift.len() != form.len() {
            return Err(Error::DimensionMismatch {
                expected: shift.len(),
                got: form.len(),
            });
        }
        Ok(ShiftPhaseOperator {
            shift,
            phase: phase.reduce_mod_1(),
            form: form.iter().map(PhaseScalar::reduce_mod_1).collect(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        ShiftPhaseOperator {
            shift: vec![0; dim],
            phase: PhaseScalar::zero(),
            form: vec![PhaseScalar::zero(); dim],
        }
    }

    /// Pure translation by `r`.
    pub fn translation(shift: Site) -> Self {
        let d = shift.len();
        ShiftPhaseOperator {
            shift,
            phase: PhaseScalar::zero(),
            form: vec![PhaseScalar::zero(); d],
        }
    }

    /// Diagonal modulation `δ_k ↦ e(φ + L(k)) δ_k`.
    pub fn modulation(phase: PhaseScalar, form: Vec<PhaseScalar>) -> Self {
        let d = form.len();
        ShiftPhaseOperator::new(vec![0; d], phase, form).expect("matching dimension")
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn shift(&self) -> &[i64] {
        &self.shift
    }

    pub fn phase(&self) -> &PhaseScalar {
        &self.phase
    }

    pub fn form(&self) -> &[PhaseScalar] {
        &self.form
    }

    pub fn is_diagonal(&self) -> bool {
        self.shift.iter().all(|&r| r == 0)
    }

    /// `L(k)`.
    pub fn form_at(&self, k: &[i64]) -> PhaseScalar {
        pair(&self.form, k)
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &ShiftPhaseOperator) -> Result<ShiftPhaseOperator> {
        if self.dim() != first.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: first.dim(),
            });
        }
        let phase = first.phase.add(&self.phase).add(&self.form_at(&first.shift));
        let form = self.form.iter().zip(&first.form).map(|(a, b)| a.add(b)).collect();
        ShiftPhaseOperator::new(add_sites(&self.shift, &first.shift)?, phase, form)
    }

    pub fn inverse(&self) -> ShiftPhaseOperator {
        let phase = self.phase.neg().add(&self.form_at(&self.shift));
        ShiftPhaseOperator::new(
            self.shift.iter().map(|r| -r).collect(),
            phase,
            self.form.iter().map(PhaseScalar::neg).collect(),
        )
        .expect("same dimension")
    }

    /// `W^n = (nr, nφ + C(n,2) L(r), nL)` for every integer `n`.
    pub fn pow(&self, n: i64) -> Result<ShiftPhaseOperator> {
        let nb = BigInt::from(n);
        let c2 = crate::exactnum::binomial(&nb, 2);
        let shift = self
            .shift
            .iter()
            .map(|r| r.checked_mul(n).ok_or(Error::ExponentOverflow(n)))
            .collect::<Result<Site>>()?;
        let phase = self.phase.scale_int(&nb).add(&self.form_at(&self.shift).scale_int(&c2));
        ShiftPhaseOperator::new(shift, phase, self.form.iter().map(|l| l.scale_int(&nb)).collect())
    }

    /// Image of a basis vector: `(phase, target site)`.
    pub fn apply_site(&self, k: &[i64]) -> Result<(PhaseScalar, Site)> {
        Ok((self.phase.add(&self.form_at(k)), add_sites(k, &self.shift)?))
    }

    /// Action on the site part; atoms are left alone (a single operator
    /// carries no eigenphases for them).
    pub fn apply(&self, psi: &SparseVector) -> Result<SparseVector> {
        let mut out = SparseVector {
            sites: BTreeMap::new(),
            atoms: psi.atoms.clone(),
        };
        for (k, c) in &psi.sites {
            let (ph, target) = self.apply_site(k)?;
            out.sites.insert(target, c * ph.exp_2pi_i());
        }
        Ok(out)
    }
}

/// Atomic-sector basis vector: a joint eigenvector with one eigenphase per
/// generator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Atom {
    pub coeff: [f64; 2],
    pub eigenphases: Vec<PhaseScalar>,
}

impl Atom {
    pub fn coeff(&self) -> Complex64 {
        Complex64::new(self.coeff[0], self.coeff[1])
    }
}

/// Finitely supported vector in `ℓ²(Z^δ) ⊕ atomic sector`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseVector {
    sites: BTreeMap<Site, Complex64>,
    atoms: BTreeMap<u64, Atom>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn basis(site: Site) -> Self {
        let mut v = SparseVector::new();
        v.add_site(site, Complex64::new(1.0, 0.0));
        v
    }

    pub fn from_sites(entries: impl IntoIterator<Item = (Site, Complex64)>) -> Self {
        let mut v = SparseVector::new();
        for (k, c) in entries {
            v.add_site(k, c);
        }
        v
    }

    pub fn add_site(&mut self, site: Site, c: Complex64) {
        let e = self.sites.entry(site.clone()).or_insert(Complex64::zero());
        *e += c;
        if *e == Complex64::zero() {
            self.sites.remove(&site);
        }
    }

    pub fn add_atom(&mut self, id: u64, c: Complex64, eigenphases: Vec<PhaseScalar>) -> Result<()> {
        if let Some(a) = self.atoms.get_mut(&id) {
            if a.eigenphases != eigenphases {
                return Err(Error::InconsistentAtom { id });
            }
            let s = a.coeff() + c;
            a.coeff = [s.re, s.im];
        } else if c != Complex64::zero() {
            self.atoms.insert(
                id,
                Atom {
                    coeff: [c.re, c.im],
                    eigenphases: eigenphases.iter().map(PhaseScalar::reduce_mod_1).collect(),
                },
            );
        }
        Ok(())
    }

    pub fn sites(&self) -> &BTreeMap<Site, Complex64> {
        &self.sites
    }

    pub fn atoms(&self) -> &BTreeMap<u64, Atom> {
        &self.atoms
    }

    pub fn site_part(&self) -> SparseVector {
        SparseVector {
            sites: self.sites.clone(),
            atoms: BTreeMap::new(),
        }
    }

    pub fn atom_part(&self) -> SparseVector {
        SparseVector {
            sites: BTreeMap::new(),
            atoms: self.atoms.clone(),
        }
    }

    /// `⟨self, other⟩`, linear in the first argument.
    pub fn inner(&self, other: &SparseVector) -> Complex64 {
        let mut acc = Complex64::zero();
        for (k, c) in &self.sites {
            if let Some(d) = other.sites.get(k) {
                acc += c * d.conj();
            }
        }
        for (id, a) in &self.atoms {
            if let Some(b) = other.atoms.get(id) {
                acc += a.coeff() * b.coeff().conj();
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    pub fn scale(&self, s: Complex64) -> SparseVector {
        SparseVector {
            sites: self.sites.iter().map(|(k, c)| (k.clone(), c * s)).collect(),
            atoms: self
                .atoms
                .iter()
                .map(|(id, a)| {
                    let c = a.coeff() * s;
                    (
                        *id,
                        Atom {
                            coeff: [c.re, c.im],
                            eigenphases: a.eigenphases.clone(),
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &SparseVector) -> Result<SparseVector> {
        let mut out = self.clone();
        for (k, c) in &other.sites {
            out.add_site(k.clone(), *c);
        }
        for (id, a) in &other.atoms {
            out.add_atom(*id, a.coeff(), a.eigenphases.clone())?;
        }
        Ok(out)
    }

    pub fn dim(&self) -> Option<usize> {
        self.sites.keys().next().map(Vec::len)
    }
}

/// `g(n) = U₁^{p₁(n)} ⋯ U_k^{p_k(n)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GPolynomial {
    generators: Vec<ShiftPhaseOperator>,
    exponents: Vec<IntegralPolynomial>,
    dim: usize,
}

impl GPolynomial {
    pub fn new(dim: usize, generators: Vec<ShiftPhaseOperator>, exponents: Vec<IntegralPolynomial>) -> Result<Self> {
        if generators.len() != exponents.len() {
            return Err(Error::ArityMismatch {
                expected: generators.len(),
                got: exponents.len(),
            });
        }
        if let Some(g) = generators.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: g.dim(),
            });
        }
        Ok(GPolynomial {
            generators,
            exponents,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[ShiftPhaseOperator] {
        &self.generators
    }

    pub fn exponents(&self) -> &[IntegralPolynomial] {
        &self.exponents
    }

    fn exponent_at(&self, i: usize, n: i64) -> Result<i64> {
        self.exponents[i].eval_i64(n).to_i64().ok_or(Error::ExponentOverflow(n))
    }

    /// Normal form of `g(n)`, multiplied left to right.
    pub fn eval(&self, n: i64) -> Result<ShiftPhaseOperator> {
        let mut acc = ShiftPhaseOperator::identity(self.dim);
        for (i, u) in self.generators.iter().enumerate() {
            acc = acc.compose(&u.pow(self.exponent_at(i, n)?)?)?;
        }
        Ok(acc)
    }

    /// `f_ξ(n) = Σ_i p_i(n) ξ_i` for an eigenphase tuple.
    pub fn atom_phase(&self, eigenphases: &[PhaseScalar]) -> Result<PhasePolynomial> {
        if eigenphases.len() != self.generators.len() {
            return Err(Error::ArityMismatch {
                expected: self.generators.len(),
                got: eigenphases.len(),
            });
        }
        Ok(self
            .exponents
            .iter()
            .zip(eigenphases)
            .fold(PhasePolynomial::zero(), |acc, (p, xi)| acc.add(&PhasePolynomial::from_integral(p, xi))))
    }

    /// `g(n) ψ` including the atomic sector.
    pub fn apply(&self, n: i64, psi: &SparseVector) -> Result<SparseVector> {
        let mut out = self.eval(n)?.apply(&psi.site_part())?;
        for (id, a) in &psi.atoms {
            let ph = self.atom_phase(&a.eigenphases)?.eval_i64(n);
            out.add_atom(*id, a.coeff() * ph.exp_2pi_i(), a.eigenphases.clone())?;
        }
        Ok(out)
    }

    /// `a_n = ⟨g(n)u, v⟩` by direct evaluation.
    pub fn matrix_element(&self, n: i64, u: &SparseVector, v: &SparseVector) -> Result<Complex64> {
        Ok(self.apply(n, u)?.inner(v))
    }

    /// The operator family `n ↦ g(n)` with polynomial shift, phase and form.
    pub fn symbolic(&self) -> OperatorFamily {
        let mut acc = OperatorFamily::constant(&ShiftPhaseOperator::identity(self.dim));
        for (u, p) in self.generators.iter().zip(&self.exponents) {
            acc = acc.compose(&OperatorFamily::power(u, p));
        }
        acc
    }
}

/// `op_pow` as a free function.
pub fn op_pow(w: &ShiftPhaseOperator, n: i64) -> Result<ShiftPhaseOperator> {
    w.pow(n)
}

/// `g_eval` as a free function.
pub fn g_eval(g: &GPolynomial, n: i64) -> Result<ShiftPhaseOperator> {
    g.eval(n)
}

/// `n ↦ (R(n), φ(n), L_n)` with integral polynomial shift and phase
/// polynomial phase and form, all in the binomial basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorFamily {
    shift: Vec<IntegralPolynomial>,
    phase: PhasePolynomial,
    form: Vec<PhasePolynomial>,
}

/// `C(p(t), 2)` as an integral polynomial.
fn choose2(p: &IntegralPolynomial) -> IntegralPolynomial {
    let deg = 2 * p.degree().unwrap_or(0);
    let values: Vec<BigInt> = (0..=deg as i64)
        .map(|t| crate::exactnum::binomial(&p.eval_i64(t), 2))
        .collect();
    IntegralPolynomial::from_values(&values)
}

impl OperatorFamily {
    pub fn new(shift: Vec<IntegralPolynomial>, phase: PhasePolynomial, form: Vec<PhasePolynomial>) -> Result<Self> {
        if shift.len() != form.len() {
            return Err(Error::DimensionMismatch {
                expected: shift.len(),
                got: form.len(),
            });
        }
        Ok(OperatorFamily {
            shift,
            phase: phase.reduce_mod_1(),
            form: form.iter().map(PhasePolynomial::reduce_mod_1).collect(),
        })
    }

    pub fn constant(op: &ShiftPhaseOperator) -> Self {
        OperatorFamily {
            shift: op.shift.iter().map(|&r| IntegralPolynomial::constant(BigInt::from(r))).collect(),
            phase: PhasePolynomial::constant(op.phase.clone()).reduce_mod_1(),
            form: op.form.iter().map(|l| PhasePolynomial::constant(l.clone()).reduce_mod_1()).collect(),
        }
    }

    /// `n ↦ W^{p(n)}`.
    pub fn power(w: &ShiftPhaseOperator, p: &IntegralPolynomial) -> Self {
        let c2 = choose2(p);
        let phase = PhasePolynomial::from_integral(p, &w.phase)
            .add(&PhasePolynomial::from_integral(&c2, &w.form_at(&w.shift)));
        OperatorFamily {
            shift: w.shift.iter().map(|&r| p.scale(&BigInt::from(r))).collect(),
            phase: phase.reduce_mod_1(),
            form: w.form.iter().map(|l| PhasePolynomial::from_integral(p, l).reduce_mod_1()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn shift(&self) -> &[IntegralPolynomial] {
        &self.shift
    }

    pub fn phase(&self) -> &PhasePolynomial {
        &self.phase
    }

    pub fn form(&self) -> &[PhasePolynomial] {
        &self.form
    }

    /// `self(n) ∘ first(n)`.
    pub fn compose(&self, first: &OperatorFamily) -> OperatorFamily {
        let mut phase = first.phase.add(&self.phase);
        for (l, r) in self.form.iter().zip(&first.shift) {
            if !r.is_zero() {
                phase = phase.add(&l.mul_integral(r));
            }
        }
        OperatorFamily {
            shift: self.shift.iter().zip(&first.shift).map(|(a, b)| a.add(b)).collect(),
            phase: phase.reduce_mod_1(),
            form: self.form.iter().zip(&first.form).map(|(a, b)| a.add(b).reduce_mod_1()).collect(),
        }
    }

    pub fn shift_at(&self, n: i64) -> Result<Site> {
        self.shift
            .iter()
            .map(|p| p.eval_i128(n).and_then(|v| i64::try_from(v).ok()).ok_or(Error::ExponentOverflow(n)))
            .collect()
    }

    pub fn eval(&self, n: i64) -> Result<ShiftPhaseOperator> {
        ShiftPhaseOperator::new(
            self.shift_at(n)?,
            self.phase.eval_i64(n),
            self.form.iter().map(|l| l.eval_i64(n)).collect(),
        )
    }

    pub fn shift_is_zero(&self) -> bool {
        self.shift.iter().all(IntegralPolynomial::is_zero)
    }

    /// Largest degree among the shift, phase and form polynomials.
    pub fn degree(&self) -> usize {
        self.shift
            .iter()
            .filter_map(IntegralPolynomial::degree)
            .chain(self.phase.degree())
            .chain(self.form.iter().filter_map(PhasePolynomial::degree))
            .max()
            .unwrap_or(0)
    }

    /// Phase polynomial `φ(n) + L_n(k)` seen by the basis vector `δ_k`.
    pub fn site_phase(&self, k: &[i64]) -> PhasePolynomial {
        let mut p = self.phase.clone();
        for (l, c) in self.form.iter().zip(k) {
            if *c != 0 {
                p = p.add(&l.scale_int(&BigInt::from(*c)));
            }
        }
        p.reduce_mod_1()
    }
}

/// Which sectors lie in the compact part `Hᶜ` of the group generated by the
/// given operators. Commutators are scalars, so only the shifts matter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SectorDescriptor {
    /// The atomic sector consists of joint eigenvectors: always compact.
    pub atomic_compact: bool,
    /// The site sector is compact iff every generator is diagonal;
    /// otherwise a nonzero translation leaves no ℓ² eigenvectors and the
    /// whole site sector is weakly mixing.
    pub sparse_compact: bool,
}

pub fn compact_subspace(generators: &[ShiftPhaseOperator]) -> SectorDescriptor {
    SectorDescriptor {
        atomic_compact: true,
        sparse_compact: generators.iter().all(ShiftPhaseOperator::is_diagonal),
    }
}

/// One term `coeff · e(phase(n))` of the nilsequence part.
#[derive(Clone, Debug)]
pub struct NilTerm {
    pub coeff: Complex64,
    pub phase: PhasePolynomial,
    eval: PhaseEvaluator,
}

impl NilTerm {
    pub fn new(coeff: Complex64, phase: PhasePolynomial) -> Self {
        let phase = phase.reduce_mod_1();
        let eval = phase.compile();
        NilTerm { coeff, phase, eval }
    }

    pub fn at(&self, n: i64) -> Complex64 {
        self.coeff * self.eval.exp(n)
    }
}

impl PartialEq for NilTerm {
    fn eq(&self, other: &Self) -> bool {
        self.coeff == other.coeff && self.phase == other.phase
    }
}

#[derive(Clone, Debug, Serialize)]
struct NilTermJson {
    re: f64,
    im: f64,
    phase: String,
}

/// Weakly mixing component: `coeff · ⟨F(n) u, v⟩` with `F` a normalized
/// family with nonconstant shift.
#[derive(Clone, Debug)]
struct ResidualPart {
    coeff: Complex64,
    family: OperatorFamily,
    /// `(k, u_k, phase of δ_k)` for the source vector.
    sources: Vec<(Site, Complex64, PhaseEvaluator)>,
    target: BTreeMap<Site, Complex64>,
    diffs: HashSet<Site>,
    norm_bound: f64,
}

impl ResidualPart {
    fn new(coeff: Complex64, family: OperatorFamily, u: &SparseVector, v: &SparseVector) -> Self {
        let sources = u
            .sites
            .iter()
            .map(|(k, c)| (k.clone(), *c, family.site_phase(k).compile()))
            .collect();
        let diffs = v
            .sites
            .keys()
            .flat_map(|b| u.sites.keys().map(move |a| b.iter().zip(a).map(|(x, y)| x - y).collect()))
            .collect();
        ResidualPart {
            coeff,
            family,
            sources,
            target: v.sites.clone(),
            diffs,
            norm_bound: coeff.norm() * u.site_part().norm() * v.site_part().norm(),
        }
    }

    fn hit(&self, n: i64) -> Option<Site> {
        let r = self.family.shift_at(n).ok()?;
        self.diffs.contains(&r).then_some(r)
    }

    fn at(&self, n: i64) -> Complex64 {
        let Some(r) = self.hit(n) else {
            return Complex64::zero();
        };
        let mut acc = Complex64::zero();
        for (k, c, ph) in &self.sources {
            let target: Site = k.iter().zip(&r).map(|(a, b)| a + b).collect();
            if let Some(d) = self.target.get(&target) {
                acc += c * d.conj() * ph.exp(n);
            }
        }
        self.coeff * acc
    }

    /// Integers `n` with `R(n) ∈ supp v − supp u`, or `None` if the root
    /// search exceeds `cap`.
    fn hit_set(&self, cap: u64) -> Option<BTreeSet<i64>> {
        let lead = self.family.shift.iter().position(|p| !p.is_constant())?;
        let mut out = BTreeSet::new();
        for delta in &self.diffs {
            let target = self.family.shift[lead].sub(&IntegralPolynomial::constant(BigInt::from(delta[lead])));
            for n in integer_roots(&target, cap)? {
                if self.family.shift_at(n).ok().as_ref() == Some(delta) {
                    out.insert(n);
                }
            }
        }
        Some(out)
    }
}

/// Integer roots of a nonconstant integral polynomial, by exact evaluation
/// on the Cauchy interval; `None` if that interval is wider than `cap`.
pub fn integer_roots(p: &IntegralPolynomial, cap: u64) -> Option<Vec<i64>> {
    let mono = p.to_monomial();
    let deg = mono.iter().rposition(|c| !c.is_zero())?;
    if deg == 0 {
        return Some(Vec::new());
    }
    let lead = mono[deg].abs();
    let ratio = mono[..deg]
        .iter()
        .map(|c| c.abs() / &lead)
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
    let bound: BigInt = ratio.ceil().to_integer() + 1;
    let bound = bound.to_u64().filter(|&b| b <= cap)? as i64;
    Some((-bound..=bound).filter(|&n| p.eval_i64(n).is_zero()).collect())
}

/// How `c_n` was shown to have zero density.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// No weakly mixing component: `c_n ≡ 0`.
    Vanishing,
    /// `c_n = 0` off a finite set; `|c_n| ≤ bound` on it.
    HitSet { hits: Vec<i64>, bound: f64 },
    /// Root search too large; measured two-sided Cesàro average.
    Measured { n: u64, abs_avg: f64 },
}

impl Certificate {
    /// Upper bound on `(1/(2N+1)) Σ_{|n|≤N} |c_n|` implied by a hit set.
    pub fn cesaro_bound(&self, n: u64) -> Option<f64> {
        match self {
            Certificate::Vanishing => Some(0.0),
            Certificate::HitSet { hits, bound } => {
                let count = hits.iter().filter(|h| h.unsigned_abs() <= n).count();
                Some(count as f64 * bound / (2 * n + 1) as f64)
            }
            Certificate::Measured { .. } => None,
        }
    }

    /// Number of hits in `[−N, N]`.
    pub fn hit_count(&self, n: u64) -> Option<usize> {
        match self {
            Certificate::Vanishing => Some(0),
            Certificate::HitSet { hits, .. } => Some(hits.iter().filter(|h| h.unsigned_abs() <= n).count()),
            Certificate::Measured { .. } => None,
        }
    }
}

/// Root-search limit for hit sets.
pub const HIT_SEARCH_CAP: u64 = 10_000_000;
/// Window used when a hit set is not available.
pub const MEASURE_N: u64 = 100_000;

/// `a_n = b_n + c_n` with `b_n` a finite sum of polynomial phases and `c_n`
/// the weakly mixing residual.
#[derive(Clone, Debug)]
pub struct DecompositionResult {
    pub sectors: SectorDescriptor,
    /// `g(0)` was not the identity and has been absorbed into `u`.
    pub normalized: bool,
    nil_terms: Vec<NilTerm>,
    residual: Vec<ResidualPart>,
    pub certificate: Certificate,
}

impl DecompositionResult {
    pub fn nil_terms(&self) -> &[NilTerm] {
        &self.nil_terms
    }

    pub fn b(&self, n: i64) -> Complex64 {
        self.nil_terms.iter().map(|t| t.at(n)).sum()
    }

    pub fn c(&self, n: i64) -> Complex64 {
        self.residual.iter().map(|r| r.at(n)).sum()
    }

    pub fn a(&self, n: i64) -> Complex64 {
        self.b(n) + self.c(n)
    }

    pub fn has_residual(&self) -> bool {
        !self.residual.is_empty()
    }

    /// Whether `c_n` can be nonzero at `n`.
    pub fn is_hit(&self, n: i64) -> bool {
        self.residual.iter().any(|r| r.hit(n).is_some())
    }

    fn max_degree(&self) -> u32 {
        self.nil_terms.iter().filter_map(|t| t.phase.degree()).max().unwrap_or(0) as u32
    }

    pub fn b_stream(&self) -> SequenceStream {
        let me = self.clone();
        let bound = self.nil_terms.iter().map(|t| t.coeff.norm()).sum();
        SequenceStream::new(move |n| me.b(n), Some(bound), Tag::Nil { step: self.max_degree() }, "b_n")
    }

    pub fn c_stream(&self) -> SequenceStream {
        let me = self.clone();
        let bound = self.residual.iter().map(|r| r.norm_bound).sum();
        SequenceStream::new(move |n| me.c(n), Some(bound), Tag::ZeroDensity, "c_n")
    }

    /// `a_n` tagged by the construction: nil, or almost-nil when a residual
    /// is present.
    pub fn a_stream(&self) -> SequenceStream {
        let me = self.clone();
        let bound = self.nil_terms.iter().map(|t| t.coeff.norm()).sum::<f64>()
            + self.residual.iter().map(|r| r.norm_bound).sum::<f64>();
        let tag = if self.has_residual() {
            Tag::AlmostNil
        } else {
            Tag::Nil { step: self.max_degree() }
        };
        SequenceStream::new(move |n| me.a(n), Some(bound), tag, "a_n")
    }

    /// `Σ_i w_i · D_i`, merging terms with equal phase polynomials.
    pub fn combine(parts: &[(Complex64, DecompositionResult)]) -> DecompositionResult {
        let mut terms: Vec<NilTerm> = Vec::new();
        let mut residual = Vec::new();
        let mut sectors = SectorDescriptor {
            atomic_compact: true,
            sparse_compact: true,
        };
        let mut normalized = false;
        for (w, d) in parts {
            sectors.sparse_compact &= d.sectors.sparse_compact;
            normalized |= d.normalized;
            for t in &d.nil_terms {
                match terms.iter_mut().find(|s| s.phase == t.phase) {
                    Some(s) => s.coeff += w * t.coeff,
                    None => terms.push(NilTerm {
                        coeff: w * t.coeff,
                        ..t.clone()
                    }),
                }
            }
            for r in &d.residual {
                let mut r = r.clone();
                r.coeff *= w;
                r.norm_bound *= w.norm();
                residual.push(r);
            }
        }
        let certificate = certify(&residual);
        DecompositionResult {
            sectors,
            normalized,
            nil_terms: terms,
            residual,
            certificate,
        }
    }

    pub fn to_json(&self) -> DecompositionJson {
        DecompositionJson {
            sectors: self.sectors,
            normalized: self.normalized,
            nil_terms: self
                .nil_terms
                .iter()
                .map(|t| NilTermJson {
                    re: t.coeff.re,
                    im: t.coeff.im,
                    phase: t.phase.to_string(),
                })
                .collect(),
            residual_parts: self.residual.len(),
            certificate: self.certificate.clone(),
        }
    }
}

/// Serializable summary of a [`DecompositionResult`].
#[derive(Clone, Debug, Serialize)]
pub struct DecompositionJson {
    sectors: SectorDescriptor,
    normalized: bool,
    nil_terms: Vec<NilTermJson>,
    residual_parts: usize,
    certificate: Certificate,
}

fn certify(residual: &[ResidualPart]) -> Certificate {
    if residual.is_empty() {
        return Certificate::Vanishing;
    }
    let mut hits = BTreeSet::new();
    for r in residual {
        match r.hit_set(HIT_SEARCH_CAP) {
            Some(h) => hits.extend(h),
            None => {
                let vals: Vec<Complex64> = (0..2 * MEASURE_N as usize + 1)
                    .map(|i| residual.iter().map(|r| r.at(crate::sum::two_sided_value(i))).sum())
                    .collect();
                let rep = crate::mobius::cesaro_from_two_sided(&vals, &[MEASURE_N], crate::sum::SumMethod::Pairwise);
                return Certificate::Measured {
                    n: MEASURE_N,
                    abs_avg: rep.rows[0].abs_avg,
                };
            }
        }
    }
    Certificate::HitSet {
        hits: hits.into_iter().collect(),
        bound: residual.iter().map(|r| r.norm_bound).sum(),
    }
}

/// Splits `⟨F(n) u, v⟩` for an operator family acting on the site sector.
pub fn decompose_family(family: &OperatorFamily, u: &SparseVector, v: &SparseVector) -> Result<DecompositionResult> {
    decompose_inner(family, None, u, v)
}

/// Splits `a_n = ⟨g(n)u, v⟩` into `b_n + c_n`.
pub fn decompose(g: &GPolynomial, u: &SparseVector, v: &SparseVector) -> Result<DecompositionResult> {
    decompose_inner(&g.symbolic(), Some(g), u, v)
}

fn decompose_inner(
    family: &OperatorFamily,
    g: Option<&GPolynomial>,
    u: &SparseVector,
    v: &SparseVector,
) -> Result<DecompositionResult> {
    for vec in [u, v] {
        if let Some(d) = vec.dim() {
            if d != family.dim() {
                return Err(Error::DimensionMismatch {
                    expected: family.dim(),
                    got: d,
                });
            }
        }
    }
    if g.is_none() && (!u.atoms.is_empty() || !v.atoms.is_empty()) {
        return Err(Error::Invalid("atomic components need a G-polynomial with eigenphases".into()));
    }

    // g̃(n) = g(n) g(0)^{-1}, ũ = g(0) u
    let g0 = family.eval(0)?;
    let normalized = g0 != ShiftPhaseOperator::identity(family.dim());
    let fam = family.compose(&OperatorFamily::constant(&g0.inverse()));
    let u_sites = g0.apply(&u.site_part())?;

    // E is generated by g̃(1), …, g̃(deg+1); g̃(0) is the identity
    let e_gens = (1..=fam.degree() as i64 + 1)
        .map(|n| fam.eval(n))
        .collect::<Result<Vec<_>>>()?;
    let sectors = compact_subspace(&e_gens);
    debug_assert_eq!(sectors.sparse_compact, fam.shift_is_zero());

    let mut nil_terms = Vec::new();
    if let Some(g) = g {
        for (id, a) in &u.atoms {
            if let Some(b) = v.atoms.get(id) {
                let f = g.atom_phase(&a.eigenphases)?;
                nil_terms.push(NilTerm::new(a.coeff() * b.coeff().conj(), f));
            }
        }
    }
    let mut residual = Vec::new();
    if sectors.sparse_compact {
        for (k, c) in &u_sites.sites {
            if let Some(d) = v.sites.get(k) {
                nil_terms.push(NilTerm::new(c * d.conj(), fam.site_phase(k)));
            }
        }
    } else if !u_sites.sites.is_empty() && !v.sites.is_empty() {
        residual.push(ResidualPart::new(Complex64::new(1.0, 0.0), fam, &u_sites, &v.site_part()));
    }
    let certificate = certify(&residual);
    Ok(DecompositionResult {
        sectors,
        normalized,
        nil_terms,
        residual,
        certificate,
    })
}

/// `¼ Σ_k i^k D(u + i^k v, u + i^k v)`, which equals `D(u, v)`.
pub fn polarize(g: &GPolynomial, u: &SparseVector, v: &SparseVector) -> Result<DecompositionResult> {
    let i = Complex64::new(0.0, 1.0);
    let mut parts = Vec::new();
    let mut ik = Complex64::new(1.0, 0.0);
    for _ in 0..4 {
        let w = u.add(&v.scale(ik))?;
        parts.push((ik * 0.25, decompose(g, &w, &w)?));
        ik *= i;
    }
    Ok(DecompositionResult::combine(&parts))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AtomCase {
    /// `μ×μ(W₂) = 0`
    CaseI,
    /// `μ×μ(W₂) > 0`
    CaseII,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomPartition {
    /// Atom ids grouped into classes of `ξ ∼ γ ⇔ f_{ξ−γ}` has rational coefficients.
    pub classes: Vec<Vec<u64>>,
    pub phases: BTreeMap<u64, String>,
    pub w2_mass: f64,
    pub case: AtomCase,
}

/// Partitions atoms `(id, mass, ξ)` by the relation `ξ ∼ γ`.
pub fn classify_atoms(atoms: &[(u64, f64, Vec<PhaseScalar>)], exponents: &[IntegralPolynomial]) -> Result<AtomPartition> {
    let f = |xi: &[PhaseScalar]| -> Result<PhasePolynomial> {
        if xi.len() != exponents.len() {
            return Err(Error::ArityMismatch {
                expected: exponents.len(),
                got: xi.len(),
            });
        }
        Ok(exponents
            .iter()
            .zip(xi)
            .fold(PhasePolynomial::zero(), |acc, (p, x)| acc.add(&PhasePolynomial::from_integral(p, x))))
    };
    let polys = atoms.iter().map(|(_, _, xi)| f(xi)).collect::<Result<Vec<_>>>()?;
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, p) in polys.iter().enumerate() {
        match classes.iter_mut().find(|c| polys[c[0]].sub(p).is_rational()) {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    let w2_mass = classes
        .iter()
        .map(|c| c.iter().map(|&i| atoms[i].1).sum::<f64>().powi(2))
        .sum::<f64>();
    Ok(AtomPartition {
        classes: classes.iter().map(|c| c.iter().map(|&i| atoms[i].0).collect()).collect(),
        phases: atoms.iter().zip(&polys).map(|(a, p)| (a.0, p.to_string())).collect(),
        w2_mass,
        case: if w2_mass > 0.0 { AtomCase::CaseII } else { AtomCase::CaseI },
    })
}

/// Atom of the spectral measure: weight `u_k v̄_k` at eigenphase tuple `ξ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BochnerAtom {
    pub site: Option<Site>,
    pub atom: Option<u64>,
    pub weight: [f64; 2],
    pub xi: Vec<PhaseScalar>,
}

/// Spectral data of commuting diagonal operators: `⟨U^{n} u, v⟩ =
/// Σ_j c_j e(⟨ξ_j, n⟩)`.
pub fn bochner_data(ops: &[ShiftPhaseOperator], u: &SparseVector, v: &SparseVector) -> Result<Vec<BochnerAtom>> {
    if let Some(index) = ops.iter().position(|o| !o.is_diagonal()) {
        return Err(Error::NotDiagonal { index });
    }
    let mut out = Vec::new();
    for (k, c) in &u.sites {
        if let Some(d) = v.sites.get(k) {
            let w = c * d.conj();
            out.push(BochnerAtom {
                site: Some(k.clone()),
                atom: None,
                weight: [w.re, w.im],
                xi: ops.iter().map(|o| o.phase.add(&o.form_at(k)).reduce_mod_1()).collect(),
            });
        }
    }
    for (id, a) in &u.atoms {
        if let Some(b) = v.atoms.get(id) {
            if a.eigenphases.len() != ops.len() {
                return Err(Error::InconsistentAtom { id: *id });
            }
            let w = a.coeff() * b.coeff().conj();
            out.push(BochnerAtom {
                site: None,
                atom: Some(*id),
                weight: [w.re, w.im],
                xi: a.eigenphases.clone(),
            });
        }
    }
    Ok(out)
}

/// Shorthand for `PhasePolynomial` in the monomial basis.
pub fn phase_poly(coeffs: Vec<PhaseScalar>) -> PhasePolynomial {
    PhasePolynomial::new(coeffs, Basis::Monomial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::GeneratorSet;
    use crate::nilseq::poly_exp;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gs() -> GeneratorSet {
        let mut gs = GeneratorSet::new();
        gs.declare("g1 = sqrt2 : 1.41421356237309504880").unwrap();
        gs.declare("g2 = sqrt3 : 1.73205080756887729352").unwrap();
        gs
    }

    fn heisenberg_pair(g: &GeneratorSet) -> (ShiftPhaseOperator, ShiftPhaseOperator) {
        let shift = ShiftPhaseOperator::new(vec![1, 0], g.parse("1/5").unwrap(), vec![PhaseScalar::zero(), PhaseScalar::zero()]).unwrap();
        let modulation = ShiftPhaseOperator::modulation(PhaseScalar::zero(), vec![g.parse("g1").unwrap(), g.parse("1/3").unwrap()]);
        (shift, modulation)
    }

    #[test]
    fn op_pow_examples() {
        let g = gs();
        let (s, m) = heisenberg_pair(&g);
        let w = m.compose(&s).unwrap();
        assert_eq!(w.pow(0).unwrap(), ShiftPhaseOperator::identity(2));
        assert_eq!(w.pow(2).unwrap(), w.compose(&w).unwrap());
        assert_eq!(w.pow(-1).unwrap(), w.inverse());
        assert_eq!(w.compose(&w.inverse()).unwrap(), ShiftPhaseOperator::identity(2));
        let mut acc = ShiftPhaseOperator::identity(2);
        for n in 1..=64 {
            acc = acc.compose(&w).unwrap();
            assert_eq!(w.pow(n).unwrap(), acc);
        }
    }

    #[test]
    fn commutator_is_scalar() {
        let g = gs();
        let (s, m) = heisenberg_pair(&g);
        let sm = s.compose(&m).unwrap();
        let ms = m.compose(&s).unwrap();
        assert_eq!(sm.shift(), ms.shift());
        assert_eq!(sm.form(), ms.form());
        // e(L_m(r_s) − L_s(r_m)) = e(g1)
        assert!(ms.phase().sub(sm.phase()).eq_mod_1(&g.parse("g1").unwrap()));
    }

    #[test]
    fn g_eval_examples() {
        let g = gs();
        let (s, m) = heisenberg_pair(&g);
        let zero = GPolynomial::new(2, vec![s.clone()], vec![IntegralPolynomial::zero()]).unwrap();
        assert_eq!(zero.eval(7).unwrap(), ShiftPhaseOperator::identity(2));
        let lin = GPolynomial::new(2, vec![s.clone()], vec![IntegralPolynomial::identity()]).unwrap();
        assert_eq!(lin.eval(-5).unwrap(), s.pow(-5).unwrap());
        let m2 = ShiftPhaseOperator::modulation(g.parse("1/7").unwrap(), vec![g.parse("g2").unwrap(), PhaseScalar::zero()]);
        let two = GPolynomial::new(2, vec![m.clone(), m2.clone()], vec![IntegralPolynomial::from_i64(&[0, 1]), IntegralPolynomial::from_i64(&[0, 0, 1])]).unwrap();
        let at = two.eval(5).unwrap();
        assert!(at.is_diagonal());
        let expect: Vec<PhaseScalar> = m
            .form()
            .iter()
            .zip(m2.form())
            .map(|(a, b)| a.scale_int(&BigInt::from(5)).add(&b.scale_int(&BigInt::from(10))).reduce_mod_1())
            .collect();
        assert_eq!(at.form(), expect.as_slice());
    }

    #[test]
    fn symbolic_family_matches_eval() {
        let g = gs();
        let (s, m) = heisenberg_pair(&g);
        let gp = GPolynomial::new(
            2,
            vec![s, m],
            vec![IntegralPolynomial::from_i64(&[1, 2, 1]), IntegralPolynomial::from_i64(&[-1, 0, 3])],
        )
        .unwrap();
        let fam = gp.symbolic();
        for n in -30..=30 {
            assert_eq!(fam.eval(n).unwrap(), gp.eval(n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn compact_subspace_examples() {
        let g = gs();
        let (s, m) = heisenberg_pair(&g);
        assert!(compact_subspace(&[m.clone()]).sparse_compact);
        assert!(!compact_subspace(&[m, s]).sparse_compact);
        assert!(compact_subspace(&[]).sparse_compact);
    }

    #[test]
    fn pure_shift_decomposition() {
        let s = ShiftPhaseOperator::translation(vec![1]);
        let gp = GPolynomial::new(1, vec![s], vec![IntegralPolynomial::identity()]).unwrap();
        let d0 = SparseVector::basis(vec![0]);
        let d = decompose(&gp, &d0, &d0).unwrap();
        assert!(d.nil_terms().is_empty());
        assert_eq!(d.certificate, Certificate::HitSet { hits: vec![0], bound: 1.0 });
        for n in -20..=20 {
            assert_eq!(d.c(n), if n == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
            assert_eq!(d.b(n), c(0.0, 0.0));
        }
    }

    #[test]
    fn pure_modulation_decomposition() {
        let g = gs();
        let alpha = g.parse("g1").unwrap();
        let m = ShiftPhaseOperator::modulation(alpha.clone(), vec![PhaseScalar::zero()]);
        let gp = GPolynomial::new(1, vec![m], vec![IntegralPolynomial::from_i64(&[0, 1, 2])]).unwrap();
        let d0 = SparseVector::basis(vec![0]);
        let d = decompose(&gp, &d0, &d0).unwrap();
        assert_eq!(d.certificate, Certificate::Vanishing);
        let reference = poly_exp(&phase_poly(vec![PhaseScalar::zero(), PhaseScalar::zero(), alpha]));
        for n in -50..=50 {
            assert!((d.b(n) - reference.at(n)).norm() < 1e-14);
            assert_eq!(d.c(n), c(0.0, 0.0));
        }
    }

    #[test]
    fn heisenberg_decomposition_hits() {
        let g = gs();
        let (s, m) = heisenberg_pair(&g);
        let gp = GPolynomial::new(2, vec![s, m], vec![IntegralPolynomial::identity(), IntegralPolynomial::identity()]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = SparseVector::from_sites([(vec![0, 0], c(h, 0.0)), (vec![1, 0], c(h, 0.0))]);
        let d = decompose(&gp, &u, &u).unwrap();
        // total shift n·e₁ lands in {0, ±e₁} for n ∈ {−1, 0, 1}
        assert_eq!(d.certificate, Certificate::HitSet { hits: vec![-1, 0, 1], bound: 1.0 });
        for n in -40..=40 {
            let direct = gp.matrix_element(n, &u, &u).unwrap();
            assert!((d.a(n) - direct).norm() < 1e-12, "n={n}");
            assert_eq!(d.is_hit(n), n.abs() <= 1);
        }
    }

    #[test]
    fn normalization_absorbs_g0() {
        let g = gs();
        let (s, m) = heisenberg_pair(&g);
        // p(n) = n + 1 makes g(0) a nontrivial shift
        let gp = GPolynomial::new(2, vec![s, m], vec![IntegralPolynomial::from_i64(&[1, 1]), IntegralPolynomial::from_i64(&[2, 0, 1])]).unwrap();
        let u = SparseVector::from_sites([(vec![0, 0], c(0.6, 0.0)), (vec![2, 1], c(0.0, 0.8))]);
        let v = SparseVector::from_sites([(vec![1, 0], c(0.8, 0.0)), (vec![3, 1], c(0.6, 0.0))]);
        let d = decompose(&gp, &u, &v).unwrap();
        assert!(d.normalized);
        for n in -30..=30 {
            assert!((d.a(n) - gp.matrix_element(n, &u, &v).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn atomic_sector_terms() {
        let g = gs();
        let m = ShiftPhaseOperator::modulation(PhaseScalar::zero(), vec![PhaseScalar::zero()]);
        let gp = GPolynomial::new(1, vec![m], vec![IntegralPolynomial::from_i64(&[0, 0, 1])]).unwrap();
        let mut u = SparseVector::new();
        u.add_atom(7, c(0.6, 0.0), vec![g.parse("g2").unwrap()]).unwrap();
        u.add_atom(9, c(0.0, 0.8), vec![g.parse("1/4").unwrap()]).unwrap();
        let d = decompose(&gp, &u, &u).unwrap();
        assert_eq!(d.nil_terms().len(), 2);
        for n in -20..=20 {
            assert!((d.a(n) - gp.matrix_element(n, &u, &u).unwrap()).norm() < 1e-13);
        }
        assert!(u.add_atom(7, c(1.0, 0.0), vec![PhaseScalar::zero()]).is_err());
    }

    #[test]
    fn polarization_identity() {
        let g = gs();
        let (s, m) = heisenberg_pair(&g);
        let gp = GPolynomial::new(2, vec![m.clone(), s], vec![IntegralPolynomial::from_i64(&[0, 0, 1]), IntegralPolynomial::from_i64(&[0, 1])]).unwrap();
        let u = SparseVector::from_sites([(vec![0, 0], c(0.6, 0.0)), (vec![1, 0], c(0.0, 0.8))]);
        let v = SparseVector::from_sites([(vec![0, 0], c(0.0, 1.0))]);
        let direct = decompose(&gp, &u, &v).unwrap();
        let polar = polarize(&gp, &u, &v).unwrap();
        for n in -25..=25 {
            assert!((direct.c(n) - polar.c(n)).norm() < 1e-12);
            assert!((direct.b(n) - polar.b(n)).norm() < 1e-12);
        }
        let gd = GPolynomial::new(2, vec![m], vec![IntegralPolynomial::from_i64(&[0, 1, 1])]).unwrap();
        let dd = decompose(&gd, &u, &v).unwrap();
        let pd = polarize(&gd, &u, &v).unwrap();
        for t in dd.nil_terms() {
            let total: Complex64 = pd.nil_terms().iter().filter(|s| s.phase == t.phase).map(|s| s.coeff).sum();
            assert!((total - t.coeff).norm() < 1e-15);
        }
    }

    #[test]
    fn atom_classes() {
        let g = gs();
        let p = vec![IntegralPolynomial::identity(), IntegralPolynomial::from_i64(&[0, 0, 1])];
        let single = classify_atoms(&[(1, 0.5, vec![PhaseScalar::zero(), PhaseScalar::zero()])], &p).unwrap();
        assert_eq!(single.classes.len(), 1);
        assert_eq!(single.w2_mass, 0.25);
        assert_eq!(single.case, AtomCase::CaseII);
        let xi = vec![g.parse("g1").unwrap(), g.parse("1/3").unwrap()];
        let xi2 = vec![g.parse("g1 + 1/2").unwrap(), g.parse("1/3").unwrap()];
        let same = classify_atoms(&[(1, 0.5, xi.clone()), (2, 0.5, xi2)], &p).unwrap();
        assert_eq!(same.classes, vec![vec![1, 2]]);
        let lin = vec![IntegralPolynomial::identity()];
        let split = classify_atoms(&[(1, 0.5, vec![PhaseScalar::zero()]), (2, 0.5, vec![g.parse("g1").unwrap()])], &lin).unwrap();
        assert_eq!(split.classes.len(), 2);
        assert_eq!(split.w2_mass, 0.5);
    }

    #[test]
    fn bochner_examples() {
        let g = gs();
        let m = ShiftPhaseOperator::modulation(g.parse("1/3").unwrap(), vec![g.parse("g1").unwrap()]);
        let d0 = SparseVector::basis(vec![0]);
        let one = bochner_data(&[m.clone()], &d0, &d0).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].weight, [1.0, 0.0]);
        assert_eq!(one[0].xi, vec![PhaseScalar::ratio(1, 3)]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = SparseVector::from_sites([(vec![0], c(h, 0.0)), (vec![4], c(h, 0.0))]);
        let two = bochner_data(&[m.clone()], &u, &u).unwrap();
        assert!(two.iter().all(|a| (a.weight[0] - 0.5).abs() < 1e-15));
        let s = ShiftPhaseOperator::translation(vec![1]);
        assert_eq!(bochner_data(&[m, s], &u, &u).unwrap_err(), Error::NotDiagonal { index: 1 });
    }

    #[test]
    fn integer_root_search() {
        // (t − 3)(t + 5) in the binomial basis via values
        let vals: Vec<BigInt> = (0..3).map(|t: i64| BigInt::from((t - 3) * (t + 5))).collect();
        let p = IntegralPolynomial::from_values(&vals);
        assert_eq!(integer_roots(&p, 1000).unwrap(), vec![-5, 3]);
        let big = IntegralPolynomial::from_i64(&[1_000_000_000, 1]);
        assert!(integer_roots(&big, 1000).is_none());
    }
}
