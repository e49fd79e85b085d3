//! Characteristic polynomials, cyclotomic factorization and the entropy
//! verdict for automorphisms of `T^d`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::matrix::IntMatrix;
use super::poly::{qpoly, ZPoly};
use crate::error::{Error, Result};

/// `det(xI − S)`, monic of degree `d`, by Faddeev–LeVerrier.
///
/// Every division in the recursion is exact over the integers.
pub fn char_poly(s: &IntMatrix) -> ZPoly {
    let d = s.dim();
    let mut coeffs = vec![BigInt::zero(); d + 1];
    coeffs[d] = BigInt::one();
    let mut m = IntMatrix::zero(d);
    for k in 1..=d {
        // M_k = S M_{k-1} + c_{d-k+1} I
        let mut next = s.mul(&m);
        for i in 0..d {
            let v = next.get(i, i) + &coeffs[d - k + 1];
            next.set(i, i, v);
        }
        m = next;
        let am = s.mul(&m);
        let trace: BigInt = (0..d).map(|i| am.get(i, i).clone()).sum();
        coeffs[d - k] = -trace / BigInt::from(k);
    }
    ZPoly::new(coeffs)
}

/// Euler's totient.
pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// The cyclotomic polynomial `Φ_k`.
pub fn cyclotomic(k: u64) -> ZPoly {
    assert!(k >= 1);
    let mut p = ZPoly::x_pow_minus_one(k as usize);
    for j in 1..k {
        if k % j == 0 {
            p = p.div_exact_monic(&cyclotomic(j)).expect("Φ_j divides x^k - 1");
        }
    }
    p
}

/// All `k` with `φ(k) ≤ d`, ascending. `φ(k) ≥ sqrt(k/2)` bounds the search.
pub fn cyclotomic_candidates(d: usize) -> Vec<u64> {
    let d = d as u64;
    (1..=2 * d * d + 2).filter(|&k| euler_phi(k) <= d).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    ZeroEntropy,
    PositiveEntropy,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyReport {
    pub verdict: Verdict,
    pub char_poly: ZPoly,
    /// Minimal `m` with `S^m` unipotent (zero entropy only).
    pub m: Option<u64>,
    /// Orders `k` of the cyclotomic factors `Φ_k`, with multiplicity.
    pub cyclotomic_factors: Vec<u64>,
    /// `Σ ln⁺|λ_j|` (positive entropy only).
    pub h: Option<f64>,
    /// A posteriori bound on `|h − h_computed|` from validated root disks.
    pub h_error: Option<f64>,
    /// Lower bound `h / 2` for the noncommutative automorphism.
    pub nc_lower_bound: f64,
}

/// Exact zero/positive entropy verdict.
///
/// Zero entropy iff the characteristic polynomial factors into cyclotomic
/// polynomials; the unipotence of `S^m` is then checked directly.
pub fn classify_entropy(s: &IntMatrix) -> Result<EntropyReport> {
    s.require_gl()?;
    let d = s.dim();
    let cp = char_poly(s);
    let mut rest = cp.clone();
    let mut orders = Vec::new();
    for k in cyclotomic_candidates(d) {
        let phi = cyclotomic(k);
        while let Some(q) = rest.div_exact_monic(&phi) {
            orders.push(k);
            rest = q;
        }
    }
    if rest.is_one() {
        let m = orders.iter().fold(1u64, |acc, &k| acc.lcm(&k));
        let dm = s.pow(m).sub(&IntMatrix::identity(d));
        if !dm.pow(d as u64).is_zero() {
            return Err(Error::NotUnipotent { m });
        }
        return Ok(EntropyReport {
            verdict: Verdict::ZeroEntropy,
            char_poly: cp,
            m: Some(m),
            cyclotomic_factors: orders,
            h: None,
            h_error: None,
            nc_lower_bound: 0.0,
        });
    }
    let (h, err) = log_mahler_measure(&rest);
    Ok(EntropyReport {
        verdict: Verdict::PositiveEntropy,
        char_poly: cp,
        m: None,
        cyclotomic_factors: orders,
        h: Some(h),
        h_error: Some(err),
        nc_lower_bound: h / 2.0,
    })
}

/// `Σ ln⁺|λ|` over the roots of `p` with multiplicity, and an error bound
/// (`∞` if the root disks could not be validated).
pub fn log_mahler_measure(p: &ZPoly) -> (f64, f64) {
    let mut h = 0.0;
    let mut err = 0.0;
    for (factor, mult) in qpoly::squarefree(&p.to_rational()) {
        let coeffs: Vec<f64> = factor.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
        let roots = polish(&coeffs, aberth(&coeffs));
        let radii = inclusion_radii(&factor, &coeffs, &roots);
        let disjoint = radii.iter().all(|r| r.is_finite())
            && (0..roots.len()).all(|i| {
                (i + 1..roots.len()).all(|j| (roots[i] - roots[j]).norm() > radii[i] + radii[j])
            });
        for (z, r) in roots.iter().zip(&radii) {
            let a = z.norm();
            if a > 1.0 {
                h += mult as f64 * a.ln();
            }
            // ln⁺ is 1-Lipschitz in ln|z|; |ln|z| − ln|w|| ≤ r / (|z| − r)
            let e = if disjoint && a > *r { r / (a - r) } else { f64::INFINITY };
            err += mult as f64 * e;
        }
    }
    (h, err)
}

fn horner_c(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Simultaneous root iteration (Aberth–Ehrlich) for a monic real polynomial.
fn aberth(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    let radius = 1.0 + coeffs[..n].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    for _ in 0..1000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = horner_c(coeffs, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let w = ratio / (Complex64::one() - ratio * repulsion);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / z[i].norm().max(1.0));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

fn polish(coeffs: &[f64], mut roots: Vec<Complex64>) -> Vec<Complex64> {
    for z in roots.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner_c(coeffs, *z);
            let step = p / dp;
            if step.is_finite() {
                *z -= step;
            }
        }
    }
    roots
}

/// Radii `n(|p(z)| + ε)/|p'(z)|` of disks each guaranteed to hold a root,
/// with `ε` bounding the floating evaluation error of `p(z)` and the
/// rounding of the coefficients themselves.
fn inclusion_radii(exact: &[BigRational], coeffs: &[f64], roots: &[Complex64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    let gamma = 4.0 * (n as f64 + 2.0) * f64::EPSILON;
    let coeff_err: Vec<f64> = exact
        .iter()
        .zip(coeffs)
        .map(|(q, &c)| {
            let back = BigRational::from_float(c).unwrap_or_else(BigRational::zero);
            (q - back).abs().to_f64().unwrap_or(f64::INFINITY)
        })
        .collect();
    roots
        .iter()
        .map(|&z| {
            let (p, dp) = horner_c(coeffs, z);
            let a = z.norm();
            let (mut mag, mut cerr, mut pw) = (0.0, 0.0, 1.0);
            for (c, e) in coeffs.iter().zip(&coeff_err) {
                mag += c.abs() * pw;
                cerr += e * pw;
                pw *= a;
            }
            n as f64 * (p.norm() + gamma * mag + cerr) / dp.norm()
        })
        .collect()
}
