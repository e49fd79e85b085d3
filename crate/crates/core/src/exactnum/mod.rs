//! Exact arithmetic: integer matrices, integral polynomials, phase scalars,
//! and the entropy classification of toral automorphisms.

mod entropy;
mod matrix;
mod phase;
mod phasepoly;
mod poly;
mod unipotent;

pub use entropy::{
    char_poly, classify_entropy, cyclotomic, cyclotomic_candidates, euler_phi, log_mahler_measure,
    EntropyReport, Verdict,
};
pub use matrix::IntMatrix;
pub use phase::{
    e_frac, parse_decimal, parse_rational_scalar, Generator, GeneratorSet, PhaseScalar, FRAC_BITS,
};
pub use phasepoly::{Basis, PhaseEvaluator, PhasePolynomial};
pub use poly::{binomial, binomial_to_monomial, forward_differences, IntegralPolynomial, PolyMatrix, ZPoly};
pub use unipotent::{unipotent_power_polys, UnipotentExpansion};
