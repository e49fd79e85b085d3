//! Sequences from zero-entropy toral and noncommutative toral automorphisms,
//! their nilsequence-plus-zero-density decompositions, and Möbius
//! correlation statistics.

pub mod dd;
pub mod error;
pub mod exactnum;
pub mod mobius;
pub mod nctorus;
pub mod nilseq;
pub mod spectral;
pub mod sum;
pub mod torus;

pub use error::{Error, Result};
