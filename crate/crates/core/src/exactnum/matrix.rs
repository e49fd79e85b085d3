use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Square matrix of arbitrary-precision integers, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(dim: usize, entries: Vec<BigInt>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::NotSquare);
        }
        Ok(IntMatrix { dim, entries })
    }

    pub fn from_rows<T: Clone + Into<BigInt>>(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::NotSquare);
        }
        let entries = rows.iter().flat_map(|r| r.iter().cloned().map(Into::into)).collect();
        Ok(IntMatrix { dim, entries })
    }

    /// Panics if `rows` is not square; meant for literals in tests and examples.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let rows: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
        IntMatrix::from_rows(&rows).expect("square matrix literal")
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = IntMatrix::zero(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = BigInt::one();
        }
        m
    }

    pub fn zero(dim: usize) -> Self {
        IntMatrix {
            dim,
            entries: vec![BigInt::zero(); dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.dim).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let d = self.dim;
        let mut out = IntMatrix::zero(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * d + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        IntMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        IntMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> IntMatrix {
        IntMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    pub fn transpose(&self) -> IntMatrix {
        let d = self.dim;
        let mut out = IntMatrix::zero(d);
        for i in 0..d {
            for j in 0..d {
                out.entries[j * d + i] = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        *self == IntMatrix::identity(self.dim)
    }

    /// Non-negative power by repeated squaring.
    pub fn pow(&self, mut e: u64) -> IntMatrix {
        let mut base = self.clone();
        let mut acc = IntMatrix::identity(self.dim);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `S^n` for any integer `n`; negative powers need `|det| = 1`.
    pub fn pow_signed(&self, n: i64) -> Result<IntMatrix> {
        if n >= 0 {
            Ok(self.pow(n as u64))
        } else {
            Ok(self.inverse_unimodular()?.pow(n.unsigned_abs()))
        }
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.get(i, j) * &v[j])
                    .fold(BigInt::zero(), |a, b| a + b)
            })
            .collect()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        let d = self.dim;
        let mut a = self.rows();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..d {
            if a[k][k].is_zero() {
                let Some(p) = (k + 1..d).find(|&i| !a[i][k].is_zero()) else {
                    return BigInt::zero();
                };
                a.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..d {
                for j in k + 1..d {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[d - 1][d - 1]
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs().is_one()
    }

    /// Errors with [`Error::NotInGL`] unless `|det| = 1`.
    pub fn require_gl(&self) -> Result<()> {
        let det = self.det();
        if det.abs().is_one() {
            Ok(())
        } else {
            Err(Error::NotInGL {
                det: det.to_string(),
            })
        }
    }

    /// Exact inverse of a matrix in GL(d,Z).
    pub fn inverse_unimodular(&self) -> Result<IntMatrix> {
        self.require_gl()?;
        let d = self.dim;
        let mut a: Vec<Vec<BigRational>> = (0..d)
            .map(|i| {
                let mut row: Vec<BigRational> = (0..d)
                    .map(|j| BigRational::from_integer(self.get(i, j).clone()))
                    .collect();
                row.extend((0..d).map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                }));
                row
            })
            .collect();
        for col in 0..d {
            let p = (col..d).find(|&i| !a[i][col].is_zero()).expect("nonsingular");
            a.swap(col, p);
            let pivot = a[col][col].clone();
            for v in a[col].iter_mut() {
                *v /= &pivot;
            }
            for i in 0..d {
                if i != col && !a[i][col].is_zero() {
                    let f = a[i][col].clone();
                    let pivot_row = a[col].clone();
                    for (v, p) in a[i].iter_mut().zip(&pivot_row) {
                        *v -= &f * p;
                    }
                }
            }
        }
        let mut out = IntMatrix::zero(d);
        for i in 0..d {
            for j in 0..d {
                let v = &a[i][d + j];
                debug_assert!(v.is_integer());
                out.entries[i * d + j] = v.to_integer();
            }
        }
        Ok(out)
    }

    pub fn block_diag(blocks: &[IntMatrix]) -> IntMatrix {
        let d: usize = blocks.iter().map(|b| b.dim).sum();
        let mut out = IntMatrix::zero(d);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.dim {
                for j in 0..b.dim {
                    out.entries[(off + i) * d + off + j] = b.get(i, j).clone();
                }
            }
            off += b.dim;
        }
        out
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .chunks(self.dim)
            .map(|r| r.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
            .collect()
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.entries.iter().map(|v| v.abs()).max().unwrap_or_default()
    }

    /// Order of a finite-order matrix up to `limit`, by direct multiplication.
    pub fn finite_order(&self, limit: u64) -> Option<u64> {
        let mut p = self.clone();
        for k in 1..=limit {
            if p.is_identity() {
                return Some(k);
            }
            p = p.mul(self);
        }
        None
    }

    /// gcd of all entries (0 for the zero matrix).
    pub fn content(&self) -> BigInt {
        self.entries.iter().fold(BigInt::zero(), |g, v| g.gcd(v))
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.entries.chunks(self.dim).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}
