use num_bigint::BigInt;
use num_integer::Integer;

use super::matrix::IntMatrix;
use super::poly::{IntegralPolynomial, PolyMatrix};
use crate::error::{Error, Result};

/// `P_r(t) = S^{tm+r}` for `r = 0..m`, each an integral polynomial matrix.
///
/// With `D = S^m − I` nilpotent, `S^{tm} = Σ_{j<d} C(t,j) D^j` for every
/// integer `t`, negative ones included.
pub fn unipotent_power_polys(s: &IntMatrix, m: u64) -> Result<Vec<PolyMatrix>> {
    if m == 0 {
        return Err(Error::Invalid("unipotence order must be positive".into()));
    }
    let d = s.dim();
    let dm = s.pow(m).sub(&IntMatrix::identity(d));
    if !dm.pow(d as u64).is_zero() {
        return Err(Error::NotUnipotent { m });
    }
    let mut dpows = vec![IntMatrix::identity(d)];
    while dpows.len() < d {
        let next = dpows.last().unwrap().mul(&dm);
        if next.is_zero() {
            break;
        }
        dpows.push(next);
    }
    let mut sr = IntMatrix::identity(d);
    let mut out = Vec::with_capacity(m as usize);
    for _ in 0..m {
        let terms: Vec<IntMatrix> = dpows.iter().map(|dj| dj.mul(&sr)).collect();
        let entries = (0..d * d)
            .map(|idx| {
                let (i, j) = (idx / d, idx % d);
                IntegralPolynomial::new(terms.iter().map(|t| t.get(i, j).clone()).collect())
            })
            .collect();
        out.push(PolyMatrix::new(d, entries));
        sr = sr.mul(s);
    }
    Ok(out)
}

/// `S^n` for all integers `n` through the residue-class polynomials.
#[derive(Clone, Debug)]
pub struct UnipotentExpansion {
    m: u64,
    polys: Vec<PolyMatrix>,
}

impl UnipotentExpansion {
    pub fn new(s: &IntMatrix, m: u64) -> Result<Self> {
        Ok(UnipotentExpansion {
            m,
            polys: unipotent_power_polys(s, m)?,
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn residue(&self, r: u64) -> &PolyMatrix {
        &self.polys[r as usize]
    }

    pub fn residues(&self) -> &[PolyMatrix] {
        &self.polys
    }

    /// Splits `n = tm + r` with `0 ≤ r < m`.
    pub fn split(&self, n: i64) -> (i64, u64) {
        let (t, r) = n.div_mod_floor(&(self.m as i64));
        (t, r as u64)
    }

    pub fn power(&self, n: i64) -> IntMatrix {
        let (t, r) = self.split(n);
        self.polys[r as usize].eval(&BigInt::from(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shear_polynomials() {
        let s = IntMatrix::from_i64(&[&[1, 1], &[0, 1]]);
        let p = unipotent_power_polys(&s, 1).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].get(0, 1), &IntegralPolynomial::identity());
        assert_eq!(p[0].get(0, 0), &IntegralPolynomial::from_i64(&[1]));
        assert_eq!(p[0].get(1, 0), &IntegralPolynomial::zero());
        for t in -20..=20 {
            assert_eq!(p[0].eval(&BigInt::from(t)), s.pow_signed(t).unwrap());
        }
    }

    #[test]
    fn identity_is_constant() {
        let p = unipotent_power_polys(&IntMatrix::identity(3), 1).unwrap();
        assert!(p[0].is_constant());
        assert!(p[0].eval(&BigInt::from(-7)).is_identity());
    }

    #[test]
    fn rotation_residues() {
        let s = IntMatrix::from_i64(&[&[0, -1], &[1, 0]]);
        let p = unipotent_power_polys(&s, 4).unwrap();
        assert!(p[1].is_constant());
        assert_eq!(p[1].eval(&BigInt::from(5)), s);
        let e = UnipotentExpansion::new(&s, 4).unwrap();
        for n in -12..=12 {
            assert_eq!(e.power(n), s.pow_signed(n).unwrap());
        }
    }

    #[test]
    fn wrong_order_is_rejected() {
        let s = IntMatrix::from_i64(&[&[0, -1], &[1, 0]]);
        assert_eq!(unipotent_power_polys(&s, 2).unwrap_err(), Error::NotUnipotent { m: 2 });
    }
}
