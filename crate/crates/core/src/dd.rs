//! Double-double arithmetic for mod-1 phase accumulation.
//!
//! A value is `hi + lo` with `|lo| ≤ ulp(hi)/2`; additions are error-free
//! (TwoSum) and products use fused multiply-add (TwoProd), so a phase kept
//! in `[0, 1)` loses roughly 2⁻¹⁰⁵ per operation instead of 2⁻⁵³.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };

    pub fn new(x: f64) -> DD {
        DD { hi: x, lo: 0.0 }
    }

    /// `fixed / 2^bits` for `0 ≤ fixed < 2^bits`, `bits ≥ 106`.
    pub fn from_fixed(fixed: &BigInt, bits: u32) -> DD {
        let h = fixed >> (bits - 53);
        let rest = fixed - (&h << (bits - 53));
        let l = rest >> (bits - 106);
        let hi = h.to_f64().unwrap_or(0.0) * 2f64.powi(-53);
        let lo = l.to_f64().unwrap_or(0.0) * 2f64.powi(-106);
        let (hi, lo) = quick_two_sum(hi, lo);
        DD { hi, lo }
    }

    /// Exact product of two doubles.
    pub fn prod(a: f64, b: f64) -> DD {
        let (hi, lo) = two_prod(a, b);
        DD { hi, lo }
    }

    pub fn add(self, o: DD) -> DD {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = quick_two_sum(s, e);
        DD { hi, lo }
    }

    pub fn neg(self) -> DD {
        DD { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, o: DD) -> DD {
        self.add(o.neg())
    }

    pub fn mul_f64(self, b: f64) -> DD {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }

    pub fn mul(self, o: DD) -> DD {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }

    /// Representative in `[0, 1)`.
    pub fn frac(self) -> DD {
        let f = self.hi.floor();
        let mut r = DD { hi: self.hi - f, lo: self.lo };
        let (hi, lo) = quick_two_sum(r.hi, r.lo);
        r = DD { hi, lo };
        if r.hi < 0.0 || (r.hi == 0.0 && r.lo < 0.0) {
            r = r.add(DD::new(1.0));
        } else if r.hi >= 1.0 {
            r = r.sub(DD::new(1.0));
        }
        if r.hi >= 1.0 {
            DD::ZERO
        } else {
            r
        }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Circular distance between two phases in `[0, 1)`.
pub fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frac_of_large_product() {
        // 10^8 · 0.1 in double-double keeps the representation error of 0.1
        let x = DD::prod(1e8, 0.1).frac();
        assert!(x.to_f64() < 1e-8 || x.to_f64() > 1.0 - 1e-8);
    }

    #[test]
    fn accumulation_stays_accurate() {
        let step = DD::new(std::f64::consts::SQRT_2 - 1.0);
        let mut acc = DD::ZERO;
        for _ in 0..1_000_000 {
            acc = acc.add(step).frac();
        }
        let direct = DD::prod(1e6, std::f64::consts::SQRT_2 - 1.0).frac();
        let diff = acc.sub(direct).frac().to_f64();
        assert!(circ_dist(diff, 0.0) < 1e-20);
    }

    #[test]
    fn negative_values_wrap() {
        let x = DD { hi: -0.25, lo: 0.0 }.frac();
        assert_eq!(x.to_f64(), 0.75);
        assert_eq!(DD::new(3.0).frac(), DD::ZERO);
    }
}
