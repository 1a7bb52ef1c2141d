//! Double-double arithmetic.
//!
//! A [`Dd`] holds an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`,
//! giving roughly 106 bits of significand. It exists for one job: computing
//! phases `x * p^c` to well below one unit in the last place of the
//! fractional part when the integer part is as large as `2^50`.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1

const LN2: Dd = Dd {
    hi: 6.931_471_805_599_453e-1,
    lo: 2.319_046_813_846_299_6e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

/// Exact product `a * b = p + e` (Dekker). Avoids `mul_add`, which is a
/// software routine on targets without hardware FMA.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub const fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact product of two doubles.
    #[inline]
    pub fn from_prod(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Dd {
        let (s, e) = two_sum(self.hi, b);
        let e = e + self.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let r = self - Dd::from_prod(q1, b);
        let q2 = r.hi / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

    /// Scale by an exact power of two.
    #[inline]
    fn ldexp(self, k: i32) -> Dd {
        let f = 2f64.powi(k);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    /// Fractional part reduced to `[-1/2, 1/2]`, returned as a double.
    ///
    /// `e(x)` only depends on this value, so it is the last step before
    /// any trigonometric evaluation.
    #[inline]
    pub fn frac_centered(self) -> f64 {
        let n = self.hi.round();
        let r = self.add_f64(-n);
        let v = r.hi + r.lo;
        // `hi` near a half-integer can leave |v| slightly above 1/2.
        v - v.round()
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = self - LN2.mul_f64(k);
        // Shrink the argument so the Taylor tail drops below 2^-106.
        const SQUARINGS: i32 = 10;
        let r = r.ldexp(-SQUARINGS);
        // s = e^r - 1, kept in "minus one" form so squaring does not cancel.
        let mut term = r;
        let mut s = r;
        for n in 2..=11 {
            term = (term * r).div_f64(n as f64);
            s = s + term;
        }
        for _ in 0..SQUARINGS {
            s = s.mul_f64(2.0) + s * s;
        }
        (s + Dd::ONE).ldexp(k as i32)
    }

    pub fn ln(self) -> Dd {
        assert!(self.hi > 0.0, "logarithm of a non-positive value");
        // Two Newton steps on exp(y) = a from a double-precision seed.
        let mut y = Dd::from_f64(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - Dd::ONE;
        }
        y
    }

    /// `base^c` for a positive double base.
    pub fn powf(base: f64, c: f64) -> Dd {
        Dd::from_f64(base).ln().mul_f64(c).exp()
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_prod_is_exact() {
        let (p, e) = two_prod(0.1, 3.0);
        // 0.1 * 3 in binary is not 0.30000000000000004 exactly; the error term recovers it.
        assert_eq!(p, 0.30000000000000004);
        assert!(e != 0.0 && e.abs() < 1e-16);
    }

    #[test]
    fn exp_ln_round_trip() {
        for &v in &[0.5, 1.0, 2.0, 97.0, 1e6, 3.3e12] {
            let d = Dd::from_f64(v);
            let back = d.ln().exp();
            let rel = ((back - d).to_f64() / v).abs();
            assert!(rel < 1e-30, "v={v} rel={rel:e}");
        }
    }

    #[test]
    fn exp_of_ln2_multiple_is_power_of_two() {
        let e = LN2.mul_f64(20.0).exp();
        assert!((e.hi - 1_048_576.0).abs() < 1e-9);
        assert!((e - Dd::from_f64(1_048_576.0)).to_f64().abs() < 1e-24);
    }

    #[test]
    fn integer_powers_are_exact() {
        // 7^3 = 343 and 1000^2 = 10^6 are exact, so the dd pow must land on them.
        let v = Dd::powf(7.0, 3.0);
        assert!((v - Dd::from_f64(343.0)).to_f64().abs() < 1e-26);
        let v = Dd::powf(1000.0, 2.0);
        assert!((v - Dd::from_f64(1e6)).to_f64().abs() < 1e-20);
    }

    #[test]
    fn frac_centered_range() {
        let d = Dd::from_f64(12345.75);
        assert_eq!(d.frac_centered(), -0.25);
        let d = Dd::from_f64(2.0).add_f64(1e-20);
        assert!((d.frac_centered() - 1e-20).abs() < 1e-35);
    }
}
