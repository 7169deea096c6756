//! Double-double arithmetic.
//!
//! An [`ExtendedReal`] is the unevaluated sum `hi + lo` of two binary64
//! values with `|lo| <= ulp(hi)/2`, giving roughly 31 significant decimal
//! digits. All operations are built from the error-free transformations
//! [`two_sum`] and [`two_prod`].

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// `a + b = s + e` exactly, no precondition on the magnitudes.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// `a + b = s + e` exactly, requires `|a| >= |b|` (or `a == 0`).
#[inline]
pub fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[cfg(not(target_feature = "fma"))]
#[inline]
fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

/// `a * b = p + e` exactly (barring overflow/underflow).
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    #[cfg(target_feature = "fma")]
    let e = a.mul_add(b, -p);
    #[cfg(not(target_feature = "fma"))]
    let e = {
        let (ah, al) = split(a);
        let (bh, bl) = split(b);
        ((ah * bh - p) + ah * bl + al * bh) + al * bl
    };
    (p, e)
}

#[derive(Clone, Copy, Default, PartialEq)]
pub struct ExtendedReal {
    pub hi: f64,
    pub lo: f64,
}

impl ExtendedReal {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const PI: Self = Self {
        hi: std::f64::consts::PI,
        lo: 1.2246467991473532e-16,
    };
    pub const LN_2: Self = Self {
        hi: std::f64::consts::LN_2,
        lo: 2.3190468138462996e-17,
    };

    /// Builds a value from an already normalized pair.
    #[inline]
    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    /// Normalizes an arbitrary pair.
    #[inline]
    pub fn new(hi: f64, lo: f64) -> Self {
        let (h, l) = two_sum(hi, lo);
        Self { hi: h, lo: l }
    }

    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline]
    pub fn signum(self) -> f64 {
        if self.hi > 0.0 {
            1.0
        } else if self.hi < 0.0 {
            -1.0
        } else {
            self.lo.signum() * (self.lo != 0.0) as u8 as f64
        }
    }

    pub fn powi(self, n: i32) -> Self {
        if n < 0 {
            return Self::ONE / self.powi(-n);
        }
        let mut base = self;
        let mut e = n as u32;
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }

    /// Square root by one Newton correction of the binary64 estimate.
    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.is_zero() {
                Self::ZERO
            } else {
                Self::from_f64(f64::NAN)
            };
        }
        let r = self.hi.sqrt();
        let (p, e) = two_prod(r, r);
        let diff = (self - Self::new(p, e)).to_f64();
        Self::new(r, diff / (2.0 * r))
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Self::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        // exp(a) = 2^k * exp(r)^(2^10), r = (a - k ln2) / 2^10
        let k = (self.hi / Self::LN_2.hi).round();
        let r = (self - Self::LN_2 * k) * (1.0 / 1024.0);
        // Taylor series for exp(r) - 1, |r| < 3.4e-4
        let mut term = r;
        let mut sum = r;
        for i in 2..=12 {
            term = term * r / i as f64;
            sum += term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        // (1 + s)^2 - 1 = s * (s + 2) keeps the small part exact
        for _ in 0..10 {
            sum = sum * (sum + 2.0);
        }
        let result = sum + 1.0;
        let scale = 2f64.powi(k as i32);
        Self::from_parts(result.hi * scale, result.lo * scale)
    }

    /// Natural logarithm by one Newton step `y + x e^{-y} - 1`.
    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Self::from_f64(f64::NAN);
        }
        if self == Self::ONE {
            return Self::ZERO;
        }
        let y = Self::from_f64(self.hi.ln());
        y + self * (-y).exp() - 1.0
    }
}

impl fmt::Debug for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExtendedReal({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_f64(), f)
    }
}

impl From<f64> for ExtendedReal {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl Neg for ExtendedReal {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for ExtendedReal {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Self { hi, lo }
    }
}

impl Add<f64> for ExtendedReal {
    type Output = Self;
    #[inline]
    fn add(self, rhs: f64) -> Self {
        let (s1, s2) = two_sum(self.hi, rhs);
        let s2 = s2 + self.lo;
        let (hi, lo) = quick_two_sum(s1, s2);
        Self { hi, lo }
    }
}

impl Sub for ExtendedReal {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Sub<f64> for ExtendedReal {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: f64) -> Self {
        self + (-rhs)
    }
}

impl Mul for ExtendedReal {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Mul<f64> for ExtendedReal {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        let (p, e) = two_prod(self.hi, rhs);
        let e = e + self.lo * rhs;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for ExtendedReal {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        // long division: q1 + q2 + q3
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * q1;
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * q2;
        let q3 = r.hi / rhs.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self { hi: q1, lo: q2 } + q3
    }
}

impl Div<f64> for ExtendedReal {
    type Output = Self;
    #[inline]
    fn div(self, rhs: f64) -> Self {
        let q1 = self.hi / rhs;
        let (p, e) = two_prod(q1, rhs);
        let (s, t) = two_sum(self.hi, -p);
        let t = t - e + self.lo;
        let q2 = (s + t) / rhs;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo }
    }
}

impl AddAssign for ExtendedReal {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for ExtendedReal {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for ExtendedReal {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl Sum for ExtendedReal {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: ExtendedReal, b: ExtendedReal) -> f64 {
        ((a - b).to_f64() / b.to_f64()).abs()
    }

    #[test]
    fn error_free_transformations_are_exact() {
        let (s, e) = two_sum(1.0, 1e-20);
        assert_eq!(s, 1.0);
        assert_eq!(e, 1e-20);
        let a = 1.0 + f64::EPSILON;
        let (p, e) = two_prod(a, a);
        assert_eq!(p, 1.0 + 2.0 * f64::EPSILON);
        assert_eq!(e, f64::EPSILON * f64::EPSILON);
    }

    #[test]
    fn one_third_round_trip() {
        let third = ExtendedReal::ONE / 3.0;
        let back = third * 3.0;
        assert!((back - 1.0).to_f64().abs() < 1e-31);
        let third2 = ExtendedReal::ONE / ExtendedReal::from_f64(3.0);
        assert!((third - third2).to_f64().abs() < 1e-32);
    }

    #[test]
    fn sqrt_two_squared() {
        let r = ExtendedReal::from_f64(2.0).sqrt();
        assert!(((r * r) - 2.0).to_f64().abs() < 1e-31);
        assert_eq!(ExtendedReal::ZERO.sqrt(), ExtendedReal::ZERO);
    }

    #[test]
    fn exp_and_ln_are_inverse() {
        let one = ExtendedReal::ONE.exp();
        // e = 2.718281828459045 + 1.4456468917292502e-16
        let e = ExtendedReal::from_parts(std::f64::consts::E, 1.4456468917292502e-16);
        assert!(rel(one, e) < 1e-30);
        assert!(
            (ExtendedReal::from_f64(2.0).ln() - ExtendedReal::LN_2)
                .to_f64()
                .abs()
                < 1e-31
        );
        for &x in &[1e-20, 0.37, 3.5, 1234.5, 6.02e23] {
            let v = ExtendedReal::from_f64(x);
            // exp amplifies the absolute error of ln by |ln x|
            let tol = 1e-31 * (1.0 + x.ln().abs());
            assert!(rel(v.ln().exp(), v) < tol, "x = {x}");
        }
        assert_eq!(ExtendedReal::ONE.ln(), ExtendedReal::ZERO);
        assert!(ExtendedReal::from_f64(-1.0).ln().hi.is_nan());
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = ExtendedReal::ONE / 7.0;
        let mut p = ExtendedReal::ONE;
        for _ in 0..9 {
            p *= x;
        }
        assert!(rel(x.powi(9), p) < 1e-30);
        assert!(rel(x.powi(-2), ExtendedReal::from_f64(49.0)) < 1e-30);
    }

    proptest! {
        #[test]
        fn add_sub_round_trip(a in -1e6f64..1e6, scale in -10i32..10, m in -1.0f64..1.0) {
            prop_assume!(a.abs() > 1e-6);
            let a = ExtendedReal::from_f64(a) / 3.0;
            let b = ExtendedReal::from_f64(m * 10f64.powi(scale) * a.hi.abs()) / 7.0;
            // the rounding of a + b is relative to the larger operand
            let back = (a + b) - b;
            let scale = a.hi.abs().max(b.hi.abs());
            prop_assert!((back - a).to_f64().abs() <= 2e-31 * scale);
            prop_assert_eq!((a + ExtendedReal::ZERO) - ExtendedReal::ZERO, a);
        }

        #[test]
        fn mul_div_round_trip(a in -1e6f64..1e6, b in 1e-3f64..1e3) {
            prop_assume!(a.abs() > 1e-6);
            let a = ExtendedReal::from_f64(a) / 3.0;
            let b = ExtendedReal::from_f64(b) / 11.0;
            prop_assert!(rel((a * b) / b, a) <= 2e-31);
            prop_assert!(rel((a / b) * b, a) <= 2e-31);
        }

        #[test]
        fn normalization_holds(a in -1e3f64..1e3, b in -1e3f64..1e3) {
            let x = ExtendedReal::from_f64(a) / 3.0 + ExtendedReal::from_f64(b) / 7.0;
            let half_ulp = if x.hi == 0.0 { 0.0 } else { x.hi.abs() * f64::EPSILON / 2.0 };
            prop_assert!(x.lo.abs() <= half_ulp);
        }
    }
}
