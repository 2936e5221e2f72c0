//! Unevaluated sum of two `f64` values (`hi + lo`, `|lo| ≤ ulp(hi)/2`).
//!
//! Products use a fused multiply-add for the exact error term; additions use
//! the accurate two-sum variant. Relative precision is about `2^-104`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use super::Real;

#[derive(Clone, Copy, Default)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

const LN2: DoubleDouble = DoubleDouble::from_parts(std::f64::consts::LN_2, 2.3190468138462996e-17);
const PI: DoubleDouble = DoubleDouble::from_parts(std::f64::consts::PI, 1.2246467991473532e-16);

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

// requires |a| >= |b|
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

impl DoubleDouble {
    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn normalized(hi: f64, lo: f64) -> Self {
        let (h, l) = quick_two_sum(hi, lo);
        Self { hi: h, lo: l }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        Self::normalized(p, e + self.lo * b)
    }

    fn ldexp(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        Self {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    fn exp_impl(self) -> Self {
        if self.hi > 709.78 {
            return Self::from(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Self::from(0.0);
        }
        if self.hi == 0.0 {
            return Self::from(1.0);
        }
        // exp(x) = 2^m * exp(r)^512, |r| ≤ ln2/1024
        let m = (self.hi / LN2.hi).round();
        let r = (self - LN2.mul_f64(m)).ldexp(-9);
        // Taylor series for exp(r) - 1
        let mut term = r;
        let mut s = r;
        let mut k = 2.0;
        loop {
            term = term * r / Self::from(k);
            s += term;
            if term.hi.abs() <= 1e-36 * s.hi.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            k += 1.0;
        }
        // (1+s)^2 - 1 = 2s + s^2
        for _ in 0..9 {
            s = s.mul_f64(2.0) + s * s;
        }
        (s + Self::from(1.0)).ldexp(m as i32)
    }

    fn ln_impl(self) -> Self {
        if self.hi <= 0.0 {
            return Self::from(f64::NAN);
        }
        // Newton on exp: x <- x + a*exp(-x) - 1
        let mut x = Self::from(self.hi.ln());
        for _ in 0..2 {
            x = x + self * (-x).exp_impl() - Self::from(1.0);
        }
        x
    }

    fn sqrt_impl(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Self::from(0.0)
            } else {
                Self::from(f64::NAN)
            };
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let (sq, sq_err) = two_prod(ax, ax);
        let diff = (self - Self::normalized(sq, sq_err)).hi;
        let (s, e) = two_sum(ax, diff * (x * 0.5));
        Self::normalized(s, e)
    }
}

impl From<f64> for DoubleDouble {
    fn from(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Self::normalized(s, e + f)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        Self::normalized(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (h, l) = quick_two_sum(q1, q2);
        Self { hi: h, lo: l } + Self::from(q3)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

macro_rules! assign_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for DoubleDouble {
            #[inline]
            fn $m(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    };
}
assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);

impl Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::from(0.0), |a, b| a + b)
    }
}

impl PartialEq for DoubleDouble {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleDouble({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.hi, f)
    }
}

impl Real for DoubleDouble {
    const EPSILON: f64 = 4.93038065763132e-32; // 2^-104
    const NAME: &'static str = "extended";

    #[inline]
    fn from_f64(v: f64) -> Self {
        Self::from(v)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
    fn pi() -> Self {
        PI
    }
    fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }
    fn sqrt(self) -> Self {
        self.sqrt_impl()
    }
    fn exp(self) -> Self {
        self.exp_impl()
    }
    fn ln(self) -> Self {
        self.ln_impl()
    }
    fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // reference values: correctly rounded (hi, lo) pairs from a 50-digit evaluation
    fn close(a: DoubleDouble, hi: f64, lo: f64, tol: f64) {
        let d = (a - DoubleDouble::from_parts(hi, lo)).abs().to_f64() / hi.abs();
        assert!(d < tol, "{a:?} vs ({hi:e}, {lo:e}) rel {d:e}");
    }

    #[test]
    fn arithmetic_is_double_double_accurate() {
        let third = DoubleDouble::from(1.0) / DoubleDouble::from(3.0);
        let back = third * DoubleDouble::from(3.0);
        assert!((back - DoubleDouble::from(1.0)).abs().to_f64() < 1e-31);
        let x = DoubleDouble::from(0.1) + DoubleDouble::from(0.2) - DoubleDouble::from(0.3);
        // exact binary value of 0.1 + 0.2 - 0.3 in f64 inputs
        assert!((x.to_f64() - 2.7755575615628914e-17).abs() < 1e-32);
    }

    #[test]
    fn sqrt_two() {
        close(DoubleDouble::from(2.0).sqrt(), std::f64::consts::SQRT_2, -9.667293313452913e-17, 1e-31);
        assert_eq!(DoubleDouble::from(0.0).sqrt(), DoubleDouble::from(0.0));
    }

    #[test]
    fn exp_and_ln_reference_values() {
        close(DoubleDouble::from(1.0).exp(), std::f64::consts::E, 1.4456468917292502e-16, 1e-31);
        let third = DoubleDouble::from(1.0) / DoubleDouble::from(3.0);
        close(third.exp(), 1.3956124250860895, 1.4446871884803438e-17, 1e-31);
        close(DoubleDouble::from(-20.5).exp(), 1.2501528663867426e-09, 6.448235878237776e-26, 1e-30);
        close(DoubleDouble::from(2.0).ln(), LN2.hi, LN2.lo, 1e-31);
        close(DoubleDouble::from(10.0).ln(), std::f64::consts::LN_10, -2.1707562233822494e-16, 1e-31);
        close(DoubleDouble::from(1e-30).ln(), -69.07755278982137, -2.286179106246918e-15, 1e-31);
    }

    #[test]
    fn fractional_power() {
        let v = DoubleDouble::from(0.5).powf(DoubleDouble::from(0.3));
        close(v, 0.8122523963562356, -5.534680269627686e-17, 1e-30);
    }

    #[test]
    fn ordering_uses_low_word() {
        let a = DoubleDouble::from_parts(1.0, 1e-20);
        let b = DoubleDouble::from_parts(1.0, -1e-20);
        assert!(a > b);
        assert!((b - a).abs() == a - b);
    }
}
