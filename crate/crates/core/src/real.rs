//! Midpoint-radius real balls over fixed-point big integers.
//!
//! A ball `(mid, rad, prec)` encloses the interval
//! `[(mid - rad) / 2^prec, (mid + rad) / 2^prec]`. Binary operations work at
//! the larger of the two operand precisions, so exact small constants
//! (precision 0) combine freely with working-precision values.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::scalar::Field;

/// Extra bits carried by the transcendental kernels.
const GUARD: u32 = 32;

#[derive(Clone, PartialEq, Eq)]
pub struct Ball {
    mid: BigInt,
    rad: BigInt,
    prec: u32,
}

/// `round(x / 2^s)`, ties away from zero.
fn shr_round(x: &BigInt, s: u32) -> BigInt {
    if s == 0 {
        return x.clone();
    }
    let mag = x.magnitude();
    let r: BigInt = BigInt::from((mag + (num_bigint::BigUint::one() << (s - 1))) >> s);
    if x.sign() == Sign::Minus {
        -r
    } else {
        r
    }
}

/// `ceil(x / 2^s)` for `x >= 0`.
fn shr_ceil(x: &BigInt, s: u32) -> BigInt {
    if s == 0 {
        return x.clone();
    }
    let one = BigInt::one() << s;
    (x + &one - 1) >> s
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_ceil(b)
}

impl Ball {
    pub fn exact_int(v: impl Into<BigInt>) -> Self {
        Ball {
            mid: v.into(),
            rad: BigInt::zero(),
            prec: 0,
        }
    }

    /// Nearest ball of precision `prec` to the rational `q`.
    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        let scaled = q.numer() << prec;
        let (quo, rem) = scaled.div_rem(q.denom());
        let rad = if rem.is_zero() {
            BigInt::zero()
        } else {
            BigInt::one()
        };
        Ball {
            mid: quo,
            rad,
            prec,
        }
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        let q = BigRational::from_float(x).expect("finite f64");
        Self::from_rational(&q, prec)
    }

    pub fn from_parts(mid: BigInt, rad: BigInt, prec: u32) -> Self {
        assert!(!rad.is_negative());
        Ball { mid, rad, prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn mid_raw(&self) -> &BigInt {
        &self.mid
    }

    pub fn rad_raw(&self) -> &BigInt {
        &self.rad
    }

    /// Rescale to precision `p`; never shrinks the enclosure.
    pub fn with_prec(&self, p: u32) -> Ball {
        match p.cmp(&self.prec) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => Ball {
                mid: &self.mid << (p - self.prec),
                rad: &self.rad << (p - self.prec),
                prec: p,
            },
            Ordering::Less => {
                let s = self.prec - p;
                Ball {
                    mid: shr_round(&self.mid, s),
                    rad: shr_ceil(&self.rad, s) + 1,
                    prec: p,
                }
            }
        }
    }

    fn align(a: &Ball, b: &Ball) -> (Ball, Ball) {
        let p = a.prec.max(b.prec);
        (a.with_prec(p), b.with_prec(p))
    }

    pub fn mid(&self) -> BigRational {
        BigRational::new(self.mid.clone(), BigInt::one() << self.prec)
    }

    pub fn lower(&self) -> BigRational {
        BigRational::new(&self.mid - &self.rad, BigInt::one() << self.prec)
    }

    pub fn upper(&self) -> BigRational {
        BigRational::new(&self.mid + &self.rad, BigInt::one() << self.prec)
    }

    pub fn radius(&self) -> BigRational {
        BigRational::new(self.rad.clone(), BigInt::one() << self.prec)
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64().unwrap_or(f64::NAN)
    }

    /// An `f64` that is `>=` every point of the ball.
    pub fn upper_f64(&self) -> f64 {
        let v = self.upper().to_f64().unwrap_or(f64::INFINITY);
        v + v.abs() * 4.0 * f64::EPSILON + f64::MIN_POSITIVE
    }

    /// An `f64` that is `<=` every point of the ball.
    pub fn lower_f64(&self) -> f64 {
        let v = self.lower().to_f64().unwrap_or(f64::NEG_INFINITY);
        v - v.abs() * 4.0 * f64::EPSILON - f64::MIN_POSITIVE
    }

    /// Radius as a binary logarithm relative to 1, i.e. about `-correct bits`.
    pub fn rad_log2(&self) -> f64 {
        if self.rad.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.rad.bits() as f64 - self.prec as f64
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.abs() <= self.rad
    }

    pub fn is_positive(&self) -> bool {
        self.mid > self.rad
    }

    pub fn is_negative(&self) -> bool {
        -&self.mid > self.rad
    }

    pub fn abs(&self) -> Ball {
        if self.contains_zero() {
            // [0, |mid| + rad] centred.
            let hi = self.mid.abs() + &self.rad;
            let mid: BigInt = (&hi + 1) / 2;
            return Ball {
                rad: mid.clone(),
                mid,
                prec: self.prec,
            };
        }
        Ball {
            mid: self.mid.abs(),
            rad: self.rad.clone(),
            prec: self.prec,
        }
    }

    /// The integer inside the ball, if there is exactly one and the ball is
    /// narrower than 1.
    pub fn integers(&self) -> IntegerContent {
        let lo = self.lower().ceil().to_integer();
        let hi = self.upper().floor().to_integer();
        if lo > hi {
            IntegerContent::None
        } else if lo == hi {
            IntegerContent::Unique(lo)
        } else {
            IntegerContent::Ambiguous
        }
    }

    pub fn unique_integer(&self) -> Option<BigInt> {
        match self.integers() {
            IntegerContent::Unique(v) => Some(v),
            _ => None,
        }
    }

    /// Square root of a ball whose lower end is positive.
    pub fn sqrt(&self, prec: u32) -> Option<Ball> {
        if !self.is_positive() {
            return None;
        }
        let w = prec + GUARD;
        let x = self.with_prec(2 * w);
        let lo = &x.mid - &x.rad;
        let hi = &x.mid + &x.rad;
        // sqrt(v * 2^(2w)) = sqrt(v) * 2^w
        let lo_s = lo.sqrt();
        let hi_s = hi.sqrt() + 1;
        let mid = (&lo_s + &hi_s) / 2;
        let rad = (&hi_s - &lo_s + 1) / 2 + 1;
        Some(Ball { mid, rad, prec: w }.with_prec(prec))
    }

    pub fn pi(prec: u32) -> Ball {
        static CACHE: OnceLock<Mutex<HashMap<u32, Ball>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(v) = cache.lock().expect("poisoned").get(&prec) {
            return v.clone();
        }
        let v = Self::pi_uncached(prec);
        cache.lock().expect("poisoned").insert(prec, v.clone());
        v
    }

    fn pi_uncached(prec: u32) -> Ball {
        let w = prec + GUARD;
        // Machin: pi = 16 atan(1/5) - 4 atan(1/239)
        let (a, ea) = atan_inv(5, w);
        let (b, eb) = atan_inv(239, w);
        let mid = a * 16 - b * 4;
        let err = ea * 16 + eb * 4 + 2;
        Ball {
            mid,
            rad: BigInt::from(err),
            prec: w,
        }
        .with_prec(prec)
    }

    pub fn ln2(prec: u32) -> Ball {
        let w = prec + GUARD;
        let (v, e) = ln2_fixed(w);
        Ball {
            mid: v,
            rad: BigInt::from(e),
            prec: w,
        }
        .with_prec(prec)
    }

    /// Natural logarithm; `None` unless the ball is certainly positive.
    pub fn ln(&self, prec: u32) -> Option<Ball> {
        if !self.is_positive() {
            return None;
        }
        let w = prec + GUARD;
        let x = self.with_prec(w);
        let lo = &x.mid - &x.rad;
        let hi = &x.mid + &x.rad;
        let (l, el) = ln_fixed(&lo, w);
        let (h, eh) = ln_fixed(&hi, w);
        Some(hull(&l, &BigInt::from(el), &h, &BigInt::from(eh), w).with_prec(prec))
    }

    pub fn exp(&self, prec: u32) -> Ball {
        let w = prec + GUARD;
        let x = self.with_prec(w);
        let lo = &x.mid - &x.rad;
        let hi = &x.mid + &x.rad;
        let (l, el) = exp_fixed(&lo, w);
        let (h, eh) = exp_fixed(&hi, w);
        hull(&l, &el, &h, &eh, w).with_prec(prec)
    }

    /// `(cos(2 pi k / n), sin(2 pi k / n))`.
    pub fn cos_sin_2pi(k: i64, n: u64, prec: u32) -> (Ball, Ball) {
        let w = prec + GUARD;
        let n_i = n as i64;
        let mut k = k.rem_euclid(n_i);
        if 2 * k > n_i {
            k -= n_i;
        }
        // theta = 2 pi k / n, |theta| <= pi
        let pi = Ball::pi(w + 8).with_prec(w);
        let theta = Ball::exact_int(2 * k) * pi / Ball::exact_int(n_i);
        let t = theta.with_prec(w);
        let (c, s, e) = cos_sin_fixed(&t.mid, w);
        // |d cos|, |d sin| <= |d theta|
        let rad = BigInt::from(e) + &t.rad;
        (
            Ball {
                mid: c,
                rad: rad.clone(),
                prec: w,
            }
            .with_prec(prec),
            Ball {
                mid: s,
                rad,
                prec: w,
            }
            .with_prec(prec),
        )
    }

    pub fn pow_u(&self, mut e: u64) -> Ball {
        let mut base = self.clone();
        let mut acc = Ball::exact_int(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntegerContent {
    None,
    Unique(BigInt),
    Ambiguous,
}

/// Ball covering `[l - el, h + eh]` at precision `w` (`l <= h`).
fn hull(l: &BigInt, el: &BigInt, h: &BigInt, eh: &BigInt, w: u32) -> Ball {
    let lo = l - el;
    let hi = h + eh;
    let mid = (&lo + &hi) >> 1u32;
    let rad = (&hi - &lo) / 2 + 2;
    Ball { mid, rad, prec: w }
}

/// `atan(1/q) * 2^w` with an error bound in ulps.
fn atan_inv(q: u64, w: u32) -> (BigInt, u64) {
    let one = BigInt::one() << w;
    let q2 = BigInt::from(q * q);
    let mut power = &one / BigInt::from(q);
    let mut sum = BigInt::zero();
    let mut k = 0u64;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        power = &power / &q2;
        k += 1;
    }
    (sum, 2 * k + 2)
}

/// `atanh(t / 2^w) * 2^w` for `0 <= t < 2^w / 2`.
fn atanh_fixed(t: &BigInt, w: u32) -> (BigInt, u64) {
    let t2 = (t * t) >> w;
    let mut power = t.clone();
    let mut sum = BigInt::zero();
    let mut k = 0u64;
    while !power.is_zero() {
        sum += &power / BigInt::from(2 * k + 1);
        power = (&power * &t2) >> w;
        k += 1;
    }
    (sum, 3 * k + 3)
}

fn ln2_fixed(w: u32) -> (BigInt, u64) {
    // ln 2 = 2 atanh(1/3)
    let third = (BigInt::one() << w) / 3;
    let (a, e) = atanh_fixed(&third, w);
    (a * 2, 2 * e + 3)
}

/// `ln(x / 2^w) * 2^w` for `x > 0`.
fn ln_fixed(x: &BigInt, w: u32) -> (BigInt, u64) {
    let k = x.bits() as i64 - 1 - w as i64;
    // z = x / 2^k in [1, 2) scaled by 2^w
    let z = if k >= 0 {
        x >> (k as u32)
    } else {
        x << ((-k) as u32)
    };
    let one = BigInt::one() << w;
    let t = ((&z - &one) << w) / (&z + &one);
    let (a, ea) = atanh_fixed(&t, w);
    let (l2, el2) = ln2_fixed(w);
    let kk = BigInt::from(k);
    // Truncating z loses < 1 ulp of relative size 2^-w; its effect on ln is < 2 ulps.
    (a * 2 + &kk * l2, 2 * ea + 4 + k.unsigned_abs() * el2)
}

/// `exp(x / 2^w) * 2^w` with an error bound in ulps of the result's scale.
fn exp_fixed(x: &BigInt, w: u32) -> (BigInt, BigInt) {
    let (l2, el2) = ln2_fixed(w + 16);
    let n = (x << 16u32).div_floor(&l2);
    // r = x - n ln2 lies in [0, ln 2) up to rounding, so e^r < 2.
    let r = x - shr_round(&(&n * &l2), 16);
    let one = BigInt::one() << w;
    let mut term = one.clone();
    let mut sum = one;
    let mut k = 1u64;
    while !term.is_zero() {
        term = (&term * &r) >> w;
        term /= BigInt::from(k);
        sum += &term;
        k += 1;
    }
    let r_err = (n.abs() * BigInt::from(el2) >> 16u32) + 2;
    let err = r_err * 2 + BigInt::from(4 * k + 8);
    let n_i = n.to_i64().expect("exponent fits i64");
    if n_i >= 0 {
        let s = n_i as u32;
        (sum << s, err << s)
    } else {
        let s = (-n_i) as u32;
        (shr_round(&sum, s), (err >> s) + 1)
    }
}

/// `(cos, sin)(t / 2^w) * 2^w` for `|t| <= 4 * 2^w`, with an ulp error bound.
fn cos_sin_fixed(t: &BigInt, w: u32) -> (BigInt, BigInt, u64) {
    let one = BigInt::one() << w;
    let mut term = one.clone();
    let mut c = BigInt::zero();
    let mut s = BigInt::zero();
    let mut k = 0u64;
    loop {
        match k % 4 {
            0 => c += &term,
            1 => s += &term,
            2 => c -= &term,
            _ => s -= &term,
        }
        k += 1;
        term = (&term * t) >> w;
        term /= BigInt::from(k);
        if term.is_zero() {
            break;
        }
    }
    // Truncation errors are amplified by at most e^|t| < 50 along the recurrence.
    (c, s, 50 * k + 50)
}

impl fmt::Debug for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6e} +/- 2^{:.1}", self.to_f64(), self.rad_log2())
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl<'a> Add<&'a Ball> for &'a Ball {
    type Output = Ball;
    fn add(self, rhs: &Ball) -> Ball {
        let (a, b) = Ball::align(self, rhs);
        Ball {
            mid: a.mid + b.mid,
            rad: a.rad + b.rad,
            prec: a.prec,
        }
    }
}

impl<'a> Sub<&'a Ball> for &'a Ball {
    type Output = Ball;
    fn sub(self, rhs: &Ball) -> Ball {
        let (a, b) = Ball::align(self, rhs);
        Ball {
            mid: a.mid - b.mid,
            rad: a.rad + b.rad,
            prec: a.prec,
        }
    }
}

impl<'a> Mul<&'a Ball> for &'a Ball {
    type Output = Ball;
    fn mul(self, rhs: &Ball) -> Ball {
        let p = self.prec.max(rhs.prec);
        let mid = &self.mid * &rhs.mid;
        let rad = self.mid.abs() * &rhs.rad + rhs.mid.abs() * &self.rad + &self.rad * &rhs.rad;
        let s = self.prec + rhs.prec - p;
        if s == 0 {
            return Ball { mid, rad, prec: p };
        }
        Ball {
            mid: shr_round(&mid, s),
            rad: shr_ceil(&rad, s) + 1,
            prec: p,
        }
    }
}

impl<'a> Div<&'a Ball> for &'a Ball {
    type Output = Ball;
    /// Panics if the divisor contains zero; check [`Ball::contains_zero`] first.
    fn div(self, rhs: &Ball) -> Ball {
        assert!(
            !rhs.contains_zero(),
            "ball division by a ball containing zero"
        );
        // Exact divisors at precision 0 keep the dividend's precision.
        let (mut a, mut b) = Ball::align(self, rhs);
        if a.prec == 0 && !(&a.mid % &b.mid).is_zero() {
            // an inexact quotient of exact integers needs some fractional bits
            a = a.with_prec(128);
            b = b.with_prec(128);
        }
        let p = a.prec;
        let (ma, ra, mb, rb) = (&a.mid, &a.rad, &b.mid, &b.rad);
        let scaled = ma << p;
        let (q, r) = scaled.div_mod_floor(mb);
        let amb = mb.abs();
        let num = (&amb * ra + ma.abs() * rb) << p;
        let den = &amb * (&amb - rb);
        let rounding = if r.is_zero() { 0 } else { 1 };
        let rad = ceil_div(&num, &den) + rounding;
        Ball {
            mid: q,
            rad,
            prec: p,
        }
    }
}

impl Neg for &Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        Ball {
            mid: -&self.mid,
            rad: self.rad.clone(),
            prec: self.prec,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Ball> for Ball {
            type Output = Ball;
            fn $m(self, rhs: Ball) -> Ball {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        -&self
    }
}

impl Zero for Ball {
    fn zero() -> Self {
        Ball::exact_int(0)
    }
    fn is_zero(&self) -> bool {
        self.mid.is_zero() && self.rad.is_zero()
    }
}

impl One for Ball {
    fn one() -> Self {
        Ball::exact_int(1)
    }
}

impl FromPrimitive for Ball {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Ball::exact_int(n))
    }
    fn from_u64(n: u64) -> Option<Self> {
        Some(Ball::exact_int(n))
    }
}

impl Field for Ball {
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    fn is_invertible(&self) -> bool {
        !self.contains_zero()
    }
}

/// A complex ball as a pair of real balls.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexBall {
    pub re: Ball,
    pub im: Ball,
}

impl ComplexBall {
    pub fn zero() -> Self {
        ComplexBall {
            re: Ball::zero(),
            im: Ball::zero(),
        }
    }

    pub fn root_of_unity(k: i64, n: u64, prec: u32) -> Self {
        let (re, im) = Ball::cos_sin_2pi(k, n, prec);
        ComplexBall { re, im }
    }

    pub fn add(&self, o: &Self) -> Self {
        ComplexBall {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        ComplexBall {
            re: &(&self.re * &o.re) - &(&self.im * &o.im),
            im: &(&self.re * &o.im) + &(&self.im * &o.re),
        }
    }

    pub fn with_prec(&self, p: u32) -> Self {
        ComplexBall {
            re: self.re.with_prec(p),
            im: self.im.with_prec(p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(b: &Ball, v: f64, tol: f64) -> bool {
        (b.to_f64() - v).abs() < tol && b.rad_log2() < -100.0
    }

    #[test]
    fn constants() {
        assert!(close(&Ball::pi(256), std::f64::consts::PI, 1e-15));
        assert!(close(&Ball::ln2(256), std::f64::consts::LN_2, 1e-15));
    }

    #[test]
    fn pi_digits_match_reference() {
        // 50 decimals of pi as an independent reference.
        let pi50 = "3.14159265358979323846264338327950288419716939937510";
        let digits: String = pi50.replace('.', "");
        let num: BigInt = digits.parse().unwrap();
        let q = BigRational::new(num, BigInt::from(10).pow(50));
        let b = Ball::pi(200);
        let tol = BigRational::new(BigInt::one(), BigInt::from(10).pow(49));
        assert!((b.mid() - q).abs() < tol);
        assert!(b.lower() <= b.mid() && b.mid() <= b.upper());
    }

    #[test]
    fn ln_exp_inverse() {
        for v in [0.001, 0.5, 1.0, 2.0, 10.0, 12345.678] {
            let x = Ball::from_f64(v, 300);
            let y = x.ln(300).unwrap();
            assert!((y.to_f64() - v.ln()).abs() < 1e-13);
            let z = y.exp(300);
            let diff = &z - &x;
            assert!(diff.contains_zero() || diff.to_f64().abs() < 1e-80);
            assert!(z.rad_log2() < -200.0 + v.log2().max(0.0));
        }
        assert!(Ball::exact_int(-1).ln(100).is_none());
    }

    #[test]
    fn exp_of_large_arguments() {
        let x = Ball::exact_int(100);
        let e = x.exp(200);
        assert!(((e.to_f64() / 100f64.exp()) - 1.0).abs() < 1e-14);
        let e = Ball::exact_int(-100).exp(200);
        assert!(((e.to_f64() / (-100f64).exp()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cos_sin_values() {
        let (c, s) = Ball::cos_sin_2pi(1, 11, 256);
        let th = 2.0 * std::f64::consts::PI / 11.0;
        assert!(close(&c, th.cos(), 1e-15));
        assert!(close(&s, th.sin(), 1e-15));
        let (c, s) = Ball::cos_sin_2pi(9, 11, 256);
        assert!(close(&c, (9.0 * th).cos(), 1e-15));
        assert!(close(&s, (9.0 * th).sin(), 1e-15));
        // cos^2 + sin^2 = 1
        let one = &(&c * &c) + &(&s * &s);
        assert!((&one - &Ball::one()).contains_zero());
    }

    #[test]
    fn division_encloses() {
        let a = Ball::exact_int(1);
        let b = Ball::exact_int(3).with_prec(128);
        let q = &a / &b;
        let third = BigRational::new(BigInt::one(), BigInt::from(3));
        assert!(q.lower() <= third && third <= q.upper());
    }

    #[test]
    fn integer_content() {
        let b = Ball::from_rational(&BigRational::new(BigInt::from(7), BigInt::from(2)), 64);
        assert_eq!(b.integers(), IntegerContent::None);
        let b = Ball::from_f64(3.0000001, 64);
        assert_eq!(b.integers(), IntegerContent::None);
        let b = Ball::exact_int(5).with_prec(64);
        assert_eq!(b.unique_integer(), Some(BigInt::from(5)));
        let wide = Ball::from_parts(BigInt::zero(), BigInt::from(3) << 64u32, 64);
        assert_eq!(wide.integers(), IntegerContent::Ambiguous);
    }

    #[test]
    fn sqrt_encloses() {
        let two = Ball::exact_int(2).with_prec(200);
        let r = two.sqrt(200).unwrap();
        let sq = &r * &r;
        assert!((&sq - &two).contains_zero());
        assert!((r.to_f64() - 2f64.sqrt()).abs() < 1e-15);
    }
}
