//! Scalar traits shared by the generic polynomial and matrix code.
//!
//! Exact work uses `BigInt` / `BigRational`; numerical cross-checks use
//! `f64` or the certified [`Ball`](crate::real::Ball) type.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// A commutative ring with unity.
pub trait Ring:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + FromPrimitive
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("every ring scalar is constructible from i64")
    }
}

impl<T> Ring for T where
    T: Clone
        + Debug
        + PartialEq
        + Zero
        + One
        + FromPrimitive
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}

/// A ring in which every element reported invertible can be divided by.
pub trait Field: Ring + Div<Output = Self> {
    /// Rough absolute size, used only to choose pivots.
    fn magnitude(&self) -> f64;

    /// True when `self` is certainly nonzero.
    fn is_invertible(&self) -> bool;
}

impl Field for BigRational {
    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::MAX)
    }

    fn is_invertible(&self) -> bool {
        !self.is_zero()
    }
}

impl Field for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn is_invertible(&self) -> bool {
        *self != 0.0 && self.is_finite()
    }
}

impl Field for f32 {
    fn magnitude(&self) -> f64 {
        self.abs() as f64
    }

    fn is_invertible(&self) -> bool {
        *self != 0.0 && self.is_finite()
    }
}

pub fn rat(n: impl Into<BigInt>, d: impl Into<BigInt>) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn int_rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Round to the nearest integer, ties away from zero.
pub fn round_rational(q: &BigRational) -> BigInt {
    q.round().to_integer()
}
