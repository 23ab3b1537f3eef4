//! Exceptional units in cyclic number fields of prime degree.
//!
//! The pipeline runs from the resultant sieve ([`sieve`]) through
//! Gaussian-period fields ([`cyclofield`]) and cyclotomic units ([`units`])
//! to a complete solver for `lambda + mu = 1` in units ([`solver`]).

pub mod arith;
pub mod cyclofield;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod poly;
pub mod polyring;
pub mod real;
pub mod scalar;
pub mod sieve;
pub mod solver;
pub mod units;

pub use error::{Error, Result};
pub use poly::Poly;
pub use polyring::RatPoly;
pub use real::Ball;

pub type Integer = num_bigint::BigInt;
pub type Rational = num_rational::BigRational;
pub type IntPoly = Poly<num_bigint::BigInt>;
pub type QPoly = Poly<num_rational::BigRational>;
pub type RealPoly = Poly<f64>;
pub type BallPoly = Poly<Ball>;
