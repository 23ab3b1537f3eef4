use num_bigint::BigInt;
use thiserror::Error;

use crate::arith::Factorization;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(BigInt),

    #[error("{0} is not squarefree")]
    NotSquarefree(u64),

    #[error(
        "factorization budget of {budget} Pollard iterations exhausted; partial result {partial}"
    )]
    FactorTimeout { budget: u64, partial: Factorization },

    #[error("ell = 3: R_3 = Res(X^6-1, (X-1)^6-1) = 0 because (1+sqrt(-3))/2 is a common root, and infinitely many cyclic cubic fields are exceptional")]
    EllIsThree,

    #[error("ell = 2: the exceptional quadratic fields are known (Nagell): only Q(sqrt 5) and Q(sqrt -3)")]
    EllIsTwo,

    #[error("ell must be a prime >= 5, got {0}")]
    EllTooSmall(u64),

    #[error("common-root scan refused: p = {0} exceeds 10^8")]
    PTooLarge(u64),

    #[error("|S_ell| = {0} exceeds the subset enumeration cap of 20")]
    TooManyPrimes(usize),

    #[error("subgroup does not have exact conductor {conductor}: it contains the kernel of reduction to modulus {divisor}")]
    ConductorNotExact { conductor: u64, divisor: u64 },

    #[error("elementary symmetric function e_{0} of the periods did not reduce to a constant")]
    NonConstantSymmetricFunction(usize),

    #[error("invalid subgroup: {0}")]
    InvalidSubgroup(String),

    #[error("field invariant violated: {0}")]
    FieldInvariant(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("operands belong to different fields")]
    FieldMismatch,

    #[error("element is not {p}-integral")]
    NotIntegralAt { p: u64 },

    #[error(
        "ramification assumption failed at p = {p}: minimal polynomial shape mod p is {shape:?}"
    )]
    RamificationAssumptionFailed { p: u64, shape: Vec<(usize, usize)> },

    #[error("only {found} independent units found, {needed} needed")]
    RankDeficient { found: usize, needed: usize },

    #[error("precision exhausted at {bits} bits: {context}")]
    PrecisionExhausted { bits: u32, context: String },

    #[error("field is not totally real")]
    NotTotallyReal,

    #[error("bound reduction made no progress from {0}")]
    NoProgress(BigInt),

    #[error("enumeration budget of {0} exact verifications exceeded")]
    BudgetExceeded(u64),

    #[error("solution set is not closed under the order-6 symmetry")]
    NotClosed,

    #[error("rigorous mode requires a unit system asserted to be fundamental")]
    ModeRequiresFundamentalUnits,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
