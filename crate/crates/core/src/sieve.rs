//! The resultant sieve: `R_ell`, the primes `S_ell`, candidate conductors,
//! and the congruence tests used as cross-checks.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{factorize_with, is_prime_u64, FactorConfig, Factorization};
use crate::error::{Error, Result};
use crate::polyring::{powmod, resultant};
use crate::IntPoly;

pub const MAX_SUBSET_PRIMES: usize = 20;
pub const COMMON_ROOT_SCAN_LIMIT: u64 = 100_000_000;

pub fn check_ell(ell: u64) -> Result<()> {
    match ell {
        2 => Err(Error::EllIsTwo),
        3 => Err(Error::EllIsThree),
        _ if !is_prime_u64(ell) => Err(Error::NotPrime(BigInt::from(ell))),
        _ => Ok(()),
    }
}

/// `X^(2 ell) - 1` and `(X - 1)^(2 ell) - 1`.
pub fn sieve_polynomials(ell: u64) -> (IntPoly, IntPoly) {
    let n = 2 * ell as usize;
    let a = &IntPoly::monomial(BigInt::one(), n) - &IntPoly::one();
    let b = &IntPoly::from_ints(&[-1, 1]).pow(n as u32) - &IntPoly::one();
    (a, b)
}

/// `R_ell = Res(X^(2 ell) - 1, (X - 1)^(2 ell) - 1)`.
pub fn compute_rl(ell: u64) -> Result<BigInt> {
    check_ell(ell)?;
    let (a, b) = sieve_polynomials(ell);
    Ok(resultant(&a, &b))
}

/// Primes `p = 1 mod ell` dividing `R_ell`, with the factorization used.
pub fn compute_sl_with(ell: u64, cfg: FactorConfig) -> Result<(Factorization, Vec<u64>)> {
    let r = compute_rl(ell)?;
    let fact = factorize_with(&r, cfg)?;
    let s = select_sl(&fact, ell)?;
    Ok((fact, s))
}

pub fn compute_sl(ell: u64) -> Result<Vec<u64>> {
    Ok(compute_sl_with(ell, FactorConfig::default())?.1)
}

fn select_sl(fact: &Factorization, ell: u64) -> Result<Vec<u64>> {
    let ell_b = BigInt::from(ell);
    let mut s = Vec::new();
    for p in fact.primes() {
        if (p % &ell_b).is_one() {
            s.push(p.to_u64().ok_or_else(|| {
                Error::InvalidInput(format!("prime {p} in S_ell exceeds 64 bits"))
            })?);
        }
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    /// The subset `T` of `S_ell`.
    pub primes: Vec<u64>,
    pub conductor: u64,
    #[serde(with = "crate::polyring::bigint_str")]
    pub discriminant: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub ell: u64,
    #[serde(with = "crate::polyring::bigint_str")]
    pub r_ell: BigInt,
    pub factorization: Factorization,
    pub s_ell: Vec<u64>,
    /// False when the factorization of `R_ell` ran out of budget.
    pub complete: bool,
    pub candidates: Vec<Candidate>,
}

pub fn candidate_conductors(ell: u64) -> Result<CandidateReport> {
    candidate_conductors_with(ell, FactorConfig::default())
}

pub fn candidate_conductors_with(ell: u64, cfg: FactorConfig) -> Result<CandidateReport> {
    let r_ell = compute_rl(ell)?;
    let (factorization, complete) = match factorize_with(&r_ell, cfg) {
        Ok(f) => (f, true),
        Err(Error::FactorTimeout { partial, .. }) => (partial, false),
        Err(e) => return Err(e),
    };
    let s_ell = select_sl(&factorization, ell)?;
    if s_ell.len() > MAX_SUBSET_PRIMES {
        return Err(Error::TooManyPrimes(s_ell.len()));
    }
    let mut candidates = Vec::new();
    for mask in 1u32..(1 << s_ell.len()) {
        let primes: Vec<u64> = s_ell
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &p)| p)
            .collect();
        let conductor = primes.iter().try_fold(1u64, |acc, &p| acc.checked_mul(p));
        let conductor =
            conductor.ok_or_else(|| Error::InvalidInput("conductor exceeds 64 bits".into()))?;
        let discriminant = num_traits::pow(BigInt::from(conductor), (ell - 1) as usize);
        candidates.push(Candidate {
            primes,
            conductor,
            discriminant,
        });
    }
    candidates.sort_by_key(|c| (c.conductor, c.primes.clone()));
    Ok(CandidateReport {
        ell,
        r_ell,
        factorization,
        s_ell,
        complete,
        candidates,
    })
}

/// `b^ell = +-1 (mod p)`.
pub fn residue_test(b: i64, p: u64, ell: u64) -> bool {
    let r = powmod(b.rem_euclid(p as i64) as u64, ell, p);
    r == 1 % p || r == p - 1
}

/// Exhaustive scan for `b` with `b^(2 ell) = 1` and `(b - 1)^(2 ell) = 1` in `F_p`.
pub fn common_root_check(p: u64, ell: u64) -> Result<bool> {
    if p > COMMON_ROOT_SCAN_LIMIT {
        return Err(Error::PTooLarge(p));
    }
    let e = 2 * ell;
    Ok((0..p).any(|b| powmod(b, e, p) == 1 % p && powmod((b + p - 1) % p, e, p) == 1 % p))
}

/// `3 * 7^(3r + 4s)`.
pub fn evertse_bound(r: u32, s: u32) -> Result<BigInt> {
    if r == 0 && s == 0 {
        return Err(Error::InvalidInput(
            "evertse_bound needs (r, s) != (0, 0)".into(),
        ));
    }
    Ok(BigInt::from(3) * num_traits::pow(BigInt::from(7), (3 * r + 4 * s) as usize))
}

/// True when `n` has no repeated prime factor.
pub fn is_squarefree(n: u64) -> bool {
    !n.is_zero() && crate::arith::factor_u64(n).iter().all(|&(_, e)| e == 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r5_value() {
        assert_eq!(
            compute_rl(5).unwrap(),
            "-210736858987743".parse::<BigInt>().unwrap()
        );
        assert!(matches!(compute_rl(3), Err(Error::EllIsThree)));
        assert!(matches!(compute_rl(2), Err(Error::EllIsTwo)));
        assert!(matches!(compute_rl(9), Err(Error::NotPrime(_))));
    }

    #[test]
    fn r7_nonzero_and_prime_to_seven() {
        let r = compute_rl(7).unwrap();
        assert!(!r.is_zero());
        assert!(!(r % BigInt::from(7)).is_zero());
    }

    #[test]
    fn s5_and_candidates() {
        assert_eq!(compute_sl(5).unwrap(), vec![11, 31]);
        let rep = candidate_conductors(5).unwrap();
        let conds: Vec<u64> = rep.candidates.iter().map(|c| c.conductor).collect();
        assert_eq!(conds, vec![11, 31, 341]);
        assert_eq!(rep.candidates[0].discriminant, BigInt::from(14641));
        assert_eq!(
            rep.candidates[2].discriminant,
            num_traits::pow(BigInt::from(341), 4)
        );
        assert!(rep.complete);
    }

    #[test]
    fn s7_from_factorization() {
        let (fact, s) = compute_sl_with(7, FactorConfig::default()).unwrap();
        for &p in &s {
            assert_eq!(p % 7, 1);
            assert!(fact.primes().any(|q| q == &BigInt::from(p)));
        }
        assert_eq!(fact.value(), compute_rl(7).unwrap());
    }

    #[test]
    fn residue_examples() {
        assert!(residue_test(1, 31, 5));
        assert!(residue_test(2, 31, 5));
        assert!(!residue_test(3, 31, 5));
        assert_eq!(powmod(3, 5, 31), 26);
    }

    #[test]
    fn common_roots() {
        assert!(common_root_check(11, 5).unwrap());
        assert!(common_root_check(31, 5).unwrap());
        assert!(!common_root_check(7, 5).unwrap());
        assert!(matches!(
            common_root_check(100_000_007, 5),
            Err(Error::PTooLarge(_))
        ));
    }

    #[test]
    fn evertse_values() {
        assert_eq!(evertse_bound(1, 0).unwrap(), BigInt::from(1029));
        assert_eq!(evertse_bound(0, 1).unwrap(), BigInt::from(7203));
        assert_eq!(
            evertse_bound(5, 0).unwrap(),
            BigInt::from(3) * num_traits::pow(BigInt::from(7), 15)
        );
        assert!(evertse_bound(0, 0).is_err());
    }
}
