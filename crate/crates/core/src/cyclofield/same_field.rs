//! Deciding whether two monic irreducible polynomials of the same degree
//! define the same (Galois) number field.
//!
//! Disagreeing factorization shapes modulo an unramified prime prove the
//! fields differ. Equality is proved by exhibiting a root of `g` in
//! `Q[x]/(f)`, found by lattice reduction from a `q`-adic root of `f`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::sieve_primes;
use crate::lattice::{default_delta, lll_reduce, IntLattice};
use crate::polyring::{discriminant, factor_mod_p_shape, roots_mod_p};
use crate::scalar::int_rat;
use crate::{IntPoly, QPoly, RatPoly};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum SameField {
    /// `g(root) = 0 mod f`, so `Q[x]/(g)` embeds in `Q[x]/(f)`.
    True {
        root: String,
    },
    False {
        reason: String,
    },
    Unknown,
}

impl SameField {
    pub fn is_true(&self) -> bool {
        matches!(self, SameField::True { .. })
    }

    pub fn is_false(&self) -> bool {
        matches!(self, SameField::False { .. })
    }
}

pub fn same_field(f: &IntPoly, g: &IntPoly) -> SameField {
    same_field_with_budget(f, g, 2000)
}

/// `prime_budget` caps the number of primes scanned for a shape mismatch.
pub fn same_field_with_budget(f: &IntPoly, g: &IntPoly, prime_budget: usize) -> SameField {
    let (Some(m), Some(mg)) = (f.degree(), g.degree()) else {
        return SameField::Unknown;
    };
    if m != mg {
        return SameField::False {
            reason: format!("degrees differ: {m} and {mg}"),
        };
    }
    if !f.is_monic() || !g.is_monic() {
        return SameField::Unknown;
    }
    let df = discriminant(f);
    let dg = discriminant(g);
    if df.is_zero() || dg.is_zero() {
        return SameField::Unknown;
    }
    let mut split_prime = None;
    let mut scanned = 0;
    for q in sieve_primes(1_000_000).into_iter().skip(1) {
        if scanned >= prime_budget {
            break;
        }
        let qb = BigInt::from(q);
        if (&df % &qb).is_zero() || (&dg % &qb).is_zero() {
            continue;
        }
        scanned += 1;
        let sf = factor_mod_p_shape(f, q);
        let sg = factor_mod_p_shape(g, q);
        if sf != sg {
            return SameField::False {
                reason: format!("factorization shapes mod {q} differ: {sf:?} vs {sg:?}"),
            };
        }
        if split_prime.is_none() && sf.len() == m && sf.iter().all(|&s| s == (1, 1)) {
            split_prime = Some(q);
        }
        // after a split prime and a reasonable shape scan, try to prove equality
        if split_prime.is_some() && scanned >= 60 {
            break;
        }
    }
    let Some(q) = split_prime else {
        return SameField::Unknown;
    };
    match find_root(f, g, q) {
        Some(r) => SameField::True {
            root: format!("({}) / {}", r.numerator(), r.denominator()),
        },
        None => SameField::Unknown,
    }
}

/// Newton lift of a simple root of `f` modulo `q^k`.
fn hensel_lift(f: &IntPoly, root: u64, q: u64, k: u32) -> BigInt {
    let modulus = num_traits::pow(BigInt::from(q), k as usize);
    let df = f.derivative();
    let mut a = BigInt::from(root);
    let mut prec = 1u32;
    while prec < k {
        prec = (2 * prec).min(k);
        let mk = num_traits::pow(BigInt::from(q), prec as usize);
        let fa = f.eval(&a).mod_floor(&mk);
        let dfa = df.eval(&a).mod_floor(&mk);
        let inv = mod_inv_big(&dfa, &mk).expect("simple root");
        a = (&a - fa * inv).mod_floor(&mk);
    }
    a.mod_floor(&modulus)
}

fn mod_inv_big(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

fn find_root(f: &IntPoly, g: &IntPoly, q: u64) -> Option<RatPoly> {
    let m = f.degree()?;
    let fq: QPoly = f.map(|c| int_rat(c.clone()));
    let gq: QPoly = g.map(|c| int_rat(c.clone()));
    let rf = roots_mod_p(f, q);
    let rg = roots_mod_p(g, q);
    let qbits = (q as f64).log2();
    let mut target_bits = 64.0;
    while target_bits <= 4096.0 {
        let k = ((target_bits * (m as f64 + 1.0)) / qbits).ceil() as u32;
        let modulus = num_traits::pow(BigInt::from(q), k as usize);
        let alpha = hensel_lift(f, rf[0], q, k);
        let powers: Vec<BigInt> = (0..m)
            .scan(BigInt::one(), |p, _| {
                let cur = p.clone();
                *p = (&*p * &alpha).mod_floor(&modulus);
                Some(cur)
            })
            .collect();
        for &b0 in &rg {
            let beta = hensel_lift(g, b0, q, k);
            let mut basis = Vec::with_capacity(m + 1);
            let mut row0 = vec![BigInt::zero(); m + 1];
            row0[0] = modulus.clone();
            basis.push(row0);
            for t in 1..m {
                let mut row = vec![BigInt::zero(); m + 1];
                row[0] = (-&powers[t]).mod_floor(&modulus);
                row[t] = BigInt::one();
                basis.push(row);
            }
            let mut last = vec![BigInt::zero(); m + 1];
            last[0] = beta;
            last[m] = BigInt::one();
            basis.push(last);
            let Ok(lat) = IntLattice::new(basis) else {
                continue;
            };
            let Ok(out) = lll_reduce(&lat, &default_delta()) else {
                continue;
            };
            for v in &out.lattice.basis {
                let d = &v[m];
                if d.is_zero() {
                    continue;
                }
                let cand = RatPoly::new(IntPoly::new(v[..m].to_vec()), d.clone());
                if gq.compose(&cand.to_qpoly(), Some(&fq)).is_zero() {
                    return Some(cand);
                }
            }
        }
        target_bits *= 2.0;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclofield::subfields_of_conductor;

    #[test]
    fn shifted_polynomial_is_same_field() {
        let f = IntPoly::from_ints(&[-1, 3, 3, -4, -1, 1]);
        let g = f.compose(&IntPoly::from_ints(&[2, 1]), None);
        let r = same_field(&f, &g);
        assert!(r.is_true(), "{r:?}");
    }

    #[test]
    fn distinct_conductors_differ() {
        let a = subfields_of_conductor(5, 11).unwrap().remove(0);
        let b = subfields_of_conductor(5, 31).unwrap().remove(0);
        assert!(same_field(a.minpoly(), b.minpoly()).is_false());
    }

    #[test]
    fn degree_mismatch() {
        let f = IntPoly::from_ints(&[-1, 1, 1]);
        let g = IntPoly::from_ints(&[-1, 3, 3, -4, -1, 1]);
        assert!(same_field(&f, &g).is_false());
    }
}
