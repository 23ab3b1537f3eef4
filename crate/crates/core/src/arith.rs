//! Primality, factorization, CRT and the structure of `(Z/NZ)^x`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyring::powmod;

const TRIAL_LIMIT: u64 = 1_000_000;
pub const DEFAULT_FACTOR_BUDGET: u64 = 1_000_000_000;
pub const DEFAULT_SEED: u64 = 0x5eed;

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve_primes(TRIAL_LIMIT))
}

/// All primes `<= limit` by the sieve of Eratosthenes.
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut comp = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !comp[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primality {
    Composite,
    Prime,
    /// Passed a strong probable-prime test beyond the deterministic range.
    ProbablePrime,
}

fn strong_probable_prime(n: &BigInt, a: &BigInt) -> bool {
    let nm1: BigInt = n - 1;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    let mut x = a.modpow(&d, n);
    if x.is_one() || x == nm1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == nm1 {
            return true;
        }
    }
    false
}

pub fn primality(n: &BigInt) -> Primality {
    if let Some(v) = n.to_u64() {
        return if is_prime_u64(v) {
            Primality::Prime
        } else {
            Primality::Composite
        };
    }
    if n.is_negative() {
        return Primality::Composite;
    }
    for &p in &small_primes()[..200] {
        if (n % p).is_zero() {
            return Primality::Composite;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let bases = [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]
        .into_iter()
        .map(BigInt::from)
        .chain((0..20).map(|_| rng.gen_bigint_range(&BigInt::from(2), &(n - 2))));
    for a in bases {
        if !strong_probable_prime(n, &a) {
            return Primality::Composite;
        }
    }
    Primality::ProbablePrime
}

pub fn is_prime(n: &BigInt) -> bool {
    primality(n) != Primality::Composite
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub sign: i8,
    #[serde(with = "factor_list")]
    pub factors: Vec<(BigInt, u32)>,
    /// Composite cofactors left when the work budget ran out.
    #[serde(default, with = "crate::polyring::bigint_vec_str")]
    pub cofactors: Vec<BigInt>,
    /// Some factor is only a probable prime.
    #[serde(default)]
    pub probable: bool,
}

mod factor_list {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[(BigInt, u32)], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|(p, e)| (p.to_string(), *e))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(BigInt, u32)>, D::Error> {
        Vec::<(String, u32)>::deserialize(d)?
            .into_iter()
            .map(|(p, e)| Ok((p.parse().map_err(serde::de::Error::custom)?, e)))
            .collect()
    }
}

impl Factorization {
    pub fn is_complete(&self) -> bool {
        self.cofactors.is_empty()
    }

    /// The integer this factorization describes.
    pub fn value(&self) -> BigInt {
        let mut v: BigInt = self
            .factors
            .iter()
            .map(|(p, e)| num_traits::pow(p.clone(), *e as usize))
            .product();
        for c in &self.cofactors {
            v *= c;
        }
        if self.sign < 0 {
            -v
        } else {
            v
        }
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigInt> {
        self.factors.iter().map(|(p, _)| p)
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .factors
            .iter()
            .map(|(p, e)| {
                if *e == 1 {
                    p.to_string()
                } else {
                    format!("{p}^{e}")
                }
            })
            .collect();
        parts.extend(self.cofactors.iter().map(|c| format!("[{c}]")));
        let sign = if self.sign < 0 { "-" } else { "" };
        if parts.is_empty() {
            return write!(f, "{sign}1");
        }
        write!(f, "{sign}{}", parts.join(" * "))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FactorConfig {
    /// Total Pollard iterations allowed across all cofactors.
    pub budget: u64,
    pub seed: u64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig {
            budget: DEFAULT_FACTOR_BUDGET,
            seed: DEFAULT_SEED,
        }
    }
}

/// Brent's variant of Pollard rho; `None` if the budget runs out.
fn pollard_brent(n: &BigInt, rng: &mut ChaCha8Rng, spent: &mut u64, budget: u64) -> Option<BigInt> {
    if n.is_even() {
        return Some(BigInt::from(2));
    }
    let two = BigInt::from(2);
    loop {
        let c = rng.gen_bigint_range(&BigInt::one(), &(n - 1));
        let mut y = rng.gen_bigint_range(&two, &(n - 1));
        let m = 128u64;
        let (mut g, mut r, mut q) = (BigInt::one(), 1u64, BigInt::one());
        let mut x = y.clone();
        let mut ys = y.clone();
        let f = |v: &BigInt| (v * v + &c) % n;
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    q = (&q * (&x - &y).abs()) % n;
                }
                *spent += m.min(r - k);
                if *spent > budget {
                    return None;
                }
                g = q.gcd(n);
                k += m;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                g = (&x - &ys).abs().gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return Some(g);
        }
    }
}

pub fn factorize(n: &BigInt) -> Result<Factorization> {
    factorize_with(n, FactorConfig::default())
}

/// Complete factorization: trial division to 10^6, then Pollard-Brent.
pub fn factorize_with(n: &BigInt, cfg: FactorConfig) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::InvalidInput("cannot factor 0".into()));
    }
    let sign = if n.sign() == Sign::Minus { -1 } else { 1 };
    let mut m = n.abs();
    let mut found: BTreeMap<BigInt, u32> = BTreeMap::new();
    for &p in small_primes() {
        let pb = BigInt::from(p);
        if &pb * &pb > m {
            break;
        }
        while (&m % p).is_zero() {
            m /= p;
            *found.entry(pb.clone()).or_insert(0) += 1;
        }
    }
    let mut probable = false;
    let mut cofactors = Vec::new();
    let mut stack = if m.is_one() { vec![] } else { vec![m] };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut spent = 0u64;
    while let Some(c) = stack.pop() {
        match primality(&c) {
            Primality::Prime => *found.entry(c).or_insert(0) += 1,
            Primality::ProbablePrime => {
                probable = true;
                *found.entry(c).or_insert(0) += 1;
            }
            Primality::Composite => {
                if !cofactors.is_empty() {
                    cofactors.push(c);
                    continue;
                }
                match pollard_brent(&c, &mut rng, &mut spent, cfg.budget) {
                    Some(d) => {
                        stack.push(&c / &d);
                        stack.push(d);
                    }
                    None => cofactors.push(c),
                }
            }
        }
    }
    let fact = Factorization {
        sign,
        factors: found.into_iter().collect(),
        cofactors,
        probable,
    };
    if !fact.is_complete() {
        return Err(Error::FactorTimeout {
            budget: cfg.budget,
            partial: fact,
        });
    }
    Ok(fact)
}

/// Factor a machine integer.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    factorize(&BigInt::from(n))
        .expect("u64 factorization completes")
        .factors
        .into_iter()
        .map(|(p, e)| (p.to_u64().expect("fits"), e))
        .collect()
}

pub fn euler_phi(n: u64) -> u64 {
    factor_u64(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let r = BigInt::from(a).extended_gcd(&BigInt::from(m));
    if !r.gcd.is_one() {
        return None;
    }
    r.x.mod_floor(&BigInt::from(m)).to_u64()
}

pub fn pow_mod(b: u64, e: u64, m: u64) -> u64 {
    powmod(b, e, m)
}

/// Combine `x = r_i mod m_i` for pairwise coprime moduli into `(x, prod m_i)`.
pub fn crt_lift(residues: &[(u64, u64)]) -> Result<(u64, u64)> {
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for &(r, mi) in residues {
        let mib = BigInt::from(mi);
        let e = m.extended_gcd(&mib);
        if !e.gcd.is_one() {
            return Err(Error::InvalidInput(format!(
                "modulus {mi} not coprime to {m}"
            )));
        }
        // x + m t = r (mod mi)  =>  t = (r - x) m^{-1}
        let t = ((BigInt::from(r) - &x) * e.x).mod_floor(&mib);
        x += &m * t;
        m *= mib;
    }
    let x = x.mod_floor(&m);
    Ok((
        x.to_u64()
            .ok_or_else(|| Error::InvalidInput("CRT result exceeds u64".into()))?,
        m.to_u64()
            .ok_or_else(|| Error::InvalidInput("modulus exceeds u64".into()))?,
    ))
}

pub fn multiplicative_order(a: u64, n: u64) -> u64 {
    let phi = euler_phi(n);
    let mut ord = phi;
    for (q, _) in factor_u64(phi) {
        while ord % q == 0 && powmod(a, ord / q, n) == 1 {
            ord /= q;
        }
    }
    ord
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicComponent {
    pub prime: u64,
    pub generator: u64,
    pub order: u64,
}

/// `(Z/NZ)^x` for squarefree `N`, as a product over the prime factors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitGroupZn {
    pub modulus: u64,
    pub components: Vec<CyclicComponent>,
}

impl UnitGroupZn {
    pub fn order(&self) -> u64 {
        self.components.iter().map(|c| c.order).product()
    }

    pub fn cyclic_orders(&self) -> Vec<u64> {
        self.components.iter().map(|c| c.order).collect()
    }

    /// Exponent vector of `x` with respect to the component generators.
    pub fn log(&self, x: u64) -> Vec<u64> {
        self.components
            .iter()
            .map(|c| discrete_log(c.generator, x % c.prime, c.prime))
            .collect()
    }

    /// The residue with the given component exponents.
    pub fn exp(&self, e: &[u64]) -> u64 {
        let res: Vec<(u64, u64)> = self
            .components
            .iter()
            .zip(e)
            .map(|(c, &k)| (powmod(c.generator, k, c.prime), c.prime))
            .collect();
        crt_lift(&res).expect("distinct primes").0
    }

    pub fn units(&self) -> Vec<u64> {
        (1..self.modulus)
            .filter(|&a| a.gcd(&self.modulus) == 1)
            .collect()
    }
}

fn discrete_log(g: u64, x: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    for k in 0..p - 1 {
        if acc == x % p {
            return k;
        }
        acc = mulmod(acc, g, p);
    }
    panic!("{x} is not a power of {g} mod {p}")
}

pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let qs: Vec<u64> = factor_u64(p - 1).into_iter().map(|(q, _)| q).collect();
    (2..p)
        .find(|&g| qs.iter().all(|&q| powmod(g, (p - 1) / q, p) != 1))
        .expect("primitive root exists")
}

pub fn unit_group_structure(n: u64) -> Result<UnitGroupZn> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("modulus {n} < 3")));
    }
    let fac = factor_u64(n);
    if fac.iter().any(|&(_, e)| e > 1) {
        return Err(Error::NotSquarefree(n));
    }
    let components = fac
        .into_iter()
        .map(|(p, _)| CyclicComponent {
            prime: p,
            generator: primitive_root(p),
            order: p - 1,
        })
        .collect();
    Ok(UnitGroupZn {
        modulus: n,
        components,
    })
}

/// A subgroup of `(Z/NZ)^x` given by generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupZn {
    pub modulus: u64,
    pub generators: Vec<u64>,
    pub index: u64,
}

impl SubgroupZn {
    /// The subgroup generated by `generators`, with its index computed.
    pub fn generated(modulus: u64, generators: Vec<u64>) -> Result<Self> {
        for &g in &generators {
            if g.gcd(&modulus) != 1 {
                return Err(Error::InvalidSubgroup(format!(
                    "{g} is not a unit mod {modulus}"
                )));
            }
        }
        let elems = closure(modulus, &generators);
        let phi = euler_phi(modulus);
        Ok(SubgroupZn {
            modulus,
            index: phi / elems.len() as u64,
            generators,
        })
    }

    /// Sorted list of elements.
    pub fn elements(&self) -> Vec<u64> {
        closure(self.modulus, &self.generators)
    }

    pub fn order(&self) -> u64 {
        euler_phi(self.modulus) / self.index
    }

    /// Membership table indexed by residue.
    pub fn membership(&self) -> Vec<bool> {
        let mut t = vec![false; self.modulus as usize];
        for e in self.elements() {
            t[e as usize] = true;
        }
        t
    }
}

fn closure(n: u64, gens: &[u64]) -> Vec<u64> {
    let mut seen = vec![false; n as usize];
    let start = 1 % n;
    seen[start as usize] = true;
    let mut out = vec![start];
    let mut i = 0;
    while i < out.len() {
        let x = out[i];
        for &g in gens {
            let y = mulmod(x, g % n, n);
            if !seen[y as usize] {
                seen[y as usize] = true;
                out.push(y);
            }
        }
        i += 1;
    }
    out.sort_unstable();
    out
}

/// All subgroups of index `ell`, each the kernel of a character
/// `x -> sum c_i log_i(x) mod ell` with the first nonzero `c_i` equal to 1.
pub fn index_ell_subgroups(g: &UnitGroupZn, ell: u64) -> Vec<SubgroupZn> {
    let active: Vec<usize> = (0..g.components.len())
        .filter(|&i| g.components[i].order % ell == 0)
        .collect();
    let t = active.len();
    if t == 0 {
        return Vec::new();
    }
    let k = g.components.len();
    let mut out = Vec::new();
    let total = ell.pow(t as u32);
    for code in 1..total {
        let mut c = vec![0u64; t];
        let mut v = code;
        for slot in c.iter_mut() {
            *slot = v % ell;
            v /= ell;
        }
        let lead = c.iter().position(|&x| x != 0).expect("nonzero code");
        if c[lead] != 1 {
            continue;
        }
        let mut gens = Vec::new();
        let unit = |i: usize, e: u64| {
            let mut v = vec![0u64; k];
            v[i] = e;
            v
        };
        for i in 0..k {
            if !active.contains(&i) {
                gens.push(g.exp(&unit(i, 1)));
            }
        }
        let j0 = active[lead];
        gens.push(g.exp(&unit(j0, ell)));
        for (slot, &i) in active.iter().enumerate() {
            if slot == lead {
                continue;
            }
            if c[slot] == 0 {
                gens.push(g.exp(&unit(i, 1)));
            } else {
                gens.push(g.exp(&unit(i, ell)));
                // e_i + (-c_i) e_j0 lies in the kernel
                let mut v = vec![0u64; k];
                v[i] = 1;
                v[j0] = (ell - c[slot]) % ell;
                gens.push(g.exp(&v));
            }
        }
        gens.retain(|&x| x != 1 % g.modulus);
        gens.sort_unstable();
        gens.dedup();
        out.push(SubgroupZn {
            modulus: g.modulus,
            generators: gens,
            index: ell,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_examples() {
        assert!(is_prime(&BigInt::from(11)));
        assert!(!is_prime(&BigInt::from(341)));
        assert!(!is_prime(&BigInt::from(1)));
        assert!(!is_prime(&BigInt::from(0)));
        assert!(is_prime_u64(18446744073709551557));
        // strong pseudoprime to bases 2..37 is still caught
        assert!(!is_prime_u64(3825123056546413051));
        let m61: BigInt = (BigInt::one() << 127u32) - 1;
        assert_eq!(primality(&m61), Primality::ProbablePrime);
    }

    #[test]
    fn factor_r5() {
        let n: BigInt = "-210736858987743".parse().unwrap();
        let f = factorize(&n).unwrap();
        assert_eq!(f.sign, -1);
        let got: Vec<(u64, u32)> = f
            .factors
            .iter()
            .map(|(p, e)| (p.to_u64().unwrap(), *e))
            .collect();
        assert_eq!(got, vec![(3, 1), (11, 9), (31, 3)]);
        assert_eq!(f.to_string(), "-3 * 11^9 * 31^3");
        assert_eq!(f.value(), n);
    }

    #[test]
    fn factor_trivia() {
        let f = factorize(&BigInt::from(-1)).unwrap();
        assert_eq!((f.sign, f.factors.len()), (-1, 0));
        assert_eq!(f.to_string(), "-1");
        assert_eq!(factor_u64(341), vec![(11, 1), (31, 1)]);
    }

    #[test]
    fn pollard_splits_large_semiprime() {
        let p = BigInt::from(1_000_000_007u64);
        let q = BigInt::from(998_244_353u64);
        let r: BigInt = "18446744073709551557".parse().unwrap();
        let n = &p * &q * &r;
        let f = factorize(&n).unwrap();
        assert_eq!(f.factors.len(), 3);
        assert_eq!(f.value(), n);
    }

    #[test]
    fn tiny_budget_times_out_with_partial() {
        let p = BigInt::from(1_000_000_007u64);
        let q = BigInt::from(998_244_353u64);
        let n = &p * &q * 8;
        match factorize_with(&n, FactorConfig { budget: 1, seed: 1 }) {
            Err(Error::FactorTimeout { partial, .. }) => {
                assert_eq!(partial.factors, vec![(BigInt::from(2), 3)]);
                assert_eq!(partial.cofactors, vec![&p * &q]);
                assert_eq!(partial.value(), n);
            }
            other => panic!("expected timeout, got {other:?}"),
        }
    }

    #[test]
    fn unit_groups() {
        assert_eq!(unit_group_structure(11).unwrap().cyclic_orders(), vec![10]);
        assert_eq!(
            unit_group_structure(341).unwrap().cyclic_orders(),
            vec![10, 30]
        );
        assert_eq!(
            unit_group_structure(15).unwrap().cyclic_orders(),
            vec![2, 4]
        );
        assert!(matches!(
            unit_group_structure(12),
            Err(Error::NotSquarefree(12))
        ));
    }

    #[test]
    fn unit_group_15_matches_orbit_enumeration() {
        // Brute force: element orders of (Z/15)^x are {1,2,2,2,4,4,4,4}, i.e. Z/2 x Z/4.
        let mut orders: Vec<u64> = (1..15u64)
            .filter(|a| a.gcd(&15) == 1)
            .map(|a| (1..=8).find(|&k| powmod(a, k, 15) == 1).unwrap())
            .collect();
        orders.sort_unstable();
        assert_eq!(orders, vec![1, 2, 2, 2, 4, 4, 4, 4]);
        let g = unit_group_structure(15).unwrap();
        let mut prod: Vec<u64> = g.cyclic_orders();
        prod.sort_unstable();
        assert_eq!(prod, vec![2, 4]);
    }

    #[test]
    fn index_five_subgroups() {
        let g341 = unit_group_structure(341).unwrap();
        let hs = index_ell_subgroups(&g341, 5);
        assert_eq!(hs.len(), 6);
        for h in &hs {
            assert_eq!(
                SubgroupZn::generated(341, h.generators.clone())
                    .unwrap()
                    .index,
                5
            );
        }
        let mut sets: Vec<Vec<u64>> = hs.iter().map(|h| h.elements()).collect();
        sets.sort();
        sets.dedup();
        assert_eq!(sets.len(), 6);
        assert_eq!(
            index_ell_subgroups(&unit_group_structure(11).unwrap(), 5).len(),
            1
        );
        assert!(index_ell_subgroups(&unit_group_structure(15).unwrap(), 5).is_empty());
    }

    #[test]
    fn crt_examples() {
        assert_eq!(crt_lift(&[(1, 11), (1, 31)]).unwrap(), (1, 341));
        let brute = (0..341u64).find(|x| x % 11 == 2 && x % 31 == 1).unwrap();
        assert_eq!(crt_lift(&[(2, 11), (1, 31)]).unwrap(), (brute, 341));
        // 280 is sometimes quoted here, but 280 = 5 mod 11.
        assert_eq!(brute, 156);
        assert_ne!(280 % 11, 2);
        assert_eq!(crt_lift(&[(0, 11)]).unwrap(), (0, 11));
    }

    #[test]
    fn generators_have_full_order() {
        for n in [11u64, 31, 341, 1247, 3683] {
            let g = unit_group_structure(n).unwrap();
            for c in &g.components {
                assert_eq!(powmod(c.generator, c.order, c.prime), 1);
                for (q, _) in factor_u64(c.order) {
                    assert_ne!(powmod(c.generator, c.order / q, c.prime), 1);
                }
            }
        }
    }
}
