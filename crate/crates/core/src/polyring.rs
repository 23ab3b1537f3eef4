//! Integer polynomial algorithms: resultants, discriminants, cyclotomic
//! polynomials, rational polynomials modulo a monic modulus, and the
//! factorization shape modulo a prime.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::poly::Poly;
use crate::{IntPoly, QPoly};

/// Gcd of the coefficients; zero for the zero polynomial.
pub fn content(f: &IntPoly) -> BigInt {
    f.coeffs().iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

/// `f / content(f)` with positive leading coefficient.
pub fn primitive_part(f: &IntPoly) -> IntPoly {
    if f.is_zero() {
        return IntPoly::zero();
    }
    let mut c = content(f);
    if f.leading().is_negative() {
        c = -c;
    }
    IntPoly::new(f.coeffs().iter().map(|a| a / &c).collect())
}

fn exact_div_scalar(f: &IntPoly, d: &BigInt) -> IntPoly {
    IntPoly::new(
        f.coeffs()
            .iter()
            .map(|a| {
                debug_assert!((a % d).is_zero(), "inexact scalar division");
                a / d
            })
            .collect(),
    )
}

/// Pseudo-remainder: `lc(b)^(deg a - deg b + 1) * a mod b`.
pub fn pseudo_rem(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let db = b.degree().expect("pseudo_rem by zero");
    let lc = b.leading();
    let mut r = a.clone();
    let mut e = match a.degree() {
        Some(da) if da >= db => da - db + 1,
        _ => return a.clone(),
    };
    while let Some(dr) = r.degree() {
        if dr < db {
            break;
        }
        let t = IntPoly::monomial(r.leading(), dr - db);
        r = &r.scale(&lc) - &(&t * b);
        e -= 1;
    }
    r.scale(&num_traits::pow(lc, e))
}

/// `Res(f, g) = lc(f)^deg(g) * prod g(alpha)` over the roots of `f`, by the
/// subresultant remainder sequence.
pub fn resultant(f: &IntPoly, g: &IntPoly) -> BigInt {
    let (Some(df), Some(dg)) = (f.degree(), g.degree()) else {
        return BigInt::zero();
    };
    if dg == 0 {
        return num_traits::pow(g.leading(), df);
    }
    if df == 0 {
        return num_traits::pow(f.leading(), dg);
    }
    let (mut a, mut b, mut sign) = if df < dg {
        (g.clone(), f.clone(), if df * dg % 2 == 1 { -1 } else { 1 })
    } else {
        (f.clone(), g.clone(), 1)
    };
    let (ca, cb) = (content(&a), content(&b));
    let t = num_traits::pow(ca.clone(), b.degree().unwrap())
        * num_traits::pow(cb.clone(), a.degree().unwrap());
    a = exact_div_scalar(&a, &ca);
    b = exact_div_scalar(&b, &cb);
    let mut gg = BigInt::one();
    let mut h = BigInt::one();
    loop {
        let (da, db) = (a.degree().unwrap(), b.degree().unwrap());
        let delta = da - db;
        if da % 2 == 1 && db % 2 == 1 {
            sign = -sign;
        }
        let r = pseudo_rem(&a, &b);
        a = b;
        let divisor = &gg * num_traits::pow(h.clone(), delta);
        b = exact_div_scalar(&r, &divisor);
        gg = a.leading();
        h = if delta == 0 {
            h
        } else {
            num_traits::pow(gg.clone(), delta) / num_traits::pow(h.clone(), delta - 1)
        };
        match b.degree() {
            None => return BigInt::zero(),
            Some(0) => break,
            Some(_) => {}
        }
    }
    let da = a.degree().unwrap();
    let hfin = if da == 0 {
        BigInt::one()
    } else {
        num_traits::pow(b.leading(), da) / num_traits::pow(h, da - 1)
    };
    BigInt::from(sign) * t * hfin
}

/// `(-1)^(d(d-1)/2) * Res(f, f') / lc(f)`.
pub fn discriminant(f: &IntPoly) -> BigInt {
    let d = f.degree().expect("discriminant of zero polynomial");
    if d == 0 {
        return BigInt::one();
    }
    let r = resultant(f, &f.derivative()) / f.leading();
    if (d * (d - 1) / 2) % 2 == 1 {
        -r
    } else {
        r
    }
}

fn cyclotomic_cache() -> &'static Mutex<HashMap<u64, IntPoly>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, IntPoly>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The `n`-th cyclotomic polynomial.
pub fn cyclotomic_poly(n: u64) -> IntPoly {
    assert!(n >= 1, "cyclotomic_poly(0)");
    if let Some(p) = cyclotomic_cache().lock().expect("poisoned").get(&n) {
        return p.clone();
    }
    let mut q = &IntPoly::monomial(BigInt::one(), n as usize) - &IntPoly::one();
    for d in 1..n {
        if n % d == 0 {
            let (quo, rem) = q.div_rem_monic(&cyclotomic_poly(d));
            debug_assert!(rem.is_zero());
            q = quo;
        }
    }
    cyclotomic_cache()
        .lock()
        .expect("poisoned")
        .insert(n, q.clone());
    q
}

/// A polynomial with rational coefficients kept as an integer numerator
/// over a positive common denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatPoly {
    num: IntPoly,
    den: BigInt,
}

impl RatPoly {
    pub fn new(num: IntPoly, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut g = content(&num).gcd(&den);
        if g.is_zero() {
            g = BigInt::one();
        }
        if den.is_negative() {
            g = -g;
        }
        if num.is_zero() {
            return RatPoly {
                num,
                den: BigInt::one(),
            };
        }
        RatPoly {
            num: exact_div_scalar(&num, &g),
            den: den / g,
        }
    }

    pub fn from_int(num: IntPoly) -> Self {
        RatPoly {
            num,
            den: BigInt::one(),
        }
    }

    pub fn from_qpoly(q: &QPoly) -> Self {
        let den = q
            .coeffs()
            .iter()
            .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let num = IntPoly::new(
            q.coeffs()
                .iter()
                .map(|c| c.numer() * (&den / c.denom()))
                .collect(),
        );
        RatPoly::new(num, den)
    }

    pub fn to_qpoly(&self) -> QPoly {
        QPoly::new(
            self.num
                .coeffs()
                .iter()
                .map(|c| num_rational::BigRational::new(c.clone(), self.den.clone()))
                .collect(),
        )
    }

    pub fn numerator(&self) -> &IntPoly {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = &self.num.scale(&other.den) + &other.num.scale(&self.den);
        RatPoly::new(n, &self.den * &other.den)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = &self.num.scale(&other.den) - &other.num.scale(&self.den);
        RatPoly::new(n, &self.den * &other.den)
    }
}

impl fmt::Debug for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / {}", self.num, self.den)
    }
}

/// `a * b mod m` for monic `m`, in canonical form.
pub fn mod_poly_mul(a: &RatPoly, b: &RatPoly, m: &IntPoly) -> RatPoly {
    let prod = (&a.num * &b.num).rem_monic(m);
    RatPoly::new(prod, &a.den * &b.den)
}

// Dense polynomials over F_p as coefficient vectors, constant term first.
type Fp = Vec<u64>;

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn powmod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

fn fp_trim(mut f: Fp) -> Fp {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

fn fp_monic(f: &Fp, p: u64) -> Fp {
    let inv = inv_mod(*f.last().expect("nonzero"), p);
    f.iter().map(|&c| mulmod(c, inv, p)).collect()
}

fn fp_sub(a: &Fp, b: &Fp, p: u64) -> Fp {
    let n = a.len().max(b.len());
    fp_trim(
        (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect(),
    )
}

fn fp_mul(a: &Fp, b: &Fp, p: u64) -> Fp {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mulmod(x, y, p)) % p;
        }
    }
    fp_trim(out)
}

fn fp_div_rem(a: &Fp, b: &Fp, p: u64) -> (Fp, Fp) {
    let db = b.len() - 1;
    if a.len() <= db {
        return (Vec::new(), a.clone());
    }
    let inv = inv_mod(b[db], p);
    let mut r = a.clone();
    let mut q = vec![0u64; a.len() - db];
    while r.len() > db {
        let top = r.pop().expect("non-empty");
        let off = r.len() - db;
        let t = mulmod(top, inv, p);
        if t != 0 {
            for (i, &bc) in b[..db].iter().enumerate() {
                r[off + i] = (r[off + i] + p - mulmod(t, bc, p)) % p;
            }
        }
        q[off] = t;
    }
    (fp_trim(q), fp_trim(r))
}

fn fp_gcd(a: &Fp, b: &Fp, p: u64) -> Fp {
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_empty() {
        let r = fp_div_rem(&x, &y, p).1;
        x = std::mem::replace(&mut y, r);
    }
    if x.is_empty() {
        x
    } else {
        fp_monic(&x, p)
    }
}

fn fp_derivative(f: &Fp, p: u64) -> Fp {
    fp_trim(
        f.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| mulmod(c, i as u64 % p, p))
            .collect(),
    )
}

fn fp_powmod(base: &Fp, mut e: u64, m: &Fp, p: u64) -> Fp {
    let mut acc: Fp = vec![1];
    let mut b = fp_div_rem(base, m, p).1;
    while e > 0 {
        if e & 1 == 1 {
            acc = fp_div_rem(&fp_mul(&acc, &b, p), m, p).1;
        }
        e >>= 1;
        if e > 0 {
            b = fp_div_rem(&fp_mul(&b, &b, p), m, p).1;
        }
    }
    acc
}

/// Squarefree decomposition over F_p of a monic polynomial.
fn fp_squarefree(f: &Fp, p: u64) -> Vec<(Fp, usize)> {
    let mut out = Vec::new();
    let df = fp_derivative(f, p);
    let mut c = fp_gcd(f, &df, p);
    let mut w = fp_div_rem(f, &c, p).0;
    let mut i = 1;
    while w.len() > 1 {
        let y = fp_gcd(&w, &c, p);
        let z = fp_div_rem(&w, &y, p).0;
        if z.len() > 1 {
            out.push((z, i));
        }
        i += 1;
        c = fp_div_rem(&c, &y, p).0;
        w = y;
    }
    if c.len() > 1 {
        // c is a p-th power: its exponents are multiples of p.
        let root: Fp = c.iter().step_by(p as usize).copied().collect();
        for (g, m) in fp_squarefree(&root, p) {
            out.push((g, m * p as usize));
        }
    }
    out
}

/// Distinct-degree factorization shape of a squarefree monic polynomial.
fn fp_ddf_degrees(f: &Fp, p: u64) -> Vec<usize> {
    let mut degs = Vec::new();
    let mut g = f.clone();
    let x: Fp = vec![0, 1];
    let mut h = x.clone();
    let mut d = 1;
    while g.len() - 1 >= 2 * d {
        h = fp_powmod(&h, p, &g, p);
        let fac = fp_gcd(&g, &fp_sub(&h, &x, p), p);
        if fac.len() > 1 {
            let k = (fac.len() - 1) / d;
            degs.extend(std::iter::repeat(d).take(k));
            g = fp_div_rem(&g, &fac, p).0;
            h = fp_div_rem(&h, &g, p).1;
        }
        d += 1;
    }
    if g.len() > 1 {
        degs.push(g.len() - 1);
    }
    degs
}

pub(crate) fn reduce_mod_p(f: &IntPoly, p: u64) -> Fp {
    let pb = BigInt::from(p);
    fp_trim(
        f.coeffs()
            .iter()
            .map(|c| c.mod_floor(&pb).to_u64().expect("residue fits"))
            .collect(),
    )
}

/// Degrees and multiplicities of the irreducible factors of `f mod p`,
/// sorted ascending. A leading coefficient divisible by `p` lowers the degree.
pub fn factor_mod_p_shape(f: &IntPoly, p: u64) -> Vec<(usize, usize)> {
    let fp = reduce_mod_p(f, p);
    if fp.len() <= 1 {
        return Vec::new();
    }
    let monic = fp_monic(&fp, p);
    let mut shape: Vec<(usize, usize)> = fp_squarefree(&monic, p)
        .into_iter()
        .flat_map(|(g, m)| fp_ddf_degrees(&g, p).into_iter().map(move |d| (d, m)))
        .collect();
    shape.sort_unstable();
    shape
}

/// Roots of `f mod p` in `0..p`, by exhaustive evaluation.
pub fn roots_mod_p(f: &IntPoly, p: u64) -> Vec<u64> {
    let fp = reduce_mod_p(f, p);
    (0..p)
        .filter(|&x| {
            fp.iter()
                .rev()
                .fold(0u64, |acc, &c| (mulmod(acc, x, p) + c) % p)
                == 0
        })
        .collect()
}

impl Serialize for Poly<BigInt> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = self.coeffs().iter().map(|c| c.to_string()).collect();
        strs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly<BigInt> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let strs: Vec<String> = Vec::deserialize(d)?;
        let coeffs = strs
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(serde::de::Error::custom))
            .collect::<Result<Vec<_>, _>>()?;
        if coeffs.last().is_some_and(|c| c.is_zero()) {
            return Err(serde::de::Error::custom("trailing zero coefficient"));
        }
        Ok(Poly::new(coeffs))
    }
}

/// Serde adapter writing a `BigInt` as a decimal string.
pub mod bigint_str {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<BigInt>` as decimal strings.
pub mod bigint_vec_str {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(cs: &[i64]) -> IntPoly {
        IntPoly::from_ints(cs)
    }

    fn x_pow_minus_one(n: usize) -> IntPoly {
        &IntPoly::monomial(BigInt::one(), n) - &IntPoly::one()
    }

    #[test]
    fn resultant_small_cases() {
        assert_eq!(resultant(&p(&[-1, 1]), &p(&[1, 1])), BigInt::from(2));
        let a = x_pow_minus_one(10);
        let b = &p(&[-1, 1]).pow(10) - &IntPoly::one();
        assert_eq!(
            resultant(&a, &b),
            "-210736858987743".parse::<BigInt>().unwrap()
        );
        let a3 = x_pow_minus_one(6);
        let b3 = &p(&[-1, 1]).pow(6) - &IntPoly::one();
        assert!(resultant(&a3, &b3).is_zero());
    }

    #[test]
    fn resultant_with_constants() {
        assert_eq!(resultant(&p(&[3]), &p(&[1, 0, 1])), BigInt::from(9));
        assert_eq!(resultant(&p(&[1, 0, 1]), &p(&[3])), BigInt::from(9));
        assert_eq!(resultant(&p(&[2]), &p(&[5])), BigInt::one());
    }

    #[test]
    fn discriminants() {
        assert_eq!(discriminant(&p(&[1, 0, 1])), BigInt::from(-4));
        assert_eq!(discriminant(&p(&[1, -6, 3, 1])), BigInt::from(729));
        assert_eq!(discriminant(&p(&[1, 3, -3, -4, 1, 1])), BigInt::from(14641));
    }

    #[test]
    fn cyclotomic_values() {
        assert_eq!(cyclotomic_poly(1), p(&[-1, 1]));
        assert_eq!(cyclotomic_poly(11), p(&[1; 11]));
        let c = cyclotomic_poly(341);
        assert_eq!(c.degree(), Some(300));
        assert!(x_pow_minus_one(341).div_rem_monic(&c).1.is_zero());
    }

    #[test]
    fn mod_mul_examples() {
        let x = RatPoly::from_int(p(&[0, 1]));
        let m = p(&[1, 0, 1]);
        assert_eq!(mod_poly_mul(&x, &x, &m), RatPoly::from_int(p(&[-1])));
        let zero = RatPoly::from_int(IntPoly::zero());
        assert!(mod_poly_mul(&zero, &x, &m).is_zero());
        let half = RatPoly::new(p(&[2, 4]), BigInt::from(4));
        assert_eq!(half.numerator(), &p(&[1, 2]));
        assert_eq!(half.denominator(), &BigInt::from(2));
    }

    #[test]
    fn factor_shapes() {
        assert_eq!(
            factor_mod_p_shape(&p(&[1, 3, -3, -4, 1, 1]), 11),
            vec![(1, 5)]
        );
        assert_eq!(factor_mod_p_shape(&p(&[1, 0, 1]), 5), vec![(1, 1), (1, 1)]);
        assert_eq!(factor_mod_p_shape(&p(&[1, 0, 1]), 3), vec![(2, 1)]);
        // (x^2 + 1)^3 (x + 1)^2 mod 3, with a p-th power part
        let f = &p(&[1, 0, 1]).pow(3) * &p(&[1, 1]).pow(2);
        assert_eq!(factor_mod_p_shape(&f, 3), vec![(1, 2), (2, 3)]);
    }

    #[test]
    fn factor_shape_matches_brute_force_roots() {
        let f = p(&[1, 3, -3, -4, 1, 1]);
        let roots = roots_mod_p(&f, 11);
        assert_eq!(roots.len(), 1);
        // f = (x - a)^5 mod 11: dividing out five times leaves a constant.
        let a = roots[0] as i64;
        let lin = p(&[-a, 1]).pow(5);
        let diff = &f - &lin;
        assert!(diff
            .coeffs()
            .iter()
            .all(|c| (c % BigInt::from(11)).is_zero()));
    }

    #[test]
    fn poly_json_roundtrip() {
        let f = p(&[1, 3, -3, -4, 1, 1]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"["1","3","-3","-4","1","1"]"#);
        let g: IntPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }
}
