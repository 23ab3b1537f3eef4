//! Real abelian fields `Q(eta)` generated by a Gaussian period
//! `eta = sum_{a in H} zeta_N^a`, with exact element arithmetic.
//!
//! The minimal polynomial and the power-basis coordinates of the conjugate
//! periods are computed exactly in `Z[x]/(x^N - 1)` when that is affordable,
//! otherwise from certified numerical periods followed by exact verification.
//! The conjugate periods `eta_{c_0}, ..., eta_{c_{m-1}}` form an integral
//! basis (the conductor is squarefree), which is what integrality and the
//! field discriminant are measured against.

mod cyclo_ring;
mod element;
mod same_field;

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::{
    crt_lift, euler_phi, factor_u64, index_ell_subgroups, primitive_root, unit_group_structure,
    SubgroupZn,
};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::polyring::{discriminant, RatPoly};
use crate::real::Ball;
use crate::scalar::int_rat;
use crate::{IntPoly, QPoly};

use cyclo_ring::CycloRing;
pub use element::FieldElement;
pub use same_field::{same_field, same_field_with_budget, SameField};

pub const DEFAULT_PRECISION: u32 = 512;
pub const MAX_PRECISION: u32 = 8192;

/// Above this many `i128` operations the exact period expansion is skipped
/// in favour of certified numerics.
const EXACT_WORK_LIMIT: u128 = 3_000_000_000;

/// A cyclic real field of degree `m` and squarefree conductor `N`.
#[derive(Clone)]
pub struct CyclicField {
    degree: usize,
    conductor: u64,
    subgroup: SubgroupZn,
    minpoly: IntPoly,
    coset_reps: Vec<u64>,
    galois_images: Vec<RatPoly>,
    /// Column `i` holds the power-basis coordinates of `eta_{c_i}`.
    period_matrix: Matrix<BigRational>,
    period_matrix_inv: Matrix<BigRational>,
    index: BigInt,
    discriminant: BigInt,
    h_elements: Arc<Vec<u64>>,
    id: u64,
    hash: String,
    periods_cache: Arc<Mutex<BTreeMap<u32, Arc<Vec<Ball>>>>>,
}

impl std::fmt::Debug for CyclicField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CyclicField")
            .field("degree", &self.degree)
            .field("conductor", &self.conductor)
            .field("subgroup", &self.subgroup.generators)
            .field("minpoly", &self.minpoly.to_string())
            .finish()
    }
}

impl PartialEq for CyclicField {
    fn eq(&self, other: &Self) -> bool {
        self.hash == other.hash
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatPolyJson {
    pub numerator: IntPoly,
    #[serde(with = "crate::polyring::bigint_str")]
    pub denominator: BigInt,
}

/// On-disk form of a field; key order is fixed so files are reproducible.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldFile {
    pub degree: usize,
    pub conductor: u64,
    pub subgroup_generators: Vec<u64>,
    pub minpoly: IntPoly,
    pub coset_reps: Vec<u64>,
    pub galois_images: Vec<RatPolyJson>,
}

/// True when some kernel `{a = 1 mod N/p}` lies inside `H`, i.e. the fixed
/// field has conductor strictly dividing `N`.
fn conductor_defect(n: u64, members: &[bool]) -> Option<u64> {
    for (p, _) in factor_u64(n) {
        let k = kernel_generator(n, p);
        if members[k as usize] {
            return Some(n / p);
        }
    }
    None
}

/// Generator of `ker((Z/N)^x -> (Z/(N/p))^x)`.
fn kernel_generator(n: u64, p: u64) -> u64 {
    if n == p {
        return primitive_root(p);
    }
    crt_lift(&[(1, n / p), (primitive_root(p), p)])
        .expect("coprime moduli")
        .0
}

/// `prod_{p | N} p^(m - |G| / |H K_p|)`: the conductor-discriminant formula.
pub fn conductor_discriminant(h: &SubgroupZn) -> Result<BigInt> {
    let n = h.modulus;
    let phi = euler_phi(n);
    let m = h.index;
    let mut out = BigInt::one();
    for (p, _) in factor_u64(n) {
        let mut gens = h.generators.clone();
        gens.push(kernel_generator(n, p));
        let hk = SubgroupZn::generated(n, gens)?;
        let residue_count = phi / hk.order();
        out *= num_traits::pow(BigInt::from(p), (m - residue_count) as usize);
    }
    Ok(out)
}

/// Smallest residue whose class generates `(Z/N)^x / H` (order exactly `m`).
fn quotient_generator(n: u64, m: u64, members: &[bool]) -> Result<u64> {
    for a in 2..n {
        if a.gcd(&n) != 1 || members[a as usize] {
            continue;
        }
        let mut x = a;
        let mut k = 1;
        while !members[x as usize] {
            x = (x as u128 * a as u128 % n as u128) as u64;
            k += 1;
        }
        if k == m {
            return Ok(a);
        }
    }
    if m == 1 {
        return Ok(1);
    }
    Err(Error::InvalidSubgroup(format!(
        "(Z/{n}Z)^x / H is not cyclic of order {m}"
    )))
}

fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    (a as u128 * b as u128 % n as u128) as u64
}

/// Sum of `cos(2 pi a / N)` over a coset closed under negation.
fn period_ball(coset: &[u64], n: u64, prec: u32) -> Ball {
    coset
        .par_iter()
        .filter(|&&a| 2 * a < n)
        .map(|&a| Ball::cos_sin_2pi(a as i64, n, prec).0)
        .reduce(Ball::zero, |x, y| &x + &y)
        .pipe(|s| &s * &Ball::exact_int(2))
}

trait Pipe: Sized {
    fn pipe<R>(self, f: impl FnOnce(Self) -> R) -> R {
        f(self)
    }
}
impl<T> Pipe for T {}

/// Expand `prod (X - r_i)` over balls; coefficients constant term first.
fn expand_roots(roots: &[Ball]) -> Vec<Ball> {
    let mut c = vec![Ball::one()];
    for r in roots {
        let mut next = vec![Ball::zero(); c.len() + 1];
        for (j, cj) in c.iter().enumerate() {
            next[j + 1] = &next[j + 1] + cj;
            next[j] = &next[j] - &(cj * r);
        }
        c = next;
    }
    c
}

struct Construction {
    minpoly: IntPoly,
    images: Vec<RatPoly>,
}

fn cosets_of(h_elems: &[u64], reps: &[u64], n: u64) -> Vec<Vec<u64>> {
    reps.iter()
        .map(|&c| {
            let mut v: Vec<u64> = h_elems.iter().map(|&a| mul_mod(a, c, n)).collect();
            v.sort_unstable();
            v
        })
        .collect()
}

/// Exact expansion in `Z[x]/(x^N - 1)`; `None` on `i128` overflow.
fn exact_construction(n: u64, cosets: &[Vec<u64>]) -> Option<Result<Construction>> {
    let m = cosets.len();
    let ring = CycloRing::new(n)?;
    let periods: Vec<Vec<i128>> = cosets.iter().map(|c| ring.indicator(c)).collect();
    let sparse: Vec<_> = periods.iter().map(|p| CycloRing::sparse(p)).collect();

    let mut coeffs: Vec<Vec<i128>> = vec![ring.one()];
    for s in &sparse {
        let mut next = vec![vec![0i128; ring.n]; coeffs.len() + 1];
        for (j, cj) in coeffs.iter().enumerate() {
            next[j + 1] = cj.clone();
        }
        for (j, cj) in coeffs.iter().enumerate() {
            let t = ring.mul_sparse(cj, s)?;
            next[j] = ring.sub(&next[j], &t)?;
        }
        coeffs = next;
    }
    let mut minpoly = Vec::with_capacity(m + 1);
    for (j, c) in coeffs.iter().enumerate() {
        let r = ring.reduce(c)?;
        if r[1..].iter().any(|&v| v != 0) {
            return Some(Err(Error::NonConstantSymmetricFunction(m - j)));
        }
        minpoly.push(BigInt::from(r[0]));
    }
    let minpoly = IntPoly::new(minpoly);

    // powers of eta = eta_{c_0}, reduced mod Phi_N
    let mut powers = vec![ring.one()];
    for _ in 1..m {
        let next = ring.mul_sparse(powers.last().expect("nonempty"), &sparse[0])?;
        powers.push(next);
    }
    let cols: Vec<Vec<i128>> = powers
        .iter()
        .map(|p| ring.reduce(p))
        .collect::<Option<_>>()?;
    let targets: Vec<Vec<i128>> = periods
        .iter()
        .map(|p| ring.reduce(p))
        .collect::<Option<_>>()?;
    Some(solve_power_coords(&cols, &targets).map(|images| Construction { minpoly, images }))
}

/// Express each target in the span of `cols` (vectors in `Z^phi(N)`).
fn solve_power_coords(cols: &[Vec<i128>], targets: &[Vec<i128>]) -> Result<Vec<RatPoly>> {
    let m = cols.len();
    let rows = cols[0].len();
    let entry = |r: usize, j: usize| int_rat(cols[j][r]);
    // greedy choice of m independent rows
    let mut echelon: Vec<(usize, Vec<BigRational>)> = Vec::new();
    let mut chosen = Vec::new();
    for r in 0..rows {
        let mut v: Vec<BigRational> = (0..m).map(|j| entry(r, j)).collect();
        for (piv, e) in &echelon {
            if !v[*piv].is_zero() {
                let f = v[*piv].clone();
                for (x, y) in v.iter_mut().zip(e) {
                    *x -= &f * y;
                }
            }
        }
        if let Some(piv) = v.iter().position(|x| !x.is_zero()) {
            let lead = v[piv].clone();
            let e: Vec<BigRational> = v.iter().map(|x| x / &lead).collect();
            echelon.push((piv, e));
            chosen.push(r);
            if chosen.len() == m {
                break;
            }
        }
    }
    if chosen.len() < m {
        return Err(Error::FieldInvariant(
            "powers of eta are linearly dependent".into(),
        ));
    }
    let a: Matrix<BigRational> = chosen
        .iter()
        .map(|&r| (0..m).map(|j| entry(r, j)).collect())
        .collect();
    let inv = linalg::inverse(&a).expect("selected rows are independent");
    let mut images = Vec::with_capacity(targets.len());
    for t in targets {
        let rhs: Vec<BigRational> = chosen.iter().map(|&r| int_rat(t[r])).collect();
        let x = linalg::mat_vec(&inv, &rhs);
        for r in 0..rows {
            let lhs: BigRational = (0..m).map(|j| entry(r, j) * &x[j]).sum();
            if lhs != int_rat(t[r]) {
                return Err(Error::FieldInvariant(
                    "conjugate period is not in Q(eta)".into(),
                ));
            }
        }
        images.push(RatPoly::from_qpoly(&QPoly::new(x)));
    }
    Ok(images)
}

/// Certified numerical construction followed by exact verification.
fn numeric_construction(
    h: &SubgroupZn,
    n: u64,
    cosets: &[Vec<u64>],
    start_prec: u32,
) -> Result<Construction> {
    let m = cosets.len();
    let expected_disc = conductor_discriminant(h)?;
    let mut prec = start_prec;
    loop {
        let periods: Vec<Ball> = cosets.iter().map(|c| period_ball(c, n, prec)).collect();
        match numeric_attempt(&periods, m, &expected_disc, prec)? {
            Some(c) => return Ok(c),
            None if prec < MAX_PRECISION => prec *= 2,
            None => {
                return Err(Error::PrecisionExhausted {
                    bits: prec,
                    context: "rounding period minimal polynomial".into(),
                })
            }
        }
    }
}

fn numeric_attempt(
    periods: &[Ball],
    m: usize,
    expected_disc: &BigInt,
    prec: u32,
) -> Result<Option<Construction>> {
    let coeffs = expand_roots(periods);
    let mut minpoly = Vec::with_capacity(m + 1);
    for c in &coeffs {
        match c.unique_integer() {
            Some(v) => minpoly.push(v),
            None => return Ok(None),
        }
    }
    let minpoly = IntPoly::new(minpoly);
    let disc = discriminant(&minpoly);
    let (q, r) = disc.div_rem(expected_disc);
    if !r.is_zero() || q.is_negative() {
        return Err(Error::FieldInvariant(format!(
            "disc(minpoly) = {disc} is not a square multiple of {expected_disc}"
        )));
    }
    let index = q.sqrt();
    if &index * &index != q {
        return Err(Error::FieldInvariant(format!(
            "disc(minpoly) / disc(F) = {q} is not a square"
        )));
    }
    let vander: Matrix<Ball> = periods
        .iter()
        .map(|e| (0..m).map(|j| e.pow_u(j as u64)).collect())
        .collect();
    let Some(vinv) = linalg::inverse(&vander) else {
        return Ok(None);
    };
    let idx_ball = Ball::exact_int(index.clone());
    let mut images = vec![RatPoly::from_int(IntPoly::x())];
    for i in 1..m {
        let target: Vec<Ball> = (0..m).map(|k| periods[(k + i) % m].clone()).collect();
        let x = linalg::mat_vec(&vinv, &target);
        let mut num = Vec::with_capacity(m);
        for xi in &x {
            match (xi * &idx_ball).unique_integer() {
                Some(v) => num.push(v),
                None => return Ok(None),
            }
        }
        images.push(RatPoly::new(IntPoly::new(num), index.clone()));
    }
    let _ = prec;
    Ok(Some(Construction { minpoly, images }))
}

impl CyclicField {
    /// The fixed field of `H`, of degree `[G : H]`.
    pub fn from_subgroup(h: &SubgroupZn) -> Result<Self> {
        let n = h.modulus;
        if n % 2 == 0 || !crate::sieve::is_squarefree(n) {
            return Err(Error::NotSquarefree(n));
        }
        let members = h.membership();
        if !members[(n - 1) as usize] {
            return Err(Error::NotTotallyReal);
        }
        if let Some(d) = conductor_defect(n, &members) {
            return Err(Error::ConductorNotExact {
                conductor: n,
                divisor: d,
            });
        }
        let m = h.index;
        let g = quotient_generator(n, m, &members)?;
        let mut reps = vec![1u64];
        for _ in 1..m {
            reps.push(mul_mod(*reps.last().expect("nonempty"), g, n));
        }
        let h_elems = h.elements();
        let cosets = cosets_of(&h_elems, &reps, n);
        let work = (n as u128) * (h_elems.len() as u128) * (m as u128) * (m as u128);
        let built = if work <= EXACT_WORK_LIMIT {
            match exact_construction(n, &cosets) {
                Some(r) => r?,
                None => numeric_construction(h, n, &cosets, 256)?,
            }
        } else {
            numeric_construction(h, n, &cosets, 256)?
        };
        Self::assemble(
            h.clone(),
            built.minpoly,
            reps,
            built.images,
            Arc::new(h_elems),
        )
    }

    fn assemble(
        subgroup: SubgroupZn,
        minpoly: IntPoly,
        coset_reps: Vec<u64>,
        galois_images: Vec<RatPoly>,
        h_elements: Arc<Vec<u64>>,
    ) -> Result<Self> {
        let m = subgroup.index as usize;
        let invariant = |msg: String| Err(Error::FieldInvariant(msg));
        if minpoly.degree() != Some(m) || !minpoly.is_monic() {
            return invariant(format!("minpoly {minpoly} is not monic of degree {m}"));
        }
        if galois_images.len() != m || coset_reps.len() != m {
            return invariant("need one Galois image per coset".into());
        }
        if galois_images[0] != RatPoly::from_int(IntPoly::x()) {
            return invariant("first Galois image must be eta itself".into());
        }
        let fq = minpoly.map(|c| int_rat(c.clone()));
        let images_q: Vec<QPoly> = galois_images.iter().map(|g| g.to_qpoly()).collect();
        if m > 1 {
            if !fq.compose(&images_q[1], Some(&fq)).is_zero() {
                return invariant("sigma(eta) is not a root of the minimal polynomial".into());
            }
            for i in 2..=m {
                let next = images_q[i - 1].compose(&images_q[1], Some(&fq));
                let expected = if i == m { &images_q[0] } else { &images_q[i] };
                if &next != expected {
                    return invariant(format!("Galois image {i} is not sigma^{i}(eta)"));
                }
            }
        }
        let period_matrix: Matrix<BigRational> = (0..m)
            .map(|j| images_q.iter().map(|g| g.coeff(j)).collect())
            .collect();
        let det = linalg::det(&period_matrix).expect("exact determinant");
        if det.is_zero() {
            return invariant("conjugate periods are linearly dependent".into());
        }
        let inv_det = det.abs().recip();
        if !inv_det.is_integer() {
            return invariant(format!("[O_F : Z[eta]] = {inv_det} is not an integer"));
        }
        let index = inv_det.to_integer();
        let disc = discriminant(&minpoly);
        let index_sq = &index * &index;
        if !(&disc % &index_sq).is_zero() {
            return invariant("index^2 does not divide disc(minpoly)".into());
        }
        let discriminant = &disc / &index_sq;
        let expected = conductor_discriminant(&subgroup)?;
        if discriminant != expected {
            return invariant(format!(
                "field discriminant {discriminant} differs from conductor-discriminant value {expected}"
            ));
        }
        let period_matrix_inv = linalg::inverse(&period_matrix).expect("nonsingular");
        let file = FieldFile {
            degree: m,
            conductor: subgroup.modulus,
            subgroup_generators: subgroup.generators.clone(),
            minpoly: minpoly.clone(),
            coset_reps: coset_reps.clone(),
            galois_images: galois_images
                .iter()
                .map(|g| RatPolyJson {
                    numerator: g.numerator().clone(),
                    denominator: g.denominator().clone(),
                })
                .collect(),
        };
        let json = serde_json::to_vec(&file)?;
        let digest = Sha256::digest(&json);
        let hash = hex::encode(digest);
        let id = u64::from_be_bytes(digest[..8].try_into().expect("8 bytes"));
        Ok(CyclicField {
            degree: m,
            conductor: subgroup.modulus,
            subgroup,
            minpoly,
            coset_reps,
            galois_images,
            period_matrix,
            period_matrix_inv,
            index,
            discriminant,
            h_elements,
            id,
            hash,
            periods_cache: Arc::new(Mutex::new(BTreeMap::new())),
        })
    }

    pub fn to_file(&self) -> FieldFile {
        FieldFile {
            degree: self.degree,
            conductor: self.conductor,
            subgroup_generators: self.subgroup.generators.clone(),
            minpoly: self.minpoly.clone(),
            coset_reps: self.coset_reps.clone(),
            galois_images: self
                .galois_images
                .iter()
                .map(|g| RatPolyJson {
                    numerator: g.numerator().clone(),
                    denominator: g.denominator().clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("field serializes")
    }

    /// Rebuild from a file, re-checking every structural invariant.
    pub fn from_file(file: &FieldFile) -> Result<Self> {
        let h = SubgroupZn::generated(file.conductor, file.subgroup_generators.clone())?;
        if h.index as usize != file.degree {
            return Err(Error::FieldInvariant(format!(
                "subgroup has index {} but degree is {}",
                h.index, file.degree
            )));
        }
        let members = h.membership();
        if !members[(file.conductor - 1) as usize] {
            return Err(Error::NotTotallyReal);
        }
        if let Some(d) = conductor_defect(file.conductor, &members) {
            return Err(Error::ConductorNotExact {
                conductor: file.conductor,
                divisor: d,
            });
        }
        let g = quotient_generator(file.conductor, h.index, &members)?;
        let mut reps = vec![1u64];
        for _ in 1..file.degree {
            reps.push(mul_mod(*reps.last().expect("nonempty"), g, file.conductor));
        }
        if reps != file.coset_reps {
            return Err(Error::FieldInvariant(
                "coset representatives are not canonical".into(),
            ));
        }
        let images = file
            .galois_images
            .iter()
            .map(|g| RatPoly::new(g.numerator.clone(), g.denominator.clone()))
            .collect();
        let h_elems = h.elements();
        let f = Self::assemble(h, file.minpoly.clone(), reps, images, Arc::new(h_elems))?;
        f.check_minpoly_numerically(128)?;
        Ok(f)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: FieldFile = serde_json::from_str(s)?;
        Self::from_file(&file)
    }

    /// The minimal polynomial's coefficients agree with the numerical
    /// elementary symmetric functions of the periods.
    fn check_minpoly_numerically(&self, prec: u32) -> Result<()> {
        let periods = self.periods(prec);
        let coeffs = expand_roots(&periods);
        for (j, c) in coeffs.iter().enumerate() {
            let diff = c - &Ball::exact_int(self.minpoly.coeff(j));
            if !diff.contains_zero() {
                return Err(Error::FieldInvariant(format!(
                    "coefficient {j} of the minimal polynomial disagrees with the periods"
                )));
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn subgroup(&self) -> &SubgroupZn {
        &self.subgroup
    }

    pub fn minpoly(&self) -> &IntPoly {
        &self.minpoly
    }

    pub fn coset_reps(&self) -> &[u64] {
        &self.coset_reps
    }

    pub fn galois_images(&self) -> &[RatPoly] {
        &self.galois_images
    }

    /// `[O_F : Z[eta]]`.
    pub fn index(&self) -> &BigInt {
        &self.index
    }

    /// The field discriminant `disc(minpoly) / index^2`.
    pub fn discriminant(&self) -> &BigInt {
        &self.discriminant
    }

    pub fn ramified_primes(&self) -> Vec<u64> {
        factor_u64(self.conductor)
            .into_iter()
            .map(|(p, _)| p)
            .collect()
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    /// `mu(N) = sum of all conjugate periods`.
    pub fn period_trace(&self) -> i64 {
        let k = factor_u64(self.conductor).len();
        if k % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Real values of `eta_{c_0}, ..., eta_{c_{m-1}}`.
    pub fn periods(&self, prec: u32) -> Arc<Vec<Ball>> {
        if let Some(v) = self
            .periods_cache
            .lock()
            .expect("poisoned")
            .range(prec..)
            .next()
        {
            return v.1.clone();
        }
        let cosets = cosets_of(&self.h_elements, &self.coset_reps, self.conductor);
        let vals: Vec<Ball> = cosets
            .iter()
            .map(|c| period_ball(c, self.conductor, prec))
            .collect();
        let vals = Arc::new(vals);
        self.periods_cache
            .lock()
            .expect("poisoned")
            .insert(prec, vals.clone());
        vals
    }

    pub fn periods_f64(&self) -> Vec<f64> {
        self.periods(128).iter().map(|b| b.to_f64()).collect()
    }

    /// Largest radius (as log2) of `e_k(periods) - minpoly coefficient`.
    pub fn period_cross_check(&self, prec: u32) -> f64 {
        let periods = self.periods(prec);
        let coeffs = expand_roots(&periods);
        coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let d = c - &Ball::exact_int(self.minpoly.coeff(j));
                let mag = d.abs();
                let hi = mag.upper();
                if hi.is_zero() {
                    f64::NEG_INFINITY
                } else {
                    hi.numer().bits() as f64 - hi.denom().bits() as f64 + 1.0
                }
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn period_matrix(&self) -> &Matrix<BigRational> {
        &self.period_matrix
    }

    pub(crate) fn period_matrix_inv(&self) -> &Matrix<BigRational> {
        &self.period_matrix_inv
    }

    /// Short label such as `F_341[2,5]` (conductor and subgroup generators).
    pub fn label(&self) -> String {
        let gens: Vec<String> = self
            .subgroup
            .generators
            .iter()
            .map(|g| g.to_string())
            .collect();
        format!("F_{}[{}]", self.conductor, gens.join(","))
    }
}

/// The exact minimal polynomial of the period of `H`.
pub fn period_minimal_polynomial(h: &SubgroupZn) -> Result<IntPoly> {
    Ok(CyclicField::from_subgroup(h)?.minpoly)
}

/// Every degree-`ell` field of exact conductor `n`, one per index-`ell` subgroup.
pub fn subfields_of_conductor(ell: u64, n: u64) -> Result<Vec<CyclicField>> {
    let g = unit_group_structure(n)?;
    let mut out = Vec::new();
    for h in index_ell_subgroups(&g, ell) {
        let members = h.membership();
        if conductor_defect(n, &members).is_some() {
            continue;
        }
        out.push(CyclicField::from_subgroup(&h)?);
    }
    Ok(out)
}

/// `Q(zeta_p)^+` as the fixed field of `{+-1}`.
pub fn real_cyclotomic_field(p: u64) -> Result<CyclicField> {
    if !crate::arith::is_prime_u64(p) || p < 5 {
        return Err(Error::NotPrime(BigInt::from(p)));
    }
    let h = SubgroupZn::generated(p, vec![p - 1])?;
    CyclicField::from_subgroup(&h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::factor_mod_p_shape;

    fn f11() -> CyclicField {
        subfields_of_conductor(5, 11).unwrap().remove(0)
    }

    #[test]
    fn f11_minpoly() {
        let f = f11();
        assert_eq!(f.minpoly(), &IntPoly::from_ints(&[1, 3, -3, -4, 1, 1]));
        assert_eq!(f.index(), &BigInt::one());
        assert_eq!(f.discriminant(), &BigInt::from(14641));
    }

    #[test]
    fn quadratic_period() {
        let h = SubgroupZn::generated(5, vec![4]).unwrap();
        let f = CyclicField::from_subgroup(&h).unwrap();
        assert_eq!(f.minpoly(), &IntPoly::from_ints(&[-1, 1, 1]));
    }

    #[test]
    fn field_counts_by_conductor() {
        assert_eq!(subfields_of_conductor(5, 11).unwrap().len(), 1);
        assert_eq!(subfields_of_conductor(5, 31).unwrap().len(), 1);
        assert_eq!(subfields_of_conductor(5, 341).unwrap().len(), 4);
    }

    #[test]
    fn conductor_defect_is_rejected() {
        // H = kernel of reduction to mod 11 together with the index-5 part
        let g = unit_group_structure(341).unwrap();
        let hs = index_ell_subgroups(&g, 5);
        let bad = hs
            .iter()
            .find(|h| conductor_defect(341, &h.membership()).is_some())
            .unwrap();
        assert!(matches!(
            CyclicField::from_subgroup(bad),
            Err(Error::ConductorNotExact { conductor: 341, .. })
        ));
    }

    #[test]
    fn ramified_primes_are_totally_ramified() {
        for n in [11u64, 31, 341] {
            for f in subfields_of_conductor(5, n).unwrap() {
                for p in f.ramified_primes() {
                    assert_eq!(factor_mod_p_shape(f.minpoly(), p), vec![(1, 5)]);
                }
                let expected = num_traits::pow(BigInt::from(n), 4);
                assert_eq!(f.discriminant(), &expected);
            }
        }
    }

    #[test]
    fn numeric_and_exact_constructions_agree() {
        for f in subfields_of_conductor(5, 341).unwrap() {
            let cosets = cosets_of(&f.h_elements, &f.coset_reps, 341);
            let num = numeric_construction(&f.subgroup, 341, &cosets, 256).unwrap();
            assert_eq!(&num.minpoly, f.minpoly());
            assert_eq!(num.images, f.galois_images);
        }
    }

    #[test]
    fn json_roundtrip_is_byte_stable() {
        for f in subfields_of_conductor(5, 341).unwrap() {
            let s = f.to_json();
            let g = CyclicField::from_json(&s).unwrap();
            assert_eq!(g.to_json(), s);
            assert_eq!(g.hash(), f.hash());
        }
    }

    #[test]
    fn tampered_file_is_rejected() {
        let f = f11();
        let mut file = f.to_file();
        file.minpoly = IntPoly::from_ints(&[1, 3, -3, -4, 2, 1]);
        assert!(CyclicField::from_file(&file).is_err());
    }

    #[test]
    fn cross_check_within_tolerance() {
        let f = f11();
        assert!(f.period_cross_check(512) < -200.0);
    }
}
