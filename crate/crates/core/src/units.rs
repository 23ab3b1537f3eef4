//! Cyclotomic units, logarithmic embeddings, regulators and saturation.
//!
//! Units are found numerically (their conjugates are products of sines),
//! rounded to coordinates in the integral period basis, and then verified
//! exactly. Nothing numerical survives into a [`UnitSystem`] without an
//! exact norm check.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{factor_u64, is_prime_u64, pow_mod, primitive_root};
use crate::cyclofield::{CyclicField, FieldElement, MAX_PRECISION};
use crate::error::{Error, Result};
use crate::lattice::{default_delta, lll_reduce, IntLattice};
use crate::linalg::{self, Matrix};
use crate::polyring::{discriminant, roots_mod_p};
use crate::real::Ball;

pub const DEFAULT_SATURATION_PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];
pub const DEFAULT_UNIT_PRECISION: u32 = 512;

/// How far a unit system is trusted to generate the full unit group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssertedMode {
    Cyclotomic,
    UserFundamental,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaturationRecord {
    pub prime: u64,
    /// `"saturated at p"` after at least one descent, else `"no descent at p"`.
    pub outcome: String,
    pub descents: u32,
}

/// `r = m - 1` independent units of norm `+-1` with certified log data.
#[derive(Clone, Debug)]
pub struct UnitSystem {
    field_hash: String,
    generators: Vec<FieldElement>,
    log_matrix: Vec<Vec<Ball>>,
    regulator: Ball,
    precision: u32,
    saturation_log: Vec<SaturationRecord>,
    mode: AssertedMode,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitFile {
    pub field_hash: String,
    pub asserted_mode: AssertedMode,
    /// Integer coordinates in the period basis `eta_{c_0}, ..., eta_{c_{m-1}}`.
    pub generators: Vec<Vec<String>>,
    #[serde(default)]
    pub saturation_log: Vec<SaturationRecord>,
}

/// `(log|sigma_0(u)|, ..., log|sigma_{m-1}(u)|)`.
pub fn log_embedding(f: &CyclicField, u: &FieldElement, prec: u32) -> Result<Vec<Ball>> {
    if u.is_zero() {
        return Err(Error::DivisionByZero);
    }
    f.embed(u, prec)?
        .into_iter()
        .map(|x| {
            x.abs().ln(prec).ok_or_else(|| Error::PrecisionExhausted {
                bits: prec,
                context: "conjugate not separated from zero".into(),
            })
        })
        .collect()
}

/// `|det|` of the log matrix with the last embedding dropped.
pub fn regulator_of(logs: &[Vec<Ball>], prec: u32) -> Result<Ball> {
    let r = logs.len();
    let minor: Matrix<Ball> = logs.iter().map(|row| row[..r].to_vec()).collect();
    let exhausted = || Error::PrecisionExhausted {
        bits: prec,
        context: "regulator not separated from zero".into(),
    };
    let d = if r == 0 {
        Ball::exact_int(1)
    } else {
        linalg::det(&minor).ok_or_else(exhausted)?
    };
    if d.contains_zero() {
        return Err(exhausted());
    }
    Ok(d.abs())
}

pub fn subgroup_regulator(u: &UnitSystem) -> Result<Ball> {
    regulator_of(&u.log_matrix, u.precision)
}

fn f64_regulator(logs: &[Vec<f64>]) -> f64 {
    let r = logs.len();
    let minor: Matrix<f64> = logs.iter().map(|row| row[..r].to_vec()).collect();
    linalg::det(&minor).map(f64::abs).unwrap_or(0.0)
}

impl UnitSystem {
    /// Validates that each generator is a unit and that they are independent.
    pub fn from_generators(
        f: &CyclicField,
        generators: Vec<FieldElement>,
        mode: AssertedMode,
    ) -> Result<Self> {
        let needed = f.degree() - 1;
        for g in &generators {
            if !f.is_unit(g)? {
                return Err(Error::InvalidInput("generator is not a unit".into()));
            }
        }
        if generators.len() != needed {
            return Err(Error::RankDeficient {
                found: generators.len(),
                needed,
            });
        }
        let mut prec = DEFAULT_UNIT_PRECISION;
        loop {
            let attempt = (|| -> Result<(Vec<Vec<Ball>>, Ball)> {
                let logs: Vec<Vec<Ball>> = generators
                    .par_iter()
                    .map(|g| log_embedding(f, g, prec))
                    .collect::<Result<_>>()?;
                let lf: Vec<Vec<f64>> = logs
                    .iter()
                    .map(|r| r.iter().map(|b| b.to_f64()).collect())
                    .collect();
                if f64_regulator(&lf) < 1e-12 {
                    return Err(Error::RankDeficient {
                        found: needed.saturating_sub(1),
                        needed,
                    });
                }
                let reg = regulator_of(&logs, prec)?;
                Ok((logs, reg))
            })();
            match attempt {
                Ok((log_matrix, regulator)) => {
                    return Ok(UnitSystem {
                        field_hash: f.hash().to_string(),
                        generators,
                        log_matrix,
                        regulator,
                        precision: prec,
                        saturation_log: Vec::new(),
                        mode,
                    })
                }
                Err(Error::PrecisionExhausted { .. }) if prec < MAX_PRECISION => prec *= 2,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn generators(&self) -> &[FieldElement] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn log_matrix(&self) -> &[Vec<Ball>] {
        &self.log_matrix
    }

    pub fn log_matrix_f64(&self) -> Vec<Vec<f64>> {
        self.log_matrix
            .iter()
            .map(|r| r.iter().map(|b| b.to_f64()).collect())
            .collect()
    }

    pub fn regulator(&self) -> &Ball {
        &self.regulator
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn saturation_log(&self) -> &[SaturationRecord] {
        &self.saturation_log
    }

    pub fn mode(&self) -> AssertedMode {
        self.mode
    }

    pub fn field_hash(&self) -> &str {
        &self.field_hash
    }

    fn check_field(&self, f: &CyclicField) -> Result<()> {
        if self.field_hash != f.hash() {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    pub fn to_file(&self, f: &CyclicField) -> Result<UnitFile> {
        self.check_field(f)?;
        let generators = self
            .generators
            .iter()
            .map(|g| {
                let (y, _) = f.period_coords(g)?;
                Ok(y.iter().map(|c| c.to_string()).collect())
            })
            .collect::<Result<_>>()?;
        Ok(UnitFile {
            field_hash: self.field_hash.clone(),
            asserted_mode: self.mode,
            generators,
            saturation_log: self.saturation_log.clone(),
        })
    }

    pub fn from_file(f: &CyclicField, file: &UnitFile) -> Result<Self> {
        if file.field_hash != f.hash() {
            return Err(Error::FieldMismatch);
        }
        let gens = file
            .generators
            .iter()
            .map(|row| {
                let y = row
                    .iter()
                    .map(|s| {
                        s.parse::<BigInt>()
                            .map_err(|e| Error::InvalidInput(format!("bad coordinate {s}: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                f.from_period_coords(&y)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut u = Self::from_generators(f, gens, file.asserted_mode)?;
        u.saturation_log = file.saturation_log.clone();
        Ok(u)
    }

    /// Writes `u = sign * prod g_i^(a_i)` if `u` lies in the generated group.
    pub fn express(&self, f: &CyclicField, u: &FieldElement) -> Result<Option<(i8, Vec<BigInt>)>> {
        self.check_field(f)?;
        if !f.is_unit(u)? {
            return Ok(None);
        }
        let r = self.rank();
        let mut prec = self.precision;
        loop {
            let logs: Vec<Vec<Ball>> = if prec == self.precision {
                self.log_matrix.clone()
            } else {
                self.generators
                    .iter()
                    .map(|g| log_embedding(f, g, prec))
                    .collect::<Result<_>>()?
            };
            let lu = log_embedding(f, u, prec)?;
            // a^T L = l(u) on the first r embeddings
            let mt: Matrix<Ball> = (0..r)
                .map(|k| (0..r).map(|i| logs[i][k].clone()).collect())
                .collect();
            let rhs: Vec<Ball> = lu[..r].to_vec();
            let sol = linalg::solve(&mt, &rhs);
            let rounded: Option<Vec<BigInt>> =
                sol.and_then(|s| s.iter().map(|x| x.unique_integer()).collect());
            match rounded {
                Some(a) => {
                    let prod = product(f, &self.generators, &a)?;
                    if &prod == u {
                        return Ok(Some((1, a)));
                    }
                    if f.neg(&prod)? == *u {
                        return Ok(Some((-1, a)));
                    }
                    return Ok(None);
                }
                None if prec < MAX_PRECISION => prec *= 2,
                None => return Ok(None),
            }
        }
    }
}

/// `prod g_i^(a_i)` exactly.
pub fn product(f: &CyclicField, gens: &[FieldElement], a: &[BigInt]) -> Result<FieldElement> {
    let mut acc = f.one();
    for (g, e) in gens.iter().zip(a) {
        if e.is_zero() {
            continue;
        }
        let e = e
            .to_i64()
            .ok_or_else(|| Error::InvalidInput("exponent exceeds 64 bits".into()))?;
        acc = f.mul(&acc, &f.pow(g, e)?)?;
    }
    Ok(acc)
}

/// The element whose conjugates enclose `vals`, if its period coordinates
/// round to unique integers.
fn element_from_conjugates(
    f: &CyclicField,
    pinv: &Matrix<Ball>,
    vals: &[Ball],
) -> Result<Option<FieldElement>> {
    let y = linalg::mat_vec(pinv, vals);
    let Some(y) = y
        .iter()
        .map(|b| b.unique_integer())
        .collect::<Option<Vec<_>>>()
    else {
        return Ok(None);
    };
    Ok(Some(f.from_period_coords(&y)?))
}

/// Inverse of `Pi[k][i] = eta_{c_{(i+k) mod m}}`, mapping conjugate vectors
/// to period coordinates.
fn conjugate_to_period_map(f: &CyclicField, prec: u32) -> Option<Matrix<Ball>> {
    let m = f.degree();
    let periods = f.periods(prec);
    let pi: Matrix<Ball> = (0..m)
        .map(|k| (0..m).map(|i| periods[(i + k) % m].clone()).collect())
        .collect();
    linalg::inverse(&pi)
}

fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, _) in factor_u64(n) {
        let more: Vec<u64> = ds.iter().map(|d| d * p).collect();
        ds.extend(more);
    }
    ds.sort_unstable();
    ds
}

/// Conjugate vectors of the pool of cyclotomic units, before rounding.
fn cyclotomic_conjugates(f: &CyclicField, prec: u32) -> Vec<Vec<Ball>> {
    let n = f.conductor();
    let m = f.degree();
    let h = f.subgroup().elements();
    let reps = f.coset_reps();
    let mut out = Vec::new();
    for d in divisors(n).into_iter().skip(1) {
        let mut hd: Vec<u64> = h.iter().map(|x| x % d).collect();
        hd.sort_unstable();
        hd.dedup();
        // classes of (Z/d)^x modulo H_d
        let mut class = vec![usize::MAX; d as usize];
        let mut transversal = Vec::new();
        for a in 1..d {
            if a.gcd(&d) != 1 || class[a as usize] != usize::MAX {
                continue;
            }
            for &x in &hd {
                class[(a * x % d) as usize] = transversal.len();
            }
            transversal.push(a);
        }
        let half: Vec<u64> = hd.iter().copied().filter(|&x| 2 * x < d).collect();
        // G(a) = prod_{h in H_d / +-1} 4 sin^2(pi a h / d), one value per class
        let g_vals: Vec<Ball> = transversal
            .par_iter()
            .map(|&a| {
                half.iter().fold(Ball::exact_int(1), |acc, &x| {
                    let s = Ball::cos_sin_2pi((a * x % d) as i64, 2 * d, prec).1;
                    &acc * &(&(&s * &s) * &Ball::exact_int(4))
                })
            })
            .collect();
        let at = |x: u64| g_vals[class[(x % d) as usize]].clone();
        let mut base: Vec<Vec<Ball>> = Vec::new();
        if factor_u64(d).len() > 1 {
            base.push(reps.iter().map(|&c| at(c)).collect());
        }
        for &a in transversal.iter().skip(1) {
            base.push(reps.iter().map(|&c| &at(a * (c % d)) / &at(c)).collect());
        }
        for v in base {
            for s in 0..m {
                out.push((0..m).map(|k| v[(k + s) % m].clone()).collect());
            }
        }
    }
    out
}

/// The verified cyclotomic units of `f`, deduplicated, `+-1` removed.
pub fn cyclotomic_unit_pool(f: &CyclicField, prec: u32) -> Result<Vec<FieldElement>> {
    let pinv = conjugate_to_period_map(f, prec).ok_or_else(|| Error::PrecisionExhausted {
        bits: prec,
        context: "period matrix not certifiably invertible".into(),
    })?;
    let mut pool: Vec<FieldElement> = Vec::new();
    let minus_one = f.from_int(-1);
    for vals in cyclotomic_conjugates(f, prec) {
        let Some(u) = element_from_conjugates(f, &pinv, &vals)? else {
            return Err(Error::PrecisionExhausted {
                bits: prec,
                context: "cyclotomic unit coordinates did not round".into(),
            });
        };
        if u == f.one() || u == minus_one || pool.contains(&u) {
            continue;
        }
        if !f.is_unit(&u)? {
            return Err(Error::FieldInvariant(
                "rounded cyclotomic unit fails the exact norm check".into(),
            ));
        }
        pool.push(u);
    }
    Ok(pool)
}

/// Greedy choice of independent vectors, smallest log-height first.
fn select_independent(logs: &[Vec<f64>], r: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..logs.len()).collect();
    let height = |v: &Vec<f64>| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    order.sort_by(|&a, &b| height(&logs[a]).total_cmp(&height(&logs[b])));
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut chosen = Vec::new();
    for i in order {
        let mut v = logs[i].clone();
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 < 1e-9 {
            continue;
        }
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-7 * norm0 {
            basis.push(v.iter().map(|x| x / norm).collect());
            chosen.push(i);
            if chosen.len() == r {
                break;
            }
        }
    }
    chosen
}

/// `m - 1` independent cyclotomic units (not yet saturated).
pub fn cyclotomic_units(f: &CyclicField) -> Result<UnitSystem> {
    let r = f.degree() - 1;
    let mut prec = DEFAULT_UNIT_PRECISION;
    loop {
        let pool = match cyclotomic_unit_pool(f, prec) {
            Ok(p) => p,
            Err(Error::PrecisionExhausted { .. }) if prec < MAX_PRECISION => {
                prec *= 2;
                continue;
            }
            Err(e) => return Err(e),
        };
        let logs: Vec<Vec<f64>> = pool
            .iter()
            .map(|u| {
                Ok(log_embedding(f, u, 128)?
                    .iter()
                    .map(|b| b.to_f64())
                    .collect())
            })
            .collect::<Result<_>>()?;
        let chosen = select_independent(&logs, r);
        if chosen.len() < r {
            return Err(Error::RankDeficient {
                found: chosen.len(),
                needed: r,
            });
        }
        let gens = chosen.into_iter().map(|i| pool[i].clone()).collect();
        return UnitSystem::from_generators(f, gens, AssertedMode::Cyclotomic);
    }
}

/// A basis of the kernel of `a` over `F_p` (rows of `a` are equations).
fn kernel_mod_p(a: &[Vec<u64>], cols: usize, p: u64) -> Vec<Vec<u64>> {
    let mut rows: Vec<Vec<u64>> = a.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][c] % p != 0) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = pow_mod(rows[r][c], p - 2, p);
        for x in rows[r].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let t = rows[i][c];
                let pivot_row = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(&pivot_row) {
                    *x = (*x + p * p - t * y % p) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![0u64; cols];
            v[fc] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - rows[i][fc] % p) % p;
            }
            v
        })
        .collect()
}

/// Exponent vectors (sign column first when `p = 2`) of products of the
/// generators that are `p`-th powers at many degree-one primes.
fn pth_power_candidates(f: &CyclicField, gens: &[FieldElement], p: u64) -> Result<Vec<Vec<u64>>> {
    let with_sign = p == 2;
    let cols = gens.len() + usize::from(with_sign);
    let disc = discriminant(f.minpoly());
    let dens: BigInt = gens.iter().fold(BigInt::one(), |acc, g| acc * g.den());
    let wanted = 3 * cols + 40;
    let mut rows: Vec<Vec<u64>> = Vec::new();
    let mut q = p + 1;
    while rows.len() < wanted {
        q += p;
        if q > 1 << 40 {
            break;
        }
        if !is_prime_u64(q) {
            continue;
        }
        let qb = BigInt::from(q);
        if (&disc % &qb).is_zero() || (&dens % &qb).is_zero() {
            continue;
        }
        let roots = roots_mod_p(f.minpoly(), q);
        if roots.is_empty() {
            continue;
        }
        let g = primitive_root(q);
        let zeta = pow_mod(g, (q - 1) / p, q);
        let dlog = |v: u64| -> u64 {
            let mut z = 1u64;
            for t in 0..p {
                if z == v {
                    return t;
                }
                z = (z as u128 * zeta as u128 % q as u128) as u64;
            }
            unreachable!("value is a p-th root of unity")
        };
        for &r in &roots {
            let mut row = Vec::with_capacity(cols);
            if with_sign {
                row.push(dlog(q - 1));
            }
            for u in gens {
                let val = u
                    .coords()
                    .iter()
                    .rev()
                    .fold(BigInt::zero(), |acc, c| (acc * r + c).mod_floor(&qb));
                let dinv =
                    crate::arith::mod_inverse(u.den().mod_floor(&qb).to_u64().expect("reduced"), q)
                        .expect("q does not divide den");
                let v = (val * dinv).mod_floor(&qb).to_u64().expect("reduced");
                row.push(dlog(pow_mod(v, (q - 1) / p, q)));
            }
            rows.push(row);
        }
    }
    Ok(kernel_mod_p(&rows, cols, p))
}

/// A `p`-th root of `sign * prod g_i^(e_i)` in `f`, found from embeddings
/// and verified exactly.
fn pth_root(
    f: &CyclicField,
    gens: &[FieldElement],
    sign: bool,
    e: &[u64],
    p: u64,
) -> Result<Option<FieldElement>> {
    let m = f.degree();
    let exps: Vec<BigInt> = e.iter().map(|&x| BigInt::from(x)).collect();
    let mut x = product(f, gens, &exps)?;
    if sign {
        x = f.neg(&x)?;
    }
    let mut prec = DEFAULT_UNIT_PRECISION;
    while prec <= MAX_PRECISION {
        let conj = f.embed(&x, prec)?;
        if conj.iter().any(|c| c.contains_zero()) {
            prec *= 2;
            continue;
        }
        let neg: Vec<bool> = conj.iter().map(|c| c.is_negative()).collect();
        if p == 2 && neg.iter().any(|&b| b) {
            return Ok(None);
        }
        let pb = Ball::exact_int(p as i64);
        let mags: Option<Vec<Ball>> = conj
            .iter()
            .map(|c| Some((&c.abs().ln(prec)? / &pb).exp(prec)))
            .collect();
        let Some(mags) = mags else {
            prec *= 2;
            continue;
        };
        let Some(pinv) = conjugate_to_period_map(f, prec) else {
            prec *= 2;
            continue;
        };
        let patterns: Vec<Vec<bool>> = if p == 2 {
            (0..1u32 << (m - 1))
                .map(|bits| (0..m).map(|k| k > 0 && bits >> (k - 1) & 1 == 1).collect())
                .collect()
        } else {
            vec![neg.clone()]
        };
        let mut ambiguous = false;
        for pat in patterns {
            let vals: Vec<Ball> = mags
                .iter()
                .zip(&pat)
                .map(|(v, &n)| if n { -v } else { v.clone() })
                .collect();
            let y = linalg::mat_vec(&pinv, &vals);
            let mut coords = Vec::with_capacity(m);
            for b in &y {
                match b.integers() {
                    crate::real::IntegerContent::Unique(v) => coords.push(v),
                    crate::real::IntegerContent::Ambiguous => {
                        ambiguous = true;
                        break;
                    }
                    crate::real::IntegerContent::None => break,
                }
            }
            if coords.len() < m {
                continue;
            }
            let cand = f.from_period_coords(&coords)?;
            if f.pow(&cand, p as i64)? == x {
                return Ok(Some(cand));
            }
        }
        if !ambiguous {
            return Ok(None);
        }
        prec *= 2;
    }
    Err(Error::PrecisionExhausted {
        bits: MAX_PRECISION,
        context: "p-th root extraction".into(),
    })
}

/// One descent step at `p`: replaces a generator by a `p`-th root when
/// some product of generators is a `p`-th power.
fn descend_once(f: &CyclicField, gens: &mut [FieldElement], p: u64) -> Result<bool> {
    let with_sign = p == 2;
    for v in pth_power_candidates(f, gens, p)? {
        let (sign, e) = if with_sign {
            (v[0] == 1, v[1..].to_vec())
        } else {
            (false, v.clone())
        };
        let Some(j) = e.iter().position(|&x| x != 0) else {
            continue;
        };
        // scale so that e_j = 1; the sign bit is unaffected (p = 2 forces e_j = 1)
        let s = pow_mod(e[j], p - 2, p);
        let e: Vec<u64> = e.iter().map(|&x| x * s % p).collect();
        if let Some(y) = pth_root(f, gens, sign, &e, p)? {
            gens[j] = y;
            return Ok(true);
        }
    }
    Ok(false)
}

/// Saturate at each prime in turn, recording the outcome per prime.
pub fn saturate(f: &CyclicField, u: &UnitSystem, primes: &[u64]) -> Result<UnitSystem> {
    u.check_field(f)?;
    let mut gens = u.generators.clone();
    let mut log = u.saturation_log.clone();
    for &p in primes {
        if p < 2 || !is_prime_u64(p) {
            return Err(Error::NotPrime(BigInt::from(p)));
        }
        let mut descents = 0;
        while descend_once(f, &mut gens, p)? {
            descents += 1;
        }
        log.push(SaturationRecord {
            prime: p,
            outcome: if descents > 0 {
                format!("saturated at {p}")
            } else {
                format!("no descent at {p}")
            },
            descents,
        });
    }
    let mut out = UnitSystem::from_generators(f, gens, u.mode)?;
    out.saturation_log = log;
    Ok(out)
}

/// LLL-reduce the log lattice so generators have small, balanced logs.
pub fn reduce_generators(f: &CyclicField, u: &UnitSystem) -> Result<UnitSystem> {
    u.check_field(f)?;
    let r = u.rank();
    if r < 2 {
        return Ok(u.clone());
    }
    let scale = (1u64 << 40) as f64;
    let rows: Matrix<BigInt> = u
        .log_matrix_f64()
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| BigInt::from((x * scale).round() as i128))
                .collect()
        })
        .collect();
    let Ok(lat) = IntLattice::new(rows) else {
        return Ok(u.clone());
    };
    let out = lll_reduce(&lat, &default_delta())?;
    let gens = out
        .transform
        .iter()
        .map(|t| product(f, &u.generators, t))
        .collect::<Result<Vec<_>>>()?;
    let mut v = UnitSystem::from_generators(f, gens, u.mode)?;
    v.saturation_log = u.saturation_log.clone();
    Ok(v)
}

/// Cyclotomic units, saturated at `primes`, then LLL-reduced.
pub fn saturated_units(f: &CyclicField, primes: &[u64]) -> Result<UnitSystem> {
    let u = cyclotomic_units(f)?;
    let s = saturate(f, &u, primes)?;
    reduce_generators(f, &s)
}

impl UnitSystem {
    /// The regulator as an `f64` midpoint.
    pub fn regulator_f64(&self) -> f64 {
        self.regulator.to_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclofield::subfields_of_conductor;

    fn f11() -> CyclicField {
        subfields_of_conductor(5, 11).unwrap().remove(0)
    }

    #[test]
    fn trivial_log_embeddings() {
        let f = f11();
        for u in [f.one(), f.from_int(-1)] {
            for b in log_embedding(&f, &u, 128).unwrap() {
                assert!(b.contains_zero());
            }
        }
        let lam = f.add(&f.eta(), &f.from_int(2)).unwrap();
        let l = log_embedding(&f, &lam, 256).unwrap();
        let s = l.iter().fold(Ball::exact_int(0), |a, b| &a + b);
        assert!(s.contains_zero());
    }

    #[test]
    fn f11_cyclotomic_units_have_full_rank() {
        let f = f11();
        let u = cyclotomic_units(&f).unwrap();
        assert_eq!(u.rank(), 4);
        for g in u.generators() {
            assert!(f.is_unit(g).unwrap());
        }
        assert!(u.regulator().is_positive());
        for row in u.log_matrix() {
            let s = row.iter().fold(Ball::exact_int(0), |a, b| &a + b);
            assert!(s.contains_zero());
        }
    }

    #[test]
    fn saturation_at_two_divides_regulator() {
        let f = f11();
        let u = cyclotomic_units(&f).unwrap();
        let s = saturate(&f, &u, &[2]).unwrap();
        let ratio = u.regulator_f64() / s.regulator_f64();
        let k = ratio.log2().round();
        assert!((ratio - 2f64.powf(k)).abs() < 1e-6 * ratio);
        assert!(k >= 1.0);
        // soundness: old generators lie in the new group
        for g in u.generators() {
            assert!(s.express(&f, g).unwrap().is_some());
        }
        let again = saturate(&f, &s, &[2]).unwrap();
        assert_eq!(
            again.saturation_log().last().unwrap().outcome,
            "no descent at 2"
        );
    }

    #[test]
    fn squared_generator_descends() {
        let f = f11();
        let u = saturated_units(&f, &[2]).unwrap();
        let mut gens = u.generators().to_vec();
        gens[0] = f.mul(&gens[0], &gens[0]).unwrap();
        let sq = UnitSystem::from_generators(&f, gens, AssertedMode::Cyclotomic).unwrap();
        let s = saturate(&f, &sq, &[2]).unwrap();
        let ratio = sq.regulator_f64() / s.regulator_f64();
        assert!((ratio - 2.0).abs() < 1e-9);
        assert_eq!(s.saturation_log()[0].outcome, "saturated at 2");
    }

    #[test]
    fn kernel_mod_p_basics() {
        let a = vec![vec![1, 1, 0], vec![0, 0, 1]];
        let k = kernel_mod_p(&a, 3, 2);
        assert_eq!(k, vec![vec![1, 1, 0]]);
    }

    #[test]
    fn unit_file_roundtrip() {
        let f = f11();
        let u = saturated_units(&f, &[2]).unwrap();
        let file = u.to_file(&f).unwrap();
        let s = serde_json::to_string(&file).unwrap();
        let back: UnitFile = serde_json::from_str(&s).unwrap();
        let v = UnitSystem::from_file(&f, &back).unwrap();
        assert_eq!(v.generators(), u.generators());
        let g = subfields_of_conductor(5, 31).unwrap().remove(0);
        assert!(matches!(
            UnitSystem::from_file(&g, &back),
            Err(Error::FieldMismatch)
        ));
    }
}
