//! Height bounds for solutions: a linear-forms-in-logarithms bound, then
//! lattice reduction of that bound.
//!
//! Write `lambda = +-prod g_k^(a_k)`, `mu = 1 - lambda = +-prod g_k^(b_k)` and
//! `H = max(|a|_inf, |b|_inf)`. For any unit `u` with exponent height `A`,
//! some embedding has `log|sigma_i(u)| <= -c2 * A`. Applied to whichever of
//! `lambda`, `mu` attains `H`, the other one gives a linear form
//! `Lambda = sum_k x_k log|sigma_i(g_k)|` with `|x| <= H` and
//! `|Lambda| <= 2 exp(-c2 H)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::cyclofield::CyclicField;
use crate::error::{Error, Result};
use crate::lattice::{default_delta, lll_reduce, shortest_vector_lower_bound_sq, IntLattice};
use crate::linalg::{self, Matrix};
use crate::real::Ball;
use crate::units::{log_embedding, UnitSystem};

/// Scale factors `C = (kappa * r * X)^r` tried in order during reduction.
pub const KAPPAS: [f64; 7] = [1.2, 1.5, 2.0, 3.0, 5.0, 10.0, 30.0];

/// Relative safety margin applied to floating-point constants.
const SAFETY: f64 = 1e-9;

/// `c2 > 0` with `min_i log|sigma_i(u)| <= -c2 * |a|_inf` for every unit
/// `u = +-prod g_k^(a_k)`.
///
/// The optimum is `min` over the faces `a_k = +-1, |a_j| <= 1` of the convex
/// function `max_i -(a L)_i`; each face is a small linear program solved by
/// enumerating vertices.
pub fn decay_constant(logs: &[Vec<f64>]) -> f64 {
    let r = logs.len();
    let mut best = f64::INFINITY;
    for k in 0..r {
        for s in [-1.0f64, 1.0] {
            best = best.min(face_minimum(logs, k, s));
        }
    }
    best * (1.0 - 1e-6) - SAFETY
}

/// `min t` subject to `-(a L)_i <= t`, `a_k = s`, `|a_j| <= 1`.
fn face_minimum(logs: &[Vec<f64>], k: usize, s: f64) -> f64 {
    let r = logs.len();
    let m = logs[0].len();
    let free: Vec<usize> = (0..r).filter(|&j| j != k).collect();
    let nv = free.len() + 1; // free a_j and t
                             // constraints as (coeffs over [a_free.., t], rhs) meaning coeffs . v <= rhs
    let mut cons: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..m {
        // -sum_j a_j L_ji - t <= s * L_ki
        let mut c: Vec<f64> = free.iter().map(|&j| -logs[j][i]).collect();
        c.push(-1.0);
        cons.push((c, s * logs[k][i]));
    }
    for (idx, _) in free.iter().enumerate() {
        let mut c = vec![0.0; nv];
        c[idx] = 1.0;
        cons.push((c.clone(), 1.0));
        c[idx] = -1.0;
        cons.push((c, 1.0));
    }
    let mut best = f64::INFINITY;
    let n = cons.len();
    let mut subset: Vec<usize> = (0..nv).collect();
    loop {
        let a: Matrix<f64> = subset.iter().map(|&c| cons[c].0.clone()).collect();
        let b: Vec<f64> = subset.iter().map(|&c| cons[c].1).collect();
        if let Some(v) = linalg::solve(&a, &b) {
            if v.iter().all(|x| x.is_finite())
                && cons.iter().all(|(c, rhs)| {
                    let lhs: f64 = c.iter().zip(&v).map(|(x, y)| x * y).sum();
                    lhs <= rhs + 1e-9 * (1.0 + rhs.abs())
                })
            {
                best = best.min(v[nv - 1]);
            }
        }
        // next combination
        let mut i = nv;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] < n - nv + i {
                subset[i] += 1;
                for j in i + 1..nv {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Matveev's constant for `n` real logarithms in a field of degree `d`,
/// multiplied by the product of the modified heights.
fn matveev_constant(n: usize, d: usize, heights: &[f64]) -> f64 {
    let (nf, df) = (n as f64, d as f64);
    let c = 1.4 * 30f64.powf(nf + 3.0) * nf.powf(4.5) * df * df * (1.0 + df.ln());
    c * heights.iter().product::<f64>()
}

/// Bound data shared by the initial bound and the reduction steps.
#[derive(Clone, Debug)]
pub struct BoundContext {
    pub r: usize,
    pub m: usize,
    pub c2: f64,
    pub logs_f64: Vec<Vec<f64>>,
}

impl BoundContext {
    pub fn new(u: &UnitSystem) -> Result<Self> {
        let r = u.rank();
        if r == 0 {
            return Err(Error::InvalidInput("unit system of rank 0".into()));
        }
        let logs_f64 = u.log_matrix_f64();
        let m = logs_f64[0].len();
        let c2 = decay_constant(&logs_f64);
        if !(c2 > 0.0) {
            return Err(Error::InvalidInput(
                "unit system has no decay constant".into(),
            ));
        }
        Ok(BoundContext { r, m, c2, logs_f64 })
    }

    /// Heights below this never reach the small-conjugate regime.
    pub fn regime_floor(&self) -> f64 {
        std::f64::consts::LN_2 / self.c2
    }
}

/// `B0` with `H <= B0` for every solution.
pub fn initial_bound(_f: &CyclicField, u: &UnitSystem) -> Result<BigInt> {
    let ctx = BoundContext::new(u)?;
    // A_k = max(m h(g_k), |log g_k|, 0.16) with m h(g_k) = sum of positive logs
    let heights: Vec<f64> = ctx
        .logs_f64
        .iter()
        .map(|row| {
            let pos: f64 = row.iter().filter(|&&x| x > 0.0).sum();
            (pos * (1.0 + SAFETY)).max(0.16)
        })
        .collect();
    let cm = matveev_constant(ctx.r, ctx.m, &heights);
    // c2 H < log 2 + cm (1 + log H); iterate to the fixed point from above
    let mut h = 1.0f64;
    for _ in 0..200 {
        let next = (std::f64::consts::LN_2 + cm * (1.0 + h.max(1.0).ln())) / ctx.c2;
        if (next - h).abs() <= 1e-12 * next {
            h = next;
            break;
        }
        h = next;
    }
    let b0 = (h * (1.0 + 1e-6)).ceil().max(ctx.regime_floor().ceil());
    Ok(f64_to_bigint(b0))
}

fn f64_to_bigint(x: f64) -> BigInt {
    BigInt::from_f64(x.ceil()).expect("finite bound")
}

/// Natural log of a positive big integer, to `f64` accuracy.
fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite").ln();
    }
    let shift = bits - 900;
    let top: BigInt = x >> shift;
    top.to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
}

fn ln_rational(q: &BigRational) -> f64 {
    ln_big(q.numer()) - ln_big(q.denom())
}

/// Outcome of one reduction attempt for a single embedding.
#[derive(Clone, Debug)]
pub struct EmbeddingReduction {
    pub embedding: usize,
    pub kappa: f64,
    pub bound: f64,
}

/// One de Weger reduction pass: every solution with `H <= x` has
/// `H <= B'` with `B' < x`.
pub fn reduce_bound(f: &CyclicField, u: &UnitSystem, x: &BigInt, prec: u32) -> Result<BigInt> {
    reduce_bound_detailed(f, u, x, prec).map(|(b, _)| b)
}

pub fn reduce_bound_detailed(
    f: &CyclicField,
    u: &UnitSystem,
    x: &BigInt,
    prec: u32,
) -> Result<(BigInt, Vec<EmbeddingReduction>)> {
    if x < &BigInt::one() {
        return Err(Error::InvalidInput("bound must be at least 1".into()));
    }
    let ctx = BoundContext::new(u)?;
    let logs: Vec<Vec<Ball>> = if prec == u.precision() {
        u.log_matrix().to_vec()
    } else {
        u.generators()
            .iter()
            .map(|g| log_embedding(f, g, prec))
            .collect::<Result<_>>()?
    };
    let r = ctx.r;
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for i in 0..ctx.m {
        let coeffs: Vec<Ball> = (0..r).map(|k| logs[k][i].clone()).collect();
        let mut done = None;
        for &kappa in &KAPPAS {
            match reduce_one(&coeffs, x, kappa, ctx.c2, prec)? {
                Some(b) => {
                    done = Some((kappa, b));
                    break;
                }
                None => continue,
            }
        }
        let Some((kappa, b)) = done else {
            return Err(Error::NoProgress(x.clone()));
        };
        details.push(EmbeddingReduction {
            embedding: i,
            kappa,
            bound: b,
        });
        worst = worst.max(b);
    }
    let worst = worst.max(ctx.regime_floor());
    let b = f64_to_bigint((worst * (1.0 + 1e-9)).floor() + 1.0);
    if &b >= x {
        return Err(Error::NoProgress(x.clone()));
    }
    Ok((b, details))
}

/// Reduction for the linear form with coefficients `coeffs`; `None` when the
/// lattice minimum is too small for this scale.
fn reduce_one(coeffs: &[Ball], x: &BigInt, kappa: f64, c2: f64, prec: u32) -> Result<Option<f64>> {
    let r = coeffs.len();
    // C = ceil((kappa r X)^r), built exactly from a rational kappa
    let kappa_q = BigRational::from_float(kappa).expect("finite");
    let base = kappa_q * BigRational::from_integer(x * BigInt::from(r));
    let c_big = num_traits::pow(base, r).ceil().to_integer();
    if c_big.bits() as u32 + 40 > prec {
        return Err(Error::PrecisionExhausted {
            bits: prec,
            context: "scale exceeds log precision".into(),
        });
    }
    let cb = Ball::exact_int(c_big.clone());
    let k0 = (0..r)
        .max_by(|&a, &b| {
            coeffs[a]
                .abs()
                .to_f64()
                .total_cmp(&coeffs[b].abs().to_f64())
        })
        .expect("r >= 1");
    let mut rounded = Vec::with_capacity(r);
    let mut eps = BigRational::zero();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    for c in coeffs {
        let v = &cb * c;
        let mid = v.mid();
        let n = crate::scalar::round_rational(&mid);
        let nq = BigRational::from_integer(n.clone());
        let err = ((&mid - &nq).abs() + v.radius()) - &half;
        if err > eps {
            eps = err;
        }
        rounded.push(n);
    }
    if rounded[k0].is_zero() {
        return Ok(None);
    }
    let others: Vec<usize> = (0..r).filter(|&k| k != k0).collect();
    let mut basis: Matrix<BigInt> = Vec::with_capacity(r);
    for (pos, &k) in others.iter().enumerate() {
        let mut row = vec![BigInt::zero(); r];
        row[pos] = BigInt::one();
        row[r - 1] = rounded[k].clone();
        basis.push(row);
    }
    let mut last = vec![BigInt::zero(); r];
    last[r - 1] = rounded[k0].clone();
    basis.push(last);
    let lat = IntLattice::new(basis)?;
    let out = lll_reduce(&lat, &default_delta())?;
    let gs_bound = shortest_vector_lower_bound_sq(&out.lattice);
    let b1: BigInt = out.lattice.basis[0].iter().map(|v| v * v).sum();
    let b1_bound = BigRational::new(b1, BigInt::one() << (r - 1));
    let c_sq = if gs_bound > b1_bound {
        gs_bound
    } else {
        b1_bound
    };
    let s = BigRational::from_integer(BigInt::from(r - 1) * x * x);
    let t = BigRational::from_integer(BigInt::from(r) * x) * (&half + &eps);
    let rem = &c_sq - &s;
    if !rem.is_positive() || rem <= &t * &t {
        return Ok(None);
    }
    // |Lambda| >= (sqrt(c^2 - S) - T) / C and |Lambda| <= 2 exp(-c2 H)
    let root = crate::lattice::rational_sqrt_floor(&rem);
    let gap = &root - &t;
    if !gap.is_positive() {
        return Ok(None);
    }
    let bound = (std::f64::consts::LN_2 + ln_big(&c_big) - ln_rational(&gap)) / c2;
    Ok(Some(bound.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decay_constant_single_unit_shape() {
        // r = 1, m = 2: u = g^a has logs (a l, -a l), so c2 = l
        let logs = vec![vec![0.8, -0.8]];
        let c = decay_constant(&logs);
        assert!((c - 0.8).abs() < 1e-5);
    }

    #[test]
    fn decay_constant_bounds_random_exponents() {
        let logs = vec![
            vec![-0.185, 0.27, -1.257, 0.652, 0.52],
            vec![-0.52, 0.185, -0.27, 1.257, -0.652],
            vec![0.987, 0.605, -1.172, -0.335, -0.084],
            vec![0.27, -1.257, 0.652, 0.52, -0.185],
        ];
        let c = decay_constant(&logs);
        assert!(c > 0.0);
        let mut seed = 7u64;
        for _ in 0..2000 {
            let a: Vec<i64> = (0..4)
                .map(|_| {
                    seed = seed
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    ((seed >> 33) % 41) as i64 - 20
                })
                .collect();
            let h = a.iter().map(|x| x.abs()).max().unwrap() as f64;
            if h == 0.0 {
                continue;
            }
            let v: Vec<f64> = (0..5)
                .map(|i| (0..4).map(|k| a[k] as f64 * logs[k][i]).sum())
                .collect();
            let mn = v.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(mn <= -c * h + 1e-9);
        }
    }
}
