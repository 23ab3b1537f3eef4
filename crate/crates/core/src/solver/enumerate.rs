//! Exhaustive search of the box `|a|_inf <= B` for `lambda = +-prod g^a`
//! with `1 - lambda` a unit.
//!
//! Candidates are screened in floating point with a tracked relative error
//! on `|N(1 - lambda)| = prod_k |1 - sigma_k(lambda)|`, which must equal 1.
//! Anything the screen cannot reject with certainty goes to exact arithmetic.

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclofield::{CyclicField, FieldElement};
use crate::error::{Error, Result};
use crate::units::{product, UnitSystem};

const EPS: f64 = f64::EPSILON;

/// Screen result beyond which exact arithmetic decides.
const FALLBACK_ERROR: f64 = 0.25;

/// A unit `sign * prod g_k^(exponents_k)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UnitWord {
    pub sign: i8,
    pub exponents: Vec<i64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationStats {
    pub candidates: u64,
    pub screened_in: u64,
    pub exact_fallbacks: u64,
    pub exact_checks: u64,
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    /// Solutions sorted sign-first, then lexicographically by exponents.
    pub solutions: Vec<(UnitWord, FieldElement)>,
    pub stats: EnumerationStats,
}

/// Every `lambda` with exponent height at most `bound` such that
/// `1 - lambda` is also a unit. `budget` caps exact verifications.
pub fn enumerate_solutions(
    f: &CyclicField,
    u: &UnitSystem,
    bound: u64,
    budget: u64,
) -> Result<Enumeration> {
    let r = u.rank();
    let m = f.degree();
    if r == 0 {
        return Err(Error::InvalidInput("unit system of rank 0".into()));
    }
    let b = i64::try_from(bound).map_err(|_| Error::BudgetExceeded(budget))?;
    let side = 2 * bound as u128 + 1;
    let total = 2 * side.pow(r as u32);
    if total > u64::MAX as u128 {
        return Err(Error::BudgetExceeded(budget));
    }
    let conj: Vec<Vec<f64>> = u
        .generators()
        .iter()
        .map(|g| {
            f.embed(g, 128)
                .map(|v| v.iter().map(|x| x.to_f64()).collect())
        })
        .collect::<Result<_>>()?;
    let logs: Vec<Vec<f64>> = conj
        .iter()
        .map(|row| row.iter().map(|x| x.abs().ln()).collect())
        .collect();
    // |log| of any conjugate of any prefix product, and the sum of positive
    // logs of a unit (half the sum of |log|), over the box
    let growth: f64 = logs
        .iter()
        .map(|row| row.iter().fold(0.0f64, |a, x| a.max(x.abs())))
        .sum::<f64>()
        * b as f64;
    let positive: f64 = logs
        .iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>() / 2.0)
        .sum::<f64>()
        * b as f64;
    let linear = growth < 650.0 && positive + m as f64 * 2f64.ln() < 650.0;
    // relative error of one conjugate after at most this many roundings
    let steps = (r as f64) * (2.0 * b as f64 + 70.0);
    let delta = 4.0 * steps * EPS;

    let exact_checks = AtomicU64::new(0);
    let screen = Screen {
        conj: &conj,
        logs: &logs,
        r,
        m,
        b,
        delta,
        growth,
        linear,
    };
    let chunks: Vec<(Vec<(UnitWord, bool)>, EnumerationStats)> = (-b..=b)
        .into_par_iter()
        .map(|a0| screen.chunk(a0))
        .collect();

    let mut stats = EnumerationStats::default();
    let mut pending = Vec::new();
    for (cands, s) in chunks {
        stats.candidates += s.candidates;
        stats.screened_in += s.screened_in;
        stats.exact_fallbacks += s.exact_fallbacks;
        pending.extend(cands);
    }
    pending.sort();
    let checked: Vec<Option<(UnitWord, FieldElement)>> = pending
        .into_par_iter()
        .map(|(w, _)| {
            if exact_checks.fetch_add(1, Ordering::Relaxed) >= budget {
                return Err(Error::BudgetExceeded(budget));
            }
            let lambda = word_value(f, u, &w)?;
            Ok(if super::verify_solution(f, &lambda)? {
                Some((w, lambda))
            } else {
                None
            })
        })
        .collect::<Result<_>>()?;
    stats.exact_checks = exact_checks.load(Ordering::Relaxed);
    let solutions = checked.into_iter().flatten().collect();
    Ok(Enumeration { solutions, stats })
}

/// The exact field element named by a word.
pub fn word_value(f: &CyclicField, u: &UnitSystem, w: &UnitWord) -> Result<FieldElement> {
    let a: Vec<BigInt> = w.exponents.iter().map(|&e| BigInt::from(e)).collect();
    let p = product(f, u.generators(), &a)?;
    if w.sign < 0 {
        f.neg(&p)
    } else {
        Ok(p)
    }
}

struct Screen<'a> {
    conj: &'a [Vec<f64>],
    logs: &'a [Vec<f64>],
    r: usize,
    m: usize,
    b: i64,
    delta: f64,
    growth: f64,
    linear: bool,
}

impl Screen<'_> {
    /// All words with first exponent `a0` the screen cannot rule out; the
    /// flag records an exact fallback.
    fn chunk(&self, a0: i64) -> (Vec<(UnitWord, bool)>, EnumerationStats) {
        let (r, m, b) = (self.r, self.m, self.b);
        let mut out = Vec::new();
        let mut stats = EnumerationStats::default();
        let mut exps = vec![-b; r];
        exps[0] = a0;
        // prefix[j] = conjugates (or logs) of prod_{k <= j} g_k^(a_k)
        let mut prefix = vec![vec![0.0f64; m]; r];
        let mut lsign = vec![vec![1.0f64; m]; r];
        let start = |j: usize,
                     base: &[f64],
                     bsign: &[f64],
                     e: i64,
                     out: &mut Vec<f64>,
                     osign: &mut Vec<f64>| {
            for i in 0..m {
                if self.linear {
                    out[i] = base[i] * self.conj[j][i].powi(e as i32);
                } else {
                    out[i] = base[i] + e as f64 * self.logs[j][i];
                    let neg = self.conj[j][i] < 0.0 && e.rem_euclid(2) == 1;
                    osign[i] = if neg { -bsign[i] } else { bsign[i] };
                }
            }
        };
        let unit = if self.linear { 1.0 } else { 0.0 };
        let ones = vec![unit; m];
        let plus = vec![1.0f64; m];
        {
            let (p0, s0) = (&mut prefix[0], &mut lsign[0]);
            start(0, &ones, &plus, a0, p0, s0);
        }
        if r == 1 {
            for sign in [-1i8, 1] {
                stats.candidates += 1;
                match self.test(&prefix[0], &lsign[0], sign) {
                    Verdict::Reject => {}
                    v => {
                        let fallback = matches!(v, Verdict::Fallback);
                        if fallback {
                            stats.exact_fallbacks += 1;
                        } else {
                            stats.screened_in += 1;
                        }
                        out.push((
                            UnitWord {
                                sign,
                                exponents: exps.clone(),
                            },
                            fallback,
                        ));
                    }
                }
            }
            return (out, stats);
        }
        // levels 1..r-1 use an odometer; level r-1 is the innermost loop
        for j in 1..r {
            let (lo, hi) = prefix.split_at_mut(j);
            let (slo, shi) = lsign.split_at_mut(j);
            start(j, &lo[j - 1], &slo[j - 1], -b, &mut hi[0], &mut shi[0]);
        }
        loop {
            // innermost: exps[r-1] runs -b..=b with prefix[r-1] at -b
            let last = r - 1;
            if self.linear {
                self.inner_linear(&prefix[last], &mut exps, &mut out, &mut stats);
            } else {
                let mut cur = prefix[last].clone();
                let mut cs = lsign[last].clone();
                for e in -b..=b {
                    exps[last] = e;
                    for sign in [-1i8, 1] {
                        stats.candidates += 1;
                        match self.test(&cur, &cs, sign) {
                            Verdict::Reject => {}
                            Verdict::Maybe => {
                                stats.screened_in += 1;
                                out.push((
                                    UnitWord {
                                        sign,
                                        exponents: exps.clone(),
                                    },
                                    false,
                                ));
                            }
                            Verdict::Fallback => {
                                stats.exact_fallbacks += 1;
                                out.push((
                                    UnitWord {
                                        sign,
                                        exponents: exps.clone(),
                                    },
                                    true,
                                ));
                            }
                        }
                    }
                    if e < b {
                        for i in 0..m {
                            if self.linear {
                                cur[i] *= self.conj[last][i];
                            } else {
                                cur[i] += self.logs[last][i];
                                if self.conj[last][i] < 0.0 {
                                    cs[i] = -cs[i];
                                }
                            }
                        }
                    }
                }
            }
            // advance the odometer over levels 1..r-1 (excluding the innermost)
            let mut j = r - 1;
            loop {
                if j <= 1 {
                    return (out, stats);
                }
                j -= 1;
                if exps[j] < b {
                    exps[j] += 1;
                    for i in 0..m {
                        if self.linear {
                            prefix[j][i] *= self.conj[j][i];
                        } else {
                            prefix[j][i] += self.logs[j][i];
                            if self.conj[j][i] < 0.0 {
                                lsign[j][i] = -lsign[j][i];
                            }
                        }
                    }
                    // reset deeper levels
                    for k in j + 1..r {
                        exps[k] = -b;
                        let (lo, hi) = prefix.split_at_mut(k);
                        let (slo, shi) = lsign.split_at_mut(k);
                        start(k, &lo[k - 1], &slo[k - 1], -b, &mut hi[0], &mut shi[0]);
                    }
                    break;
                }
            }
        }
    }

    /// Innermost loop in the linear domain. Both signs share one pass; the
    /// common case is rejected without divisions, anything near the
    /// boundary goes through [`Screen::test`].
    fn inner_linear(
        &self,
        start: &[f64],
        exps: &mut [i64],
        out: &mut Vec<(UnitWord, bool)>,
        stats: &mut EnumerationStats,
    ) {
        let last = self.r - 1;
        let g = &self.conj[last][..];
        let mf = self.m as f64;
        let slack = 4.0 * mf * EPS;
        let mut cur = start.to_vec();
        for e in -self.b..=self.b {
            exps[last] = e;
            let (mut pm, mut pp) = (1.0f64, 1.0f64);
            let (mut ym, mut yp) = (f64::INFINITY, f64::INFINITY);
            let mut xmax = 0.0f64;
            for &x in cur.iter() {
                let a = (1.0 + x).abs();
                let c = (1.0 - x).abs();
                pm *= a;
                pp *= c;
                ym = ym.min(a);
                yp = yp.min(c);
                xmax = xmax.max(x.abs());
            }
            stats.candidates += 2;
            let err = mf * (xmax * self.delta + EPS);
            for (sign, p, ymin) in [(-1i8, pm, ym), (1i8, pp, yp)] {
                // t < 0.1 rejects p outside [1/1.11, 1/0.9]
                if err + slack * ymin < 0.1 * ymin && (p > 1.12 || p < 0.9) {
                    continue;
                }
                match self.test(&cur, &[], sign) {
                    Verdict::Reject => {}
                    v => {
                        let fallback = matches!(v, Verdict::Fallback);
                        if fallback {
                            stats.exact_fallbacks += 1;
                        } else {
                            stats.screened_in += 1;
                        }
                        out.push((
                            UnitWord {
                                sign,
                                exponents: exps.to_vec(),
                            },
                            fallback,
                        ));
                    }
                }
            }
            for (c, &gi) in cur.iter_mut().zip(g) {
                *c *= gi;
            }
        }
    }

    /// Decide whether `prod_k |1 - sign x_k|` can equal 1.
    fn test(&self, x: &[f64], xs: &[f64], sign: i8) -> Verdict {
        let s = sign as f64;
        if self.linear {
            let mut p = 1.0f64;
            let mut ymin = f64::INFINITY;
            let mut xmax = 0.0f64;
            for &xi in x {
                let ay = (1.0 - s * xi).abs();
                p *= ay;
                ymin = ymin.min(ay);
                xmax = xmax.max(xi.abs());
            }
            if ymin == 0.0 || !p.is_finite() {
                return Verdict::Fallback;
            }
            let slack = 4.0 * self.m as f64 * EPS;
            // one division bounds the summed relative errors
            let mut t = self.m as f64 * (xmax * self.delta + EPS) / ymin + slack;
            if t >= FALLBACK_ERROR {
                t = slack
                    + x.iter()
                        .map(|&xi| (xi.abs() * self.delta + EPS) / (1.0 - s * xi).abs())
                        .sum::<f64>();
                if t >= FALLBACK_ERROR {
                    return Verdict::Fallback;
                }
            }
            // true value lies in [p (1 - t), p e^t]
            if p * (1.0 - t) <= 1.0 && 1.0 <= p * t.exp() {
                Verdict::Maybe
            } else {
                Verdict::Reject
            }
        } else {
            let mut sum = 0.0f64;
            let mut t = 0.0f64;
            for (i, &l) in x.iter().enumerate() {
                // sigma = s * xs * e^l
                let el = (l.abs() + self.growth) * self.delta + EPS;
                if l > 700.0 {
                    sum += l;
                    t += el + 1e-300;
                } else if l < -700.0 {
                    t += 1e-300;
                } else {
                    let xv = s * xs[i] * l.exp();
                    let y = (1.0 - xv).abs();
                    if y == 0.0 {
                        return Verdict::Fallback;
                    }
                    sum += y.ln();
                    t += (xv.abs() * 2.0 * el + EPS) / y + EPS;
                }
            }
            t += 4.0 * self.m as f64 * EPS * (1.0 + sum.abs());
            if t >= FALLBACK_ERROR {
                return Verdict::Fallback;
            }
            if sum.abs() <= t {
                Verdict::Maybe
            } else {
                Verdict::Reject
            }
        }
    }
}

enum Verdict {
    Reject,
    Maybe,
    Fallback,
}
