//! Integral LLL reduction with exact Gram-Schmidt data.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Rows are the basis vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntLattice {
    pub basis: Matrix<BigInt>,
}

#[derive(Clone, Debug)]
pub struct LllOutput {
    pub lattice: IntLattice,
    /// Unimodular `U` with `U * input = output`.
    pub transform: Matrix<BigInt>,
    /// `d_i = det Gram(b_1..b_i)`, with `d_0 = 1` first.
    pub gram_dets: Vec<BigInt>,
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    // nearest integer to a/b for b > 0
    let two_b: BigInt = b * 2;
    let num: BigInt = a * 2 + b;
    num.div_floor(&two_b)
}

impl IntLattice {
    pub fn new(basis: Matrix<BigInt>) -> Result<Self> {
        let l = IntLattice { basis };
        if l.gram_dets().iter().any(|d| d.is_zero()) {
            return Err(Error::InvalidInput(
                "lattice basis is linearly dependent".into(),
            ));
        }
        Ok(l)
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `d_0 = 1, d_1, ..., d_n` (leading principal minors of the Gram matrix).
    pub fn gram_dets(&self) -> Vec<BigInt> {
        let n = self.basis.len();
        let gram: Matrix<BigInt> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| dot(&self.basis[i], &self.basis[j]))
                    .collect()
            })
            .collect();
        let mut out = vec![BigInt::one()];
        for k in 1..=n {
            let minor: Matrix<BigInt> = gram[..k].iter().map(|r| r[..k].to_vec()).collect();
            out.push(crate::linalg::bareiss_det(&minor));
        }
        out
    }

    /// Exact squared Gram-Schmidt norms `d_i / d_{i-1}`.
    pub fn gs_norms_sq(&self) -> Vec<BigRational> {
        let d = self.gram_dets();
        (1..d.len())
            .map(|i| BigRational::new(d[i].clone(), d[i - 1].clone()))
            .collect()
    }

    /// `|det|` of a square basis, i.e. the covolume.
    pub fn covolume_sq(&self) -> BigInt {
        self.gram_dets().pop().unwrap_or_else(BigInt::one)
    }
}

/// Integral LLL (all arithmetic in Z) with Lovasz parameter `delta = num/den`.
pub fn lll_reduce(l: &IntLattice, delta: &BigRational) -> Result<LllOutput> {
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    if delta <= &quarter || delta >= &BigRational::one() {
        return Err(Error::InvalidInput(format!(
            "LLL delta {delta} outside (1/4, 1)"
        )));
    }
    let (a, bq) = (delta.numer().clone(), delta.denom().clone());
    let n = l.basis.len();
    let mut b = l.basis.clone();
    let mut h: Matrix<BigInt> = crate::linalg::identity(n);
    if n == 0 {
        return Ok(LllOutput {
            lattice: l.clone(),
            transform: h,
            gram_dets: vec![BigInt::one()],
        });
    }
    // 1-based indices on d and lambda, as in the textbook formulation.
    let mut d = vec![BigInt::zero(); n + 1];
    let mut lam = vec![vec![BigInt::zero(); n + 1]; n + 1];
    d[0] = BigInt::one();
    d[1] = dot(&b[0], &b[0]);
    if d[1].is_zero() {
        return Err(Error::InvalidInput("zero basis vector".into()));
    }
    let mut k = 2usize;
    let mut kmax = 1usize;

    fn red(
        k: usize,
        l: usize,
        b: &mut Matrix<BigInt>,
        h: &mut Matrix<BigInt>,
        d: &[BigInt],
        lam: &mut [Vec<BigInt>],
    ) {
        if (lam[k][l].abs() * 2) > d[l] {
            let q = round_div(&lam[k][l], &d[l]);
            let (bl, hl) = (b[l - 1].clone(), h[l - 1].clone());
            for (x, y) in b[k - 1].iter_mut().zip(&bl) {
                *x -= &q * y;
            }
            for (x, y) in h[k - 1].iter_mut().zip(&hl) {
                *x -= &q * y;
            }
            lam[k][l] = &lam[k][l] - &q * &d[l];
            for i in 1..l {
                lam[k][i] = &lam[k][i] - &q * &lam[l][i];
            }
        }
    }

    while k <= n {
        if k > kmax {
            kmax = k;
            for j in 1..=k {
                let mut u = dot(&b[k - 1], &b[j - 1]);
                for i in 1..j {
                    u = (&d[i] * &u - &lam[k][i] * &lam[j][i]) / &d[i - 1];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    if u.is_zero() {
                        return Err(Error::InvalidInput(
                            "lattice basis is linearly dependent".into(),
                        ));
                    }
                    d[k] = u;
                }
            }
        }
        red(k, k - 1, &mut b, &mut h, &d, &mut lam);
        let lhs = &bq * &d[k] * &d[k - 2];
        let rhs = &a * &d[k - 1] * &d[k - 1] - &bq * &lam[k][k - 1] * &lam[k][k - 1];
        if lhs < rhs {
            // SWAP(k)
            b.swap(k - 1, k - 2);
            h.swap(k - 1, k - 2);
            for j in 1..k - 1 {
                let t = lam[k][j].clone();
                lam[k][j] = lam[k - 1][j].clone();
                lam[k - 1][j] = t;
            }
            let lm = lam[k][k - 1].clone();
            let bb = (&d[k - 2] * &d[k] + &lm * &lm) / &d[k - 1];
            for i in k + 1..=kmax {
                let t = lam[i][k].clone();
                lam[i][k] = (&d[k] * &lam[i][k - 1] - &lm * &t) / &d[k - 1];
                lam[i][k - 1] = (&bb * &t + &lm * &lam[i][k]) / &d[k];
            }
            d[k - 1] = bb;
            k = (k - 1).max(2);
        } else {
            for li in (1..k - 1).rev() {
                red(k, li, &mut b, &mut h, &d, &mut lam);
            }
            k += 1;
        }
    }
    Ok(LllOutput {
        lattice: IntLattice { basis: b },
        transform: h,
        gram_dets: d,
    })
}

pub fn default_delta() -> BigRational {
    BigRational::new(BigInt::from(99), BigInt::from(100))
}

/// Exact `min_i |b_i*|^2`, a lower bound for the squared minimum of the lattice.
pub fn shortest_vector_lower_bound_sq(l: &IntLattice) -> BigRational {
    l.gs_norms_sq().into_iter().min().expect("nonempty lattice")
}

/// A rational lower bound on the nonzero minimum `lambda_1`.
pub fn shortest_vector_lower_bound(l: &IntLattice) -> BigRational {
    rational_sqrt_floor(&shortest_vector_lower_bound_sq(l))
}

/// A rational `r <= sqrt(q)` that is exact when `q` is a rational square.
pub fn rational_sqrt_floor(q: &BigRational) -> BigRational {
    let (n, d) = (q.numer(), q.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        return BigRational::new(sn, sd);
    }
    // sqrt(n/d) = sqrt(n d 4^s) / (d 2^s)
    let s = 64u32;
    let scaled: BigInt = (n * d) << (2 * s);
    BigRational::new(scaled.sqrt(), d << s)
}

/// Lovasz and size-reduction conditions, checked in exact rationals.
pub fn is_lll_reduced(l: &IntLattice, delta: &BigRational) -> bool {
    let n = l.dim();
    let d = l.gram_dets();
    // mu_{ij} = lambda_{ij} / d_j, with lambda from the exact Gram-Schmidt
    let mut bstar: Vec<Vec<BigRational>> = Vec::new();
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        let bi: Vec<BigRational> = l.basis[i]
            .iter()
            .map(|x| BigRational::from_integer(x.clone()))
            .collect();
        let mut v = bi.clone();
        for j in 0..i {
            let nj: BigRational = bstar[j].iter().map(|x| x * x).sum();
            let m: BigRational = bi
                .iter()
                .zip(&bstar[j])
                .map(|(x, y)| x * y)
                .sum::<BigRational>()
                / nj;
            for (vk, bk) in v.iter_mut().zip(&bstar[j]) {
                *vk -= &m * bk;
            }
            mu[i][j] = m;
        }
        bstar.push(v);
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    for i in 0..n {
        for j in 0..i {
            if mu[i][j].abs() > half {
                return false;
            }
        }
    }
    for k in 1..n {
        let nk = BigRational::new(d[k + 1].clone(), d[k].clone());
        let nk1 = BigRational::new(d[k].clone(), d[k - 1].clone());
        if nk < (delta - &mu[k][k - 1] * &mu[k][k - 1]) * nk1 {
            return false;
        }
    }
    true
}
