//! Exact arithmetic in `Z[x]/(x^N - 1)` with `i128` coefficients, and
//! reduction modulo `Phi_N`. Every operation reports overflow as `None`.

use num_traits::ToPrimitive;

use crate::polyring::cyclotomic_poly;

/// Sparse representation: `(exponent, coefficient)` pairs.
pub(crate) type Sparse = Vec<(usize, i128)>;

pub(crate) struct CycloRing {
    pub n: usize,
    /// Nonzero coefficients of `Phi_N` below its leading term.
    phi_low: Sparse,
    pub phi_degree: usize,
}

impl CycloRing {
    pub fn new(n: u64) -> Option<Self> {
        let phi = cyclotomic_poly(n);
        let phi_degree = phi.degree()?;
        let mut phi_low = Vec::new();
        for (i, c) in phi.coeffs()[..phi_degree].iter().enumerate() {
            let c = c.to_i128()?;
            if c != 0 {
                phi_low.push((i, c));
            }
        }
        Some(CycloRing {
            n: n as usize,
            phi_low,
            phi_degree,
        })
    }

    pub fn one(&self) -> Vec<i128> {
        let mut v = vec![0i128; self.n];
        v[0] = 1;
        v
    }

    /// Indicator vector of a set of exponents.
    pub fn indicator(&self, exps: &[u64]) -> Vec<i128> {
        let mut v = vec![0i128; self.n];
        for &a in exps {
            v[a as usize % self.n] += 1;
        }
        v
    }

    pub fn sparse(v: &[i128]) -> Sparse {
        v.iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(i, &c)| (i, c))
            .collect()
    }

    /// `dense * sparse` in `Z[x]/(x^N - 1)`.
    pub fn mul_sparse(&self, dense: &[i128], sparse: &[(usize, i128)]) -> Option<Vec<i128>> {
        let n = self.n;
        let mut out = vec![0i128; n];
        for (i, &a) in dense.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for &(j, b) in sparse {
                let k = if i + j >= n { i + j - n } else { i + j };
                out[k] = out[k].checked_add(a.checked_mul(b)?)?;
            }
        }
        Some(out)
    }

    pub fn sub(&self, a: &[i128], b: &[i128]) -> Option<Vec<i128>> {
        a.iter().zip(b).map(|(x, y)| x.checked_sub(*y)).collect()
    }

    /// Reduce modulo `Phi_N`; the result has length `phi(N)`.
    pub fn reduce(&self, v: &[i128]) -> Option<Vec<i128>> {
        let d = self.phi_degree;
        let mut r = v.to_vec();
        for top in (d..r.len()).rev() {
            let c = r[top];
            if c == 0 {
                continue;
            }
            r[top] = 0;
            let off = top - d;
            for &(i, p) in &self.phi_low {
                r[off + i] = r[off + i].checked_sub(c.checked_mul(p)?)?;
            }
        }
        r.truncate(d);
        Some(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_of_primitive_roots_is_mobius() {
        // sum over a coprime to 15 of zeta^a = mu(15) = 1
        let ring = CycloRing::new(15).unwrap();
        let units: Vec<u64> = (1..15).filter(|a| num_integer::gcd(*a, 15) == 1).collect();
        let r = ring.reduce(&ring.indicator(&units)).unwrap();
        assert_eq!(r[0], 1);
        assert!(r[1..].iter().all(|&c| c == 0));
    }

    #[test]
    fn product_wraps_cyclically() {
        let ring = CycloRing::new(7).unwrap();
        let a = ring.indicator(&[6]);
        let b = CycloRing::sparse(&ring.indicator(&[3]));
        let p = ring.mul_sparse(&a, &b).unwrap();
        assert_eq!(p[2], 1);
    }
}
