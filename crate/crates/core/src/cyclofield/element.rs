//! Elements of a [`CyclicField`] in the power basis `1, eta, ..., eta^(m-1)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::CyclicField;
use crate::error::{Error, Result};
use crate::polyring::{factor_mod_p_shape, resultant, roots_mod_p};
use crate::real::Ball;
use crate::scalar::int_rat;
use crate::{IntPoly, QPoly, RatPoly};

/// `(c_0 + c_1 eta + ... + c_{m-1} eta^(m-1)) / den`, with `den > 0` and
/// `gcd(c, den) = 1`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FieldElement {
    field: u64,
    coords: Vec<BigInt>,
    den: BigInt,
}

impl FieldElement {
    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn as_ratpoly(&self) -> RatPoly {
        RatPoly::new(IntPoly::new(self.coords.clone()), self.den.clone())
    }
}

impl CyclicField {
    fn make(&self, mut coords: Vec<BigInt>, den: BigInt) -> FieldElement {
        assert!(!den.is_zero(), "zero denominator");
        coords.resize(self.degree, BigInt::zero());
        let mut g = coords.iter().fold(den.clone(), |g, c| g.gcd(c));
        if den.is_negative() {
            g = -g;
        }
        let coords = coords.into_iter().map(|c| c / &g).collect();
        FieldElement {
            field: self.id,
            coords,
            den: den / g,
        }
    }

    fn check(&self, x: &FieldElement) -> Result<()> {
        if x.field != self.id {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    /// An element from power-basis coordinates over a common denominator.
    pub fn element(&self, coords: Vec<BigInt>, den: BigInt) -> Result<FieldElement> {
        if coords.len() > self.degree {
            return Err(Error::InvalidInput(format!(
                "{} coordinates for a degree-{} field",
                coords.len(),
                self.degree
            )));
        }
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.make(coords, den))
    }

    /// The class of a rational polynomial in `eta`.
    pub fn from_ratpoly(&self, p: &RatPoly) -> FieldElement {
        let r = p.numerator().rem_monic(&self.minpoly);
        self.make(r.into_coeffs(), p.denominator().clone())
    }

    pub fn from_int(&self, v: impl Into<BigInt>) -> FieldElement {
        self.make(vec![v.into()], BigInt::one())
    }

    pub fn from_rational(&self, q: &BigRational) -> FieldElement {
        self.make(vec![q.numer().clone()], q.denom().clone())
    }

    pub fn zero(&self) -> FieldElement {
        self.from_int(0)
    }

    pub fn one(&self) -> FieldElement {
        self.from_int(1)
    }

    /// The generator `eta = eta_{c_0}`.
    pub fn eta(&self) -> FieldElement {
        if self.degree == 1 {
            return self.from_int(self.minpoly.coeff(0) * -1);
        }
        self.make(vec![BigInt::zero(), BigInt::one()], BigInt::one())
    }

    /// The conjugate period `eta_{c_i}`.
    pub fn period(&self, i: usize) -> FieldElement {
        self.from_ratpoly(&self.galois_images[i % self.degree])
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| x * &b.den + y * &a.den)
            .collect();
        Ok(self.make(coords, &a.den * &b.den))
    }

    pub fn neg(&self, a: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        Ok(self.make(a.coords.iter().map(|c| -c).collect(), a.den.clone()))
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.add(a, &self.neg(b)?)
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        let pa = IntPoly::new(a.coords.clone());
        let pb = IntPoly::new(b.coords.clone());
        let prod = (&pa * &pb).rem_monic(&self.minpoly);
        Ok(self.make(prod.into_coeffs(), &a.den * &b.den))
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let pa: QPoly = IntPoly::new(a.coords.clone()).map(|c| int_rat(c.clone()));
        let f: QPoly = self.minpoly.map(|c| int_rat(c.clone()));
        let (g, s, _) = QPoly::ext_gcd(&pa, &f);
        if g.degree() != Some(0) {
            // the minimal polynomial is irreducible, so this cannot happen
            return Err(Error::FieldInvariant(
                "minimal polynomial is reducible".into(),
            ));
        }
        let r = RatPoly::from_qpoly(&s.scale(&int_rat(a.den.clone())));
        Ok(self.make(r.numerator().coeffs().to_vec(), r.denominator().clone()))
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.mul(a, &self.inv(b)?)
    }

    pub fn pow(&self, a: &FieldElement, e: i64) -> Result<FieldElement> {
        self.check(a)?;
        let mut base = if e < 0 { self.inv(a)? } else { a.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base)?;
            }
            k >>= 1;
            if k > 0 {
                base = self.mul(&base, &base)?;
            }
        }
        Ok(acc)
    }

    /// `N(a) = Res(minpoly, A) / den^m`.
    pub fn norm(&self, a: &FieldElement) -> Result<BigRational> {
        self.check(a)?;
        if a.is_zero() {
            return Ok(BigRational::zero());
        }
        let r = resultant(&self.minpoly, &IntPoly::new(a.coords.clone()));
        let d = num_traits::pow(a.den.clone(), self.degree);
        Ok(BigRational::new(r, d))
    }

    /// The trace, via the period coordinates (each period has trace `mu(N)`).
    pub fn trace(&self, a: &FieldElement) -> Result<BigRational> {
        let (y, d) = self.period_coords(a)?;
        let s: BigInt = y.iter().sum();
        Ok(BigRational::new(s * self.period_trace(), d))
    }

    /// Coordinates in the integral basis `eta_{c_0}, ..., eta_{c_{m-1}}`
    /// over a common positive denominator.
    pub fn period_coords(&self, a: &FieldElement) -> Result<(Vec<BigInt>, BigInt)> {
        self.check(a)?;
        let m = self.degree;
        let q: Vec<BigRational> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| &self.period_matrix_inv()[i][j] * &int_rat(a.coords[j].clone()))
                    .sum::<BigRational>()
                    / int_rat(a.den.clone())
            })
            .collect();
        let den = q.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let y = q.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        Ok((y, den))
    }

    /// The element `sum y_i eta_{c_i}` for integral `y`.
    pub fn from_period_coords(&self, y: &[BigInt]) -> Result<FieldElement> {
        self.from_period_coords_over(y, &BigInt::one())
    }

    pub fn from_period_coords_over(&self, y: &[BigInt], den: &BigInt) -> Result<FieldElement> {
        let m = self.degree;
        if y.len() != m {
            return Err(Error::InvalidInput(format!(
                "{} period coordinates for a degree-{m} field",
                y.len()
            )));
        }
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let q: Vec<BigRational> = (0..m)
            .map(|j| {
                (0..m)
                    .map(|i| &self.period_matrix()[j][i] * &int_rat(y[i].clone()))
                    .sum::<BigRational>()
            })
            .collect();
        let r = RatPoly::from_qpoly(&QPoly::new(q));
        Ok(self.make(r.numerator().coeffs().to_vec(), r.denominator() * den))
    }

    /// `sigma^k(a)` where `sigma(eta_{c_i}) = eta_{c_{i+1}}`.
    pub fn galois_apply(&self, k: usize, a: &FieldElement) -> Result<FieldElement> {
        let (y, d) = self.period_coords(a)?;
        let m = self.degree;
        let mut shifted = vec![BigInt::zero(); m];
        for (i, v) in y.into_iter().enumerate() {
            shifted[(i + k) % m] = v;
        }
        self.from_period_coords_over(&shifted, &d)
    }

    /// `sigma^k(a)` by substituting the image of `eta` into `a`.
    pub fn galois_apply_by_composition(&self, k: usize, a: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        let f: QPoly = self.minpoly.map(|c| int_rat(c.clone()));
        let pa: QPoly = a.as_ratpoly().to_qpoly();
        let img = self.galois_images[k % self.degree].to_qpoly();
        let r = RatPoly::from_qpoly(&pa.compose(&img, Some(&f)));
        Ok(self.make(r.numerator().coeffs().to_vec(), r.denominator().clone()))
    }

    /// Membership in the ring of integers.
    pub fn is_integral(&self, a: &FieldElement) -> Result<bool> {
        Ok(self.period_coords(a)?.1.is_one())
    }

    pub fn is_unit(&self, a: &FieldElement) -> Result<bool> {
        Ok(self.is_integral(a)? && self.norm(a)?.abs().is_one())
    }

    /// The images `sigma_k(a)`, `k = 0..m`, in the real embedding where
    /// `eta` goes to `eta_{c_k}`.
    pub fn embed(&self, a: &FieldElement, prec: u32) -> Result<Vec<Ball>> {
        let (y, d) = self.period_coords(a)?;
        let periods = self.periods(prec);
        let m = self.degree;
        let den = Ball::exact_int(d);
        let yb: Vec<Ball> = y.into_iter().map(Ball::exact_int).collect();
        Ok((0..m)
            .map(|k| {
                let s = (0..m).fold(Ball::zero(), |acc, i| {
                    &acc + &(&yb[i] * &periods[(i + k) % m])
                });
                &s / &den
            })
            .collect())
    }

    /// The residue of `a` at the unique prime above a totally ramified `p`,
    /// as an element of `F_p`.
    pub fn residue_mod_ramified(&self, a: &FieldElement, p: u64) -> Result<u64> {
        let shape = factor_mod_p_shape(&self.minpoly, p);
        if shape != vec![(1, self.degree)] {
            return Err(Error::RamificationAssumptionFailed { p, shape });
        }
        let a0 = roots_mod_p(&self.minpoly, p)[0];
        let (y, d) = self.period_coords(a)?;
        let pb = BigInt::from(p);
        let dm = d.mod_floor(&pb);
        if dm.is_zero() {
            return Err(Error::NotIntegralAt { p });
        }
        let dinv = crate::arith::mod_inverse(u64::try_from(dm).expect("reduced mod p"), p)
            .expect("p does not divide den");
        let s: BigInt = y.iter().sum::<BigInt>() * a0 * dinv;
        Ok(u64::try_from(s.mod_floor(&pb)).expect("reduced mod p"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclofield::subfields_of_conductor;
    use proptest::prelude::*;

    fn f341() -> Vec<CyclicField> {
        subfields_of_conductor(5, 341).unwrap()
    }

    #[test]
    fn eta_norm_and_trace() {
        let f = subfields_of_conductor(5, 11).unwrap().remove(0);
        let eta = f.eta();
        // minpoly x^5 + x^4 - 4x^3 - 3x^2 + 3x + 1 up to the sign convention
        assert_eq!(f.norm(&eta).unwrap(), -int_rat(f.minpoly().coeff(0)));
        assert_eq!(f.trace(&eta).unwrap(), -int_rat(f.minpoly().coeff(4)));
    }

    #[test]
    fn inverse_and_field_mismatch() {
        let fs = f341();
        let a = fs[0].add(&fs[0].eta(), &fs[0].from_int(3)).unwrap();
        let ai = fs[0].inv(&a).unwrap();
        assert_eq!(fs[0].mul(&a, &ai).unwrap(), fs[0].one());
        assert!(matches!(
            fs[0].add(&a, &fs[1].eta()),
            Err(Error::FieldMismatch)
        ));
        assert!(matches!(
            fs[0].inv(&fs[0].zero()),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn galois_paths_agree() {
        for f in f341() {
            let a = f
                .element(
                    vec![BigInt::from(2), BigInt::from(-1), BigInt::from(7)],
                    BigInt::from(3),
                )
                .unwrap();
            for k in 0..5 {
                assert_eq!(
                    f.galois_apply(k, &a).unwrap(),
                    f.galois_apply_by_composition(k, &a).unwrap()
                );
            }
            assert_eq!(f.galois_apply(5, &a).unwrap(), a);
        }
    }

    #[test]
    fn periods_are_integral_and_eta_over_index_is_not() {
        for f in f341() {
            for i in 0..5 {
                assert!(f.is_integral(&f.period(i)).unwrap());
            }
            if !f.index().is_one() {
                let x = f
                    .element(vec![BigInt::zero(), BigInt::one()], f.index().clone())
                    .unwrap();
                assert!(!f.is_integral(&x).unwrap());
            }
        }
    }

    #[test]
    fn residues_at_ramified_primes() {
        let f = subfields_of_conductor(5, 11).unwrap().remove(0);
        let eta = f.eta();
        // every period is congruent to the same root of minpoly mod 11
        let r = f.residue_mod_ramified(&eta, 11).unwrap();
        assert_eq!(r, roots_mod_p(f.minpoly(), 11)[0]);
        assert_eq!(f.residue_mod_ramified(&f.from_int(3), 11).unwrap(), 3);
        let half = f.element(vec![BigInt::one()], BigInt::from(11)).unwrap();
        assert!(matches!(
            f.residue_mod_ramified(&half, 11),
            Err(Error::NotIntegralAt { p: 11 })
        ));
        assert!(matches!(
            f.residue_mod_ramified(&eta, 23),
            Err(Error::RamificationAssumptionFailed { p: 23, .. })
        ));
    }

    #[test]
    fn embeddings_multiply() {
        let f = subfields_of_conductor(5, 31).unwrap().remove(0);
        let a = f.add(&f.eta(), &f.from_int(2)).unwrap();
        let b = f.sub(&f.period(2), &f.from_int(1)).unwrap();
        let ab = f.mul(&a, &b).unwrap();
        let (ea, eb, eab) = (
            f.embed(&a, 200).unwrap(),
            f.embed(&b, 200).unwrap(),
            f.embed(&ab, 200).unwrap(),
        );
        for k in 0..5 {
            assert!((&(&ea[k] * &eb[k]) - &eab[k]).contains_zero());
        }
        let n: Ball = ea.iter().fold(Ball::exact_int(1), |acc, x| &acc * x);
        assert!((&n - &Ball::from_rational(&f.norm(&a).unwrap(), 200)).contains_zero());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn norm_is_multiplicative(a in prop::collection::vec(-20i64..20, 5),
                                  b in prop::collection::vec(-20i64..20, 5)) {
            let f = subfields_of_conductor(5, 11).unwrap().remove(0);
            let to = |v: &Vec<i64>| f.element(v.iter().map(|&c| BigInt::from(c)).collect(), BigInt::one()).unwrap();
            let (x, y) = (to(&a), to(&b));
            let xy = f.mul(&x, &y).unwrap();
            prop_assert_eq!(f.norm(&xy).unwrap(), f.norm(&x).unwrap() * f.norm(&y).unwrap());
        }
    }
}
