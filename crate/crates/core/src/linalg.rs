//! Small dense linear algebra on row-major `Vec<Vec<T>>` matrices.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::scalar::{Field, Ring};

pub type Matrix<T> = Vec<Vec<T>>;

pub fn identity<T: Ring>(n: usize) -> Matrix<T> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect()
}

pub fn transpose<T: Clone>(m: &Matrix<T>) -> Matrix<T> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len())
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn mat_mul<T: Ring>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(T::zero(), |acc, k| acc + row[k].clone() * b[k][j].clone())
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec<T: Ring>(a: &Matrix<T>, v: &[T]) -> Vec<T> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
        })
        .collect()
}

/// Row index of a usable pivot in column `col` at or below `from`.
/// `Err(())` when the column is not certifiably zero but has no certified
/// invertible entry (interval scalars only).
fn pick_pivot<T: Field>(m: &Matrix<T>, col: usize, from: usize) -> Result<Option<usize>, ()> {
    let mut best: Option<(usize, f64)> = None;
    let mut all_zero = true;
    for (r, row) in m.iter().enumerate().skip(from) {
        let v = &row[col];
        if !v.is_zero() {
            all_zero = false;
        }
        if v.is_invertible() {
            let mag = v.magnitude();
            if best.is_none_or(|(_, b)| mag > b) {
                best = Some((r, mag));
            }
        }
    }
    match best {
        Some((r, _)) => Ok(Some(r)),
        None if all_zero => Ok(None),
        None => Err(()),
    }
}

/// Determinant by Gaussian elimination. `None` if an interval pivot could not
/// be certified nonzero.
pub fn det<T: Field>(m: &Matrix<T>) -> Option<T> {
    let n = m.len();
    let mut a = m.clone();
    let mut acc = T::one();
    for c in 0..n {
        let Some(p) = pick_pivot(&a, c, c).ok()? else {
            return Some(T::zero());
        };
        if p != c {
            a.swap(p, c);
            acc = -acc;
        }
        let piv = a[c][c].clone();
        acc = acc * piv.clone();
        for r in c + 1..n {
            let f = a[r][c].clone() / piv.clone();
            if f.is_zero() {
                continue;
            }
            for k in c..n {
                let t = f.clone() * a[c][k].clone();
                a[r][k] = a[r][k].clone() - t;
            }
        }
    }
    Some(acc)
}

/// Inverse by Gauss-Jordan; `None` if singular or not certifiably invertible.
pub fn inverse<T: Field>(m: &Matrix<T>) -> Option<Matrix<T>> {
    let n = m.len();
    let mut a = m.clone();
    let mut inv = identity::<T>(n);
    for c in 0..n {
        let p = pick_pivot(&a, c, c).ok()??;
        a.swap(p, c);
        inv.swap(p, c);
        let piv = a[c][c].clone();
        for k in 0..n {
            a[c][k] = a[c][k].clone() / piv.clone();
            inv[c][k] = inv[c][k].clone() / piv.clone();
        }
        for r in 0..n {
            if r == c {
                continue;
            }
            let f = a[r][c].clone();
            if f.is_zero() {
                continue;
            }
            for k in 0..n {
                let t = f.clone() * a[c][k].clone();
                a[r][k] = a[r][k].clone() - t;
                let t = f.clone() * inv[c][k].clone();
                inv[r][k] = inv[r][k].clone() - t;
            }
        }
    }
    Some(inv)
}

/// Solve `m x = b` for square `m`.
pub fn solve<T: Field>(m: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let inv = inverse(m)?;
    Some(mat_vec(&inv, b))
}

/// Fraction-free (Bareiss) determinant of an integer matrix.
pub fn bareiss_det(m: &Matrix<BigInt>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(r, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int_rat;
    use num_rational::BigRational;

    fn q(m: &[&[i64]]) -> Matrix<BigRational> {
        m.iter()
            .map(|r| r.iter().map(|&v| int_rat(v)).collect())
            .collect()
    }

    fn z(m: &[&[i64]]) -> Matrix<BigInt> {
        m.iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect()
    }

    #[test]
    fn determinants_agree() {
        let rows: &[&[i64]] = &[
            &[2, -1, 0, 3],
            &[1, 4, 2, -2],
            &[0, 5, -3, 1],
            &[7, 0, 1, 1],
        ];
        let exact = det(&q(rows)).unwrap();
        assert_eq!(exact, BigRational::from_integer(bareiss_det(&z(rows))));
        let fl: Matrix<f64> = rows
            .iter()
            .map(|r| r.iter().map(|&v| v as f64).collect())
            .collect();
        let approx = det(&fl).unwrap();
        assert!((approx - exact.numer().to_string().parse::<f64>().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn singular_matrix() {
        let rows: &[&[i64]] = &[&[1, 2], &[2, 4]];
        assert!(det(&q(rows)).unwrap().is_zero());
        assert!(inverse(&q(rows)).is_none());
        assert!(bareiss_det(&z(rows)).is_zero());
    }

    #[test]
    fn inverse_roundtrip() {
        let m = q(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = inverse(&m).unwrap();
        assert_eq!(mat_mul(&m, &inv), identity(3));
        let x = solve(&m, &[int_rat(1), int_rat(2), int_rat(3)]).unwrap();
        assert_eq!(mat_vec(&m, &x), vec![int_rat(1), int_rat(2), int_rat(3)]);
    }

    #[test]
    fn bareiss_needs_pivoting() {
        let rows: &[&[i64]] = &[&[0, 1, 2], &[1, 0, 3], &[4, -3, 8]];
        assert_eq!(bareiss_det(&z(rows)), BigInt::from(-2));
    }
}
