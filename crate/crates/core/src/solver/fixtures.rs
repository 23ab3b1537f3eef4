//! Arithmetic-only checks of two known families of exceptional units.

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::cyclofield::real_cyclotomic_field;
use crate::error::{Error, Result};
use crate::polyring::{discriminant, resultant};
use crate::IntPoly;

/// `2 + zeta_p + zeta_p^-1` is exceptional in the real cyclotomic field of
/// conductor `p`, paired with `-1 - zeta_p - zeta_p^-1`.
pub fn sophie_germain_check(p: u64) -> Result<bool> {
    let f = real_cyclotomic_field(p)?;
    let lambda = f.add(&f.from_int(2), &f.eta())?;
    super::verify_solution(&f, &lambda)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NagellRecord {
    pub k: i64,
    pub exceptional: bool,
    #[serde(with = "crate::polyring::bigint_str")]
    pub norm_lambda: BigInt,
    #[serde(with = "crate::polyring::bigint_str")]
    pub norm_one_minus_lambda: BigInt,
    #[serde(with = "crate::polyring::bigint_str")]
    pub disc: BigInt,
}

/// `g_k = X^3 + k X^2 - (k + 3) X + 1`.
pub fn nagell_cubic(k: i64) -> IntPoly {
    IntPoly::from_ints(&[1, -(k + 3), k, 1])
}

/// Norms of a root `lambda` of `g_k` and of `1 - lambda`, via resultants.
pub fn nagell_cubic_check(k: i64) -> Result<NagellRecord> {
    if k < -1 {
        return Err(Error::InvalidInput(format!("k must be >= -1, got {k}")));
    }
    let g = nagell_cubic(k);
    // Res(g, h) = prod h(root) for monic g
    let norm_lambda = resultant(&g, &IntPoly::from_ints(&[0, 1]));
    let norm_one_minus_lambda = resultant(&g, &IntPoly::from_ints(&[1, -1]));
    let exceptional = norm_lambda.abs().is_one() && norm_one_minus_lambda.abs().is_one();
    Ok(NagellRecord {
        k,
        exceptional,
        norm_lambda,
        norm_one_minus_lambda,
        disc: discriminant(&g),
    })
}
