use num_bigint::BigInt;
use num_integer::binomial;

use crate::exact_q::{QError, QTable};
use crate::numerics::Rat;

/// `a0 a4 - 4 a1 a3 + 3 a2^2`.
pub fn invariant_a(a: &[BigInt; 5]) -> BigInt {
    &a[0] * &a[4] - 4 * &a[1] * &a[3] + 3 * &a[2] * &a[2]
}

/// `-a0 a2 a4 + a2^3 + a0 a3^2 + a1^2 a4 - 2 a1 a2 a3`.
pub fn invariant_b(a: &[BigInt; 5]) -> BigInt {
    -(&a[0] * &a[2] * &a[4]) + &a[2] * &a[2] * &a[2] + &a[0] * &a[3] * &a[3] + &a[1] * &a[1] * &a[4]
        - 2 * &a[1] * &a[2] * &a[3]
}

/// `A^3 - 27 B^2`.
pub fn invariant_i(a: &[BigInt; 5]) -> BigInt {
    let ai = invariant_a(a);
    let bi = invariant_b(a);
    &ai * &ai * &ai - 27 * &bi * &bi
}

/// `[q(n), ..., q(n + K - 1)]`.
pub fn window<const K: usize>(t: &QTable, n: usize) -> Result<[BigInt; K], QError> {
    t.ensure_range(n, n, K - 1)?;
    Ok(std::array::from_fn(|i| t.qi(n + i)))
}

/// Order-`m` Laguerre expression
/// `1/2 sum_{k=0}^{2m} (-1)^{k+m} C(2m, k) q(n+k) q(n+2m-k)`.
pub fn laguerre(m: u32, t: &QTable, n: usize) -> Result<Rat, QError> {
    let m = m as usize;
    t.ensure_range(n, n, 2 * m)?;
    let mut sum = BigInt::from(0);
    for k in 0..=2 * m {
        let term = binomial(BigInt::from(2 * m), BigInt::from(k)) * t.qi(n + k) * t.qi(n + 2 * m - k);
        if (k + m).is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Ok(Rat::new(sum, BigInt::from(2)))
}
