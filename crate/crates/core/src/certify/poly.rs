use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use rayon::prelude::*;

use crate::expansion::RingElem;
use crate::numerics::{Interval, Precision, Rat};

/// Polynomial in `x` with exact coefficients in Q[pi, 1/pi, sqrt3].
/// Trailing zero coefficients are trimmed.
#[derive(Debug, Default)]
pub struct RingPoly {
    coeffs: Vec<RingElem>,
    cache: Mutex<HashMap<u32, Vec<Interval>>>,
}

impl Clone for RingPoly {
    fn clone(&self) -> Self {
        Self::new(self.coeffs.clone())
    }
}

impl PartialEq for RingPoly {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Eq for RingPoly {}

impl RingPoly {
    pub fn new(mut coeffs: Vec<RingElem>) -> Self {
        while coeffs.last().is_some_and(RingElem::is_zero) {
            coeffs.pop();
        }
        Self {
            coeffs,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn constant(c: RingElem) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(RingElem::one())
    }

    /// `c x^k`.
    pub fn monomial(c: RingElem, k: usize) -> Self {
        let mut v = vec![RingElem::zero(); k];
        v.push(c);
        Self::new(v)
    }

    pub fn coeffs(&self) -> &[RingElem] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> RingElem {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Number of exactly vanishing low-order coefficients.
    pub fn low_zero_count(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// Divides by `x^d` where `d` is the number of vanishing low-order coefficients.
    pub fn strip_low_zeros(&self) -> (usize, RingPoly) {
        let d = self.low_zero_count();
        (d, Self::new(self.coeffs[d..].to_vec()))
    }

    pub fn scale(&self, r: &Rat) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.scale(r)).collect())
    }

    pub fn scale_ring(&self, r: &RingElem) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * r).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.scale(&Rat::from_integer((k as i64).into())))
                .collect(),
        )
    }

    /// Coefficient enclosures at `prec`, computed once per precision.
    pub fn coeff_intervals(&self, prec: Precision) -> Vec<Interval> {
        let mut cache = self.cache.lock().unwrap();
        cache
            .entry(prec.bits())
            .or_insert_with(|| self.coeffs.iter().map(|c| c.eval(prec)).collect())
            .clone()
    }

    /// Interval Horner evaluation.
    pub fn eval(&self, x: &Interval, prec: Precision) -> Interval {
        horner(&self.coeff_intervals(prec), x, prec)
    }
}

pub fn horner(cs: &[Interval], x: &Interval, prec: Precision) -> Interval {
    let mut acc = Interval::zero();
    for c in cs.iter().rev() {
        acc = acc.mul(x, prec).add(c, prec);
    }
    acc
}

impl From<RingElem> for RingPoly {
    fn from(c: RingElem) -> Self {
        Self::constant(c)
    }
}

impl<'a> Add<&'a RingPoly> for &'a RingPoly {
    type Output = RingPoly;
    fn add(self, rhs: &RingPoly) -> RingPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RingPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<'a> Sub<&'a RingPoly> for &'a RingPoly {
    type Output = RingPoly;
    fn sub(self, rhs: &RingPoly) -> RingPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RingPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<'a> Mul<&'a RingPoly> for &'a RingPoly {
    type Output = RingPoly;
    fn mul(self, rhs: &RingPoly) -> RingPoly {
        if self.is_zero() || rhs.is_zero() {
            return RingPoly::zero();
        }
        // integer numerators over one common denominator per factor
        let a = Scaled::new(self);
        let b = Scaled::new(rhs);
        let den = &a.den * &b.den;
        let len = a.coeffs.len() + b.coeffs.len() - 1;
        let out = (0..len)
            .into_par_iter()
            .map(|k| {
                let mut acc: HashMap<(i32, u8), BigInt> = HashMap::new();
                let lo = k.saturating_sub(b.coeffs.len() - 1);
                for i in lo..=k.min(a.coeffs.len() - 1) {
                    for (ka, na) in &a.coeffs[i] {
                        for (kb, nb) in &b.coeffs[k - i] {
                            let mut v = na * nb;
                            let j = ka.1 + kb.1;
                            if j == 2 {
                                v *= 3;
                            }
                            *acc.entry((ka.0 + kb.0, j % 2)).or_default() += v;
                        }
                    }
                }
                RingElem::from_terms(acc.into_iter().map(|(key, v)| (key, Rat::new(v, den.clone()))))
            })
            .collect();
        RingPoly::new(out)
    }
}

struct Scaled {
    den: BigInt,
    coeffs: Vec<Vec<((i32, u8), BigInt)>>,
}

impl Scaled {
    fn new(p: &RingPoly) -> Self {
        let mut den = BigInt::one();
        for c in &p.coeffs {
            for (_, _, r) in c.terms() {
                den = den.lcm(r.denom());
            }
        }
        let coeffs = p
            .coeffs
            .iter()
            .map(|c| {
                c.terms()
                    .map(|(i, j, r)| ((i, j), r.numer() * (&den / r.denom())))
                    .collect()
            })
            .collect();
        Self { den, coeffs }
    }
}

impl Neg for &RingPoly {
    type Output = RingPoly;
    fn neg(self) -> RingPoly {
        RingPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(n: i64) -> RingElem {
        RingElem::int(n)
    }

    #[test]
    fn arithmetic() {
        let p = RingPoly::new(vec![int(1), int(1)]);
        let sq = &p * &p;
        assert_eq!(sq.coeffs(), &[int(1), int(2), int(1)]);
        assert!((&sq - &sq).is_zero());
        assert_eq!(sq.derivative().coeffs(), &[int(2), int(2)]);
        assert_eq!(p.pow(3).degree(), Some(3));
    }

    #[test]
    fn stripping() {
        let p = RingPoly::new(vec![RingElem::zero(), RingElem::zero(), int(1)]);
        let (d, r) = p.strip_low_zeros();
        assert_eq!(d, 2);
        assert_eq!(r, RingPoly::one());
    }

    #[test]
    fn horner_contains_values() {
        let prec = Precision::new(64).unwrap();
        let p = RingPoly::new(vec![int(1), int(-3), int(2)]);
        let v = p.eval(&Interval::from_int(3), prec);
        assert_eq!(v, Interval::from_int(10));
    }
}
