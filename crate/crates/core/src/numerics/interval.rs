use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::dyadic::{Dyadic, Round};
use super::{NumericsError, Precision};

/// A closed interval `[lo, hi]` with dyadic endpoints.
///
/// Every operation returns an interval containing the exact image of its
/// inputs; endpoints are rounded outward to the requested precision.
#[derive(Clone, PartialEq, Eq)]
pub struct Interval {
    lo: Dyadic,
    hi: Dyadic,
}

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Result<Self, NumericsError> {
        if lo > hi {
            return Err(NumericsError::InvertedInterval);
        }
        Ok(Self { lo, hi })
    }

    pub(crate) fn new_unchecked(lo: Dyadic, hi: Dyadic) -> Self {
        debug_assert!(lo <= hi, "inverted interval {lo:?} > {hi:?}");
        Self { lo, hi }
    }

    pub fn point(d: Dyadic) -> Self {
        Self { lo: d.clone(), hi: d }
    }

    pub fn from_int(v: i64) -> Self {
        Self::point(Dyadic::from_int(v))
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        Self::point(Dyadic::from_bigint(v.clone()))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_rational(r: &BigRational, prec: Precision) -> Self {
        Self {
            lo: Dyadic::from_rational(r, prec.bits(), Round::Down),
            hi: Dyadic::from_rational(r, prec.bits(), Round::Up),
        }
    }

    pub fn from_ratio(num: i64, den: i64, prec: Precision) -> Self {
        Self::from_rational(&BigRational::new(num.into(), den.into()), prec)
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn into_bounds(self) -> (Dyadic, Dyadic) {
        (self.lo, self.hi)
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn midpoint(&self) -> Dyadic {
        self.lo.add(&self.hi).shl(-1)
    }

    pub fn contains(&self, d: &Dyadic) -> bool {
        &self.lo <= d && d <= &self.hi
    }

    pub fn contains_rational(&self, r: &BigRational) -> bool {
        &self.lo.to_rational() <= r && r <= &self.hi.to_rational()
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    /// Strictly positive on the whole interval.
    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    /// Strictly negative on the whole interval.
    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    /// Largest absolute value attained.
    pub fn mag(&self) -> Dyadic {
        let a = self.lo.abs();
        let b = self.hi.abs();
        if a > b {
            a
        } else {
            b
        }
    }

    /// Smallest absolute value attained.
    pub fn mig(&self) -> Dyadic {
        if self.contains_zero() {
            Dyadic::zero()
        } else if self.lo.is_positive() {
            self.lo.clone()
        } else {
            self.hi.abs()
        }
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Self {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    /// `[-r, r]` for `r >= 0`.
    pub fn symmetric(r: Dyadic) -> Self {
        let r = r.abs();
        Self { lo: r.neg(), hi: r }
    }

    pub fn round(&self, prec: Precision) -> Self {
        Self {
            lo: self.lo.round(prec.bits(), Round::Down),
            hi: self.hi.round(prec.bits(), Round::Up),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
        }
    }

    pub fn add(&self, other: &Interval, prec: Precision) -> Self {
        Self {
            lo: self.lo.add(&other.lo).round(prec.bits(), Round::Down),
            hi: self.hi.add(&other.hi).round(prec.bits(), Round::Up),
        }
    }

    pub fn sub(&self, other: &Interval, prec: Precision) -> Self {
        Self {
            lo: self.lo.sub(&other.hi).round(prec.bits(), Round::Down),
            hi: self.hi.sub(&other.lo).round(prec.bits(), Round::Up),
        }
    }

    pub fn mul(&self, other: &Interval, prec: Precision) -> Self {
        let p = prec.bits();
        if !self.lo.is_negative() && !other.lo.is_negative() {
            return Self {
                lo: self.lo.mul(&other.lo).round(p, Round::Down),
                hi: self.hi.mul(&other.hi).round(p, Round::Up),
            };
        }
        let cands = [
            self.lo.mul(&other.lo),
            self.lo.mul(&other.hi),
            self.hi.mul(&other.lo),
            self.hi.mul(&other.hi),
        ];
        let lo = cands.iter().min().unwrap().round(p, Round::Down);
        let hi = cands.iter().max().unwrap().round(p, Round::Up);
        Self { lo, hi }
    }

    /// Multiplication by an exact dyadic scalar.
    pub fn scale(&self, k: &Dyadic, prec: Precision) -> Self {
        let p = prec.bits();
        let a = self.lo.mul(k);
        let b = self.hi.mul(k);
        let (lo, hi) = if k.is_negative() { (b, a) } else { (a, b) };
        Self {
            lo: lo.round(p, Round::Down),
            hi: hi.round(p, Round::Up),
        }
    }

    /// Multiplication by `2^k`, exact.
    pub fn shl(&self, k: i64) -> Self {
        Self {
            lo: self.lo.shl(k),
            hi: self.hi.shl(k),
        }
    }

    pub fn sqr(&self, prec: Precision) -> Self {
        let p = prec.bits();
        if self.contains_zero() {
            let m = self.mag();
            return Self {
                lo: Dyadic::zero(),
                hi: m.mul(&m).round(p, Round::Up),
            };
        }
        let a = self.mig();
        let b = self.mag();
        Self {
            lo: a.mul(&a).round(p, Round::Down),
            hi: b.mul(&b).round(p, Round::Up),
        }
    }

    pub fn recip(&self, prec: Precision) -> Result<Self, NumericsError> {
        if self.contains_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        let one = Dyadic::one();
        Ok(Self {
            lo: Dyadic::div_round(&one, &self.hi, prec.bits(), Round::Down),
            hi: Dyadic::div_round(&one, &self.lo, prec.bits(), Round::Up),
        })
    }

    pub fn div(&self, other: &Interval, prec: Precision) -> Result<Self, NumericsError> {
        if other.contains_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        let p = prec.bits();
        let (a, b) = (&self.lo, &self.hi);
        let (c, d) = (&other.lo, &other.hi);
        // Quotient extremes are attained at endpoint pairs.
        let pairs = [(a, c), (a, d), (b, c), (b, d)];
        let lo = pairs
            .iter()
            .map(|(x, y)| Dyadic::div_round(x, y, p, Round::Down))
            .min()
            .unwrap();
        let hi = pairs
            .iter()
            .map(|(x, y)| Dyadic::div_round(x, y, p, Round::Up))
            .max()
            .unwrap();
        Ok(Self { lo, hi })
    }

    /// Integer power; negative exponents go through the reciprocal.
    pub fn powi(&self, k: i32, prec: Precision) -> Result<Self, NumericsError> {
        if k < 0 {
            return self.powi(-k, prec)?.recip(prec);
        }
        let k = k as u32;
        if k == 0 {
            return Ok(Self::one());
        }
        let p = prec.bits();
        let lo_k = || self.lo.powi(k);
        let hi_k = || self.hi.powi(k);
        let out = if k % 2 == 1 || !self.lo.is_negative() {
            Self {
                lo: lo_k().round(p, Round::Down),
                hi: hi_k().round(p, Round::Up),
            }
        } else if !self.hi.is_positive() {
            Self {
                lo: hi_k().round(p, Round::Down),
                hi: lo_k().round(p, Round::Up),
            }
        } else {
            Self {
                lo: Dyadic::zero(),
                hi: self.mag().powi(k).round(p, Round::Up),
            }
        };
        Ok(out)
    }

    pub fn to_f64(&self) -> f64 {
        self.midpoint().to_f64()
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            self.lo.to_sci_string(20, Round::Down),
            self.hi.to_sci_string(20, Round::Up)
        )
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(bits: u32) -> Precision {
        Precision::new(bits).unwrap()
    }

    fn iv(a: i64, b: i64) -> Interval {
        Interval::new(Dyadic::from_int(a), Dyadic::from_int(b)).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn add_exact_endpoints() {
        assert_eq!(iv(1, 2).add(&iv(3, 4), p(53)), iv(4, 6));
    }

    #[test]
    fn mul_sign_analysis() {
        let r = iv(-1, 1).mul(&iv(-1, 1), p(53));
        assert!(r.contains_interval(&iv(-1, 1)));
        let sq = iv(-1, 1).sqr(p(53));
        assert_eq!(sq, iv(0, 1));
    }

    #[test]
    fn third_width() {
        let r = Interval::one().div(&Interval::from_int(3), p(53)).unwrap();
        assert!(r.contains_rational(&rat(1, 3)));
        assert!(r.width() <= Dyadic::pow2(-50));
    }

    #[test]
    fn division_by_zero_interval() {
        assert_eq!(iv(1, 2).div(&iv(-1, 1), p(53)), Err(NumericsError::DivisionByZero));
        assert!(iv(0, 0).recip(p(53)).is_err());
    }

    #[test]
    fn even_power_straddling_zero() {
        let r = iv(-2, 1).powi(2, p(53)).unwrap();
        assert_eq!(r, iv(0, 4));
        let r = iv(-2, -1).powi(3, p(53)).unwrap();
        assert_eq!(r, iv(-8, -1));
        let r = iv(2, 4).powi(-1, p(53)).unwrap();
        assert!(r.contains_rational(&rat(1, 4)) && r.contains_rational(&rat(1, 2)));
    }

    #[test]
    fn inverted_rejected() {
        assert!(Interval::new(Dyadic::from_int(2), Dyadic::from_int(1)).is_err());
    }

    fn small_rat() -> impl Strategy<Value = BigRational> {
        (-10_000i64..10_000, 1i64..5_000).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn binary_ops_contain_exact_result(a in small_rat(), b in small_rat(), bits in 16u32..120) {
            let prec = p(bits);
            let ia = Interval::from_rational(&a, prec);
            let ib = Interval::from_rational(&b, prec);
            prop_assert!(ia.add(&ib, prec).contains_rational(&(&a + &b)));
            prop_assert!(ia.sub(&ib, prec).contains_rational(&(&a - &b)));
            prop_assert!(ia.mul(&ib, prec).contains_rational(&(&a * &b)));
            prop_assert!(ia.neg().contains_rational(&(-&a)));
            prop_assert!(ia.sqr(prec).contains_rational(&(&a * &a)));
            let cube = &a * &a * &a;
            prop_assert!(ia.powi(3, prec).unwrap().contains_rational(&cube));
            if !ib.contains_zero() {
                prop_assert!(ia.div(&ib, prec).unwrap().contains_rational(&(&a / &b)));
            }
        }
    }
}
