use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Rounding direction for every lossy dyadic operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    /// Toward negative infinity.
    Down,
    /// Toward positive infinity.
    Up,
}

impl Round {
    pub fn flip(self) -> Self {
        match self {
            Round::Down => Round::Up,
            Round::Up => Round::Down,
        }
    }
}

/// An exact binary fraction `mantissa * 2^exponent`.
///
/// The representation is canonical: the mantissa is odd, or zero with a zero
/// exponent. Two dyadics are equal iff their fields are equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

fn shr_round(m: &BigInt, shift: u64, dir: Round) -> BigInt {
    match dir {
        // BigInt shifts are arithmetic (floor) shifts.
        Round::Down => m >> shift,
        Round::Up => -((-m) >> shift),
    }
}

fn div_round(num: &BigInt, den: &BigInt, dir: Round) -> BigInt {
    match dir {
        Round::Down => num.div_floor(den),
        Round::Up => -((-num).div_floor(den)),
    }
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        if mant.is_zero() {
            return Self::zero();
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        if tz == 0 {
            Self { mant, exp }
        } else {
            Self {
                mant: mant >> tz,
                exp: exp + tz as i64,
            }
        }
    }

    pub fn zero() -> Self {
        Self {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(v: i64) -> Self {
        Self::new(BigInt::from(v), 0)
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Self::new(v, 0)
    }

    /// `2^k`.
    pub fn pow2(k: i64) -> Self {
        Self {
            mant: BigInt::one(),
            exp: k,
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    /// Number of significant bits in the mantissa.
    pub fn bits(&self) -> u64 {
        self.mant.bits()
    }

    /// Exponent `e` with `2^(e-1) <= |self| < 2^e`; `None` for zero.
    pub fn magnitude(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exp + self.bits() as i64)
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    pub fn abs(&self) -> Self {
        Self {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    /// Multiplication by `2^k`, exact.
    pub fn shl(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        Self::new(a + b, e)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        // Product of odd mantissas is odd: already canonical.
        Self {
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
        }
    }

    /// Exact integer power.
    pub fn powi(&self, k: u32) -> Self {
        if k == 0 {
            return Self::one();
        }
        Self {
            mant: num_traits::pow(self.mant.clone(), k as usize),
            exp: self.exp * k as i64,
        }
    }

    /// Round to at most `prec` significant bits in direction `dir`.
    pub fn round(&self, prec: u32, dir: Round) -> Self {
        let bits = self.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = bits - prec as u64;
        Self::new(shr_round(&self.mant, shift, dir), self.exp + shift as i64)
    }

    /// `a / b` rounded to `prec` bits in direction `dir`. Panics if `b` is zero.
    pub fn div_round(a: &Self, b: &Self, prec: u32, dir: Round) -> Self {
        assert!(!b.is_zero(), "dyadic division by zero");
        if a.is_zero() {
            return Self::zero();
        }
        let k = (prec as i64 + b.bits() as i64 - a.bits() as i64 + 2).max(0) as u64;
        let num = &a.mant << k;
        let q = div_round(&num, &b.mant, dir);
        Self::new(q, a.exp - b.exp - k as i64).round(prec, dir)
    }

    /// Square root of a nonnegative dyadic rounded to `prec` bits.
    pub fn sqrt_round(&self, prec: u32, dir: Round) -> Self {
        assert!(!self.is_negative(), "square root of a negative dyadic");
        if self.is_zero() {
            return Self::zero();
        }
        let (mut m, mut e) = (self.mant.clone(), self.exp);
        if e.rem_euclid(2) != 0 {
            m <<= 1u32;
            e -= 1;
        }
        let want = 2 * prec as i64 + 4;
        let k = ((want - m.bits() as i64 + 1) / 2).max(0);
        let scaled = m << (2 * k) as u64;
        let mut s = scaled.sqrt();
        if dir == Round::Up && &s * &s < scaled {
            s += 1u32;
        }
        Self::new(s, e / 2 - k).round(prec, dir)
    }

    /// Nearest dyadic of `prec` bits on the `dir` side of `r`.
    pub fn from_rational(r: &BigRational, prec: u32, dir: Round) -> Self {
        let num = Self::from_bigint(r.numer().clone());
        let den = Self::from_bigint(r.denom().clone());
        if r.denom().is_one() {
            return num.round(prec, dir);
        }
        Self::div_round(&num, &den, prec, dir)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as u64)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            shr_round(&self.mant, (-self.exp) as u64, Round::Down)
        }
    }

    pub fn ceil(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            shr_round(&self.mant, (-self.exp) as u64, Round::Up)
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let r = self.round(60, Round::Down);
        let m = r.mant.to_f64().unwrap_or(f64::NAN);
        m * 2f64.powi(r.exp.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
    }

    /// Scientific decimal string with `digits` significant digits, rounded in
    /// direction `dir` (so the printed value is a bound on the requested side).
    pub fn to_sci_string(&self, digits: usize, dir: Round) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let digits = digits.max(1);
        let log10_2 = std::f64::consts::LN_2 / std::f64::consts::LN_10;
        let mag = self.magnitude().unwrap_or(0) as f64 * log10_2;
        let e10 = mag.floor() as i64;
        let k = digits as i64 - 1 - e10;
        let r = self.to_rational();
        let scaled = if k >= 0 {
            r * BigRational::from_integer(num_traits::pow(BigInt::from(10), k as usize))
        } else {
            r / BigRational::from_integer(num_traits::pow(BigInt::from(10), (-k) as usize))
        };
        let n = match dir {
            Round::Down => scaled.floor().to_integer(),
            Round::Up => scaled.ceil().to_integer(),
        };
        let neg = n.is_negative();
        let s = n.abs().to_string();
        let exp10 = s.len() as i64 - 1 - k;
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(&s[..1]);
        if s.len() > 1 {
            out.push('.');
            out.push_str(&s[1..]);
        }
        out.push_str(&format!("e{exp10}"));
        out
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        // Same nonzero sign: compare magnitudes first, cheaply.
        let (ma, mb) = (self.magnitude().unwrap(), other.magnitude().unwrap());
        if ma != mb {
            let by_mag = ma.cmp(&mb);
            return if sa > 0 { by_mag } else { by_mag.reverse() };
        }
        self.sub(other).signum().cmp(&0)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mant, self.exp)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci_string(20, Round::Down))
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Self::from_int(v)
    }
}

impl From<BigInt> for Dyadic {
    fn from(v: BigInt) -> Self {
        Self::from_bigint(v)
    }
}
