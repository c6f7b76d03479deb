use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::numerics::{enclose_pi, enclose_sqrt, Interval, Precision, Rat};

/// Exact element of Q[pi, 1/pi, sqrt3]: a finite sum of `r * pi^i * sqrt3^j`
/// with `j` in {0, 1}. Zero coefficients are never stored, so the zero
/// element is exactly the empty map.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RingElem {
    terms: BTreeMap<(i32, u8), Rat>,
}

impl RingElem {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::rat(Rat::one())
    }

    pub fn rat(r: Rat) -> Self {
        Self::monomial(r, 0, 0)
    }

    pub fn int(n: i64) -> Self {
        Self::rat(Rat::from_integer(n.into()))
    }

    /// `r * pi^i * sqrt3^j` for any `j >= 0`; even powers of sqrt3 are folded.
    pub fn monomial(r: Rat, i: i32, j: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            let fold = Rat::from_integer(num_bigint::BigInt::from(3).pow(j / 2));
            terms.insert((i, (j % 2) as u8), r * fold);
        }
        Self { terms }
    }

    /// Sum of `r * pi^i * sqrt3^j` over `((i, j), r)` with `j` in {0, 1}.
    pub fn from_terms(it: impl IntoIterator<Item = ((i32, u8), Rat)>) -> Self {
        let mut e = Self::zero();
        for (k, r) in it {
            debug_assert!(k.1 < 2);
            e.accumulate(k, r);
        }
        e
    }

    pub fn pi_pow(i: i32) -> Self {
        Self::monomial(Rat::one(), i, 0)
    }

    pub fn sqrt3() -> Self {
        Self::monomial(Rat::one(), 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, u8, &Rat)> {
        self.terms.iter().map(|(&(i, j), r)| (i, j, r))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The rational value, if the element has no pi or sqrt3 part.
    pub fn as_rational(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => self.terms.get(&(0, 0)).cloned(),
            _ => None,
        }
    }

    fn accumulate(&mut self, key: (i32, u8), r: Rat) {
        if r.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(r);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += r;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, r: &Rat) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, v)| (*k, v * r)).collect(),
        }
    }

    /// Multiply by `pi^i`.
    pub fn shift_pi(&self, i: i32) -> Self {
        Self {
            terms: self.terms.iter().map(|(&(a, b), v)| ((a + i, b), v.clone())).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Certified enclosure of the real value.
    pub fn eval(&self, prec: Precision) -> Interval {
        let wp = prec.with_guard(32);
        if self.terms.is_empty() {
            return Interval::zero();
        }
        let pi = enclose_pi(wp);
        let s3 = enclose_sqrt(&Interval::from_int(3), wp).expect("3 > 0");
        let mut acc = Interval::zero();
        for (&(i, j), r) in &self.terms {
            let mut t = Interval::from_rational(r, wp);
            if i != 0 {
                t = t.mul(&pi.powi(i, wp).expect("pi > 0"), wp);
            }
            if j == 1 {
                t = t.mul(&s3, wp);
            }
            acc = acc.add(&t, wp);
        }
        acc.round(prec)
    }

    pub fn to_f64(&self) -> f64 {
        let pi = std::f64::consts::PI;
        let s3 = 3f64.sqrt();
        self.terms
            .iter()
            .map(|(&(i, j), r)| r.to_f64().unwrap_or(f64::NAN) * pi.powi(i) * if j == 1 { s3 } else { 1.0 })
            .sum()
    }
}

impl From<Rat> for RingElem {
    fn from(r: Rat) -> Self {
        Self::rat(r)
    }
}

impl<'a> Add<&'a RingElem> for &'a RingElem {
    type Output = RingElem;
    fn add(self, rhs: &RingElem) -> RingElem {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.accumulate(*k, v.clone());
        }
        out
    }
}

impl<'a> Sub<&'a RingElem> for &'a RingElem {
    type Output = RingElem;
    fn sub(self, rhs: &RingElem) -> RingElem {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.accumulate(*k, -v.clone());
        }
        out
    }
}

impl<'a> Mul<&'a RingElem> for &'a RingElem {
    type Output = RingElem;
    fn mul(self, rhs: &RingElem) -> RingElem {
        let three = Rat::from_integer(3.into());
        let mut out = RingElem::zero();
        for (&(i1, j1), a) in &self.terms {
            for (&(i2, j2), b) in &rhs.terms {
                let mut c = a * b;
                let j = j1 + j2;
                if j == 2 {
                    c *= &three;
                }
                out.accumulate((i1 + i2, j % 2), c);
            }
        }
        out
    }
}

impl Neg for &RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        RingElem {
            terms: self.terms.iter().map(|(k, v)| (*k, -v.clone())).collect(),
        }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for RingElem {
            type Output = RingElem;
            fn $m(self, rhs: RingElem) -> RingElem { (&self).$m(&rhs) }
        }
        impl<'a> $tr<&'a RingElem> for RingElem {
            type Output = RingElem;
            fn $m(self, rhs: &RingElem) -> RingElem { (&self).$m(rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        -&self
    }
}

impl std::iter::Sum for RingElem {
    fn sum<I: Iterator<Item = RingElem>>(iter: I) -> Self {
        iter.fold(RingElem::zero(), |a, b| a + b)
    }
}

/// Terms as `(p/q) pi^i sqrt3^j`, joined by ` + `, in increasing `(i, j)`.
impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (&(i, j), r)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            if r.is_integer() {
                write!(f, "({}/1)", r.numer())?;
            } else {
                write!(f, "({}/{})", r.numer(), r.denom())?;
            }
            write!(f, " pi^{i} sqrt3^{j}")?;
        }
        Ok(())
    }
}

/// Largest absolute rational coefficient; handy for sanity output.
pub fn max_abs_coeff(e: &RingElem) -> Rat {
    e.terms.values().map(|r| r.abs()).max().unwrap_or_else(Rat::zero)
}
