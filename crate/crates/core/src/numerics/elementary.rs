//! Certified enclosures of the constants and functions the expansion needs.
//!
//! Each function evaluates its series at a few guard bits above the
//! requested precision, adds an explicit bound on the truncated tail, and
//! rounds the final enclosure outward.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;

use super::dyadic::Dyadic;
use super::interval::Interval;
use super::{NumericsError, Precision};

const GUARD: u32 = 24;

type ConstCache = RwLock<HashMap<u32, Interval>>;

fn cached(cache: &'static OnceLock<ConstCache>, prec: Precision, f: fn(Precision) -> Interval) -> Interval {
    let cache = cache.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(v) = cache.read().unwrap().get(&prec.bits()) {
        return v.clone();
    }
    let v = f(prec);
    cache.write().unwrap().insert(prec.bits(), v.clone());
    v
}

/// `atan(1/m)` by its alternating Maclaurin series.
fn atan_inv(m: i64, wp: Precision) -> Interval {
    let eps = Dyadic::pow2(-(wp.bits() as i64) - 4);
    let mut sum = Interval::zero();
    let m2 = BigInt::from(m) * BigInt::from(m);
    let mut pow = BigInt::from(m);
    let mut k: i64 = 0;
    loop {
        let den = BigInt::from(2 * k + 1) * &pow;
        let term = Interval::from_rational(&BigRational::new(BigInt::from(1), den), wp);
        let small = term.hi() < &eps;
        sum = if k % 2 == 0 {
            sum.add(&term, wp)
        } else {
            sum.sub(&term, wp)
        };
        k += 1;
        pow *= &m2;
        if small {
            // Alternating with decreasing terms: the tail is bounded by the next term.
            let next_den = BigInt::from(2 * k + 1) * &pow;
            let next = Interval::from_rational(&BigRational::new(BigInt::from(1), next_den), wp);
            return sum.add(&Interval::symmetric(next.hi().clone()), wp);
        }
    }
}

fn compute_pi(prec: Precision) -> Interval {
    let wp = prec.with_guard(GUARD);
    let a = atan_inv(5, wp).scale(&Dyadic::from_int(16), wp);
    let b = atan_inv(239, wp).scale(&Dyadic::from_int(4), wp);
    a.sub(&b, wp).round(prec)
}

/// Enclosure of pi with width at most `2^(4 - bits)`.
pub fn enclose_pi(prec: Precision) -> Interval {
    static CACHE: OnceLock<ConstCache> = OnceLock::new();
    cached(&CACHE, prec, compute_pi)
}

/// `2 * atanh(z)` for an interval `z` with `|z| <= 1/3`.
fn two_atanh(z: &Interval, wp: Precision) -> Interval {
    let z2 = z.sqr(wp);
    let eps = Dyadic::pow2(-(wp.bits() as i64) - 4);
    let mut pow = z.clone();
    let mut sum = Interval::zero();
    let mut j: i64 = 0;
    loop {
        let term = pow.div(&Interval::from_int(2 * j + 1), wp).expect("odd denominator");
        sum = sum.add(&term, wp);
        pow = pow.mul(&z2, wp);
        j += 1;
        if pow.mag() < eps {
            // |tail| <= |z|^(2j+1) / ((2j+1)(1 - z^2)) <= 2 |z|^(2j+1) for |z| <= 1/3.
            let tail = Interval::symmetric(pow.mag().shl(1));
            return sum.add(&tail, wp).shl(1);
        }
    }
}

fn compute_ln2(prec: Precision) -> Interval {
    let wp = prec.with_guard(GUARD);
    two_atanh(&Interval::from_ratio(1, 3, wp), wp).round(prec)
}

pub fn enclose_ln2(prec: Precision) -> Interval {
    static CACHE: OnceLock<ConstCache> = OnceLock::new();
    cached(&CACHE, prec, compute_ln2)
}

pub fn enclose_sqrt(a: &Interval, prec: Precision) -> Result<Interval, NumericsError> {
    if a.lo().is_negative() {
        return Err(NumericsError::Domain("sqrt of an interval with negative points"));
    }
    let p = prec.bits();
    Ok(Interval::new_unchecked(
        a.lo().sqrt_round(p, super::Round::Down),
        a.hi().sqrt_round(p, super::Round::Up),
    ))
}

/// Enclosure of `exp(d)` at a single dyadic point.
fn exp_point(d: &Dyadic, prec: Precision) -> Interval {
    if d.is_zero() {
        return Interval::one();
    }
    // Reduce to |y| <= 1/2, then square back up.
    let r = (d.magnitude().unwrap() + 1).max(0);
    let wp = prec.with_guard(GUARD + r as u32);
    let y = Interval::point(d.shl(-r));
    let eps = Dyadic::pow2(-(wp.bits() as i64) - 4);
    let mut sum = Interval::one();
    let mut term = Interval::one();
    let mut k: i64 = 1;
    loop {
        term = term
            .mul(&y, wp)
            .div(&Interval::from_int(k), wp)
            .expect("positive divisor");
        sum = sum.add(&term, wp);
        if term.mag() < eps {
            // Ratio of successive terms is at most 1/2 from here on.
            let next = term.mag().shl(-1);
            sum = sum.add(&Interval::symmetric(next.shl(1)), wp);
            break;
        }
        k += 1;
    }
    for _ in 0..r {
        sum = sum.sqr(wp);
    }
    sum.round(prec)
}

pub fn enclose_exp(a: &Interval, prec: Precision) -> Interval {
    let lo = exp_point(a.lo(), prec);
    if a.lo() == a.hi() {
        return lo;
    }
    let hi = exp_point(a.hi(), prec);
    Interval::new_unchecked(lo.lo().clone(), hi.hi().clone())
}

fn cosh_point(d: &Dyadic, prec: Precision) -> Interval {
    let wp = prec.with_guard(8);
    let e = exp_point(d, wp);
    let inv = e.recip(wp).expect("exp is positive");
    e.add(&inv, wp).shl(-1).round(prec)
}

fn sinh_point(d: &Dyadic, prec: Precision) -> Interval {
    if d.is_zero() {
        return Interval::zero();
    }
    // e - 1/e cancels for small arguments; compensate with guard bits.
    let extra = (-d.magnitude().unwrap()).max(0) as u32;
    let wp = prec.with_guard(8 + extra);
    let e = exp_point(d, wp);
    let inv = e.recip(wp).expect("exp is positive");
    e.sub(&inv, wp).shl(-1).round(prec)
}

pub fn enclose_cosh(a: &Interval, prec: Precision) -> Interval {
    if a.contains_zero() {
        let top = cosh_point(&a.mag(), prec);
        return Interval::new_unchecked(Dyadic::one(), top.hi().clone());
    }
    let small = cosh_point(&a.mig(), prec);
    let big = cosh_point(&a.mag(), prec);
    Interval::new_unchecked(small.lo().clone(), big.hi().clone())
}

pub fn enclose_sinh(a: &Interval, prec: Precision) -> Interval {
    let lo = sinh_point(a.lo(), prec);
    let hi = if a.lo() == a.hi() {
        lo.clone()
    } else {
        sinh_point(a.hi(), prec)
    };
    Interval::new_unchecked(lo.lo().clone(), hi.hi().clone())
}

fn log_point(d: &Dyadic, prec: Precision) -> Interval {
    let wp = prec.with_guard(GUARD);
    // d = f * 2^k with f in [2/3, 4/3).
    let mut k = d.magnitude().unwrap() - 1;
    let mut f = d.shl(-k);
    if f.mul(&Dyadic::from_int(3)) > Dyadic::from_int(4) {
        f = f.shl(-1);
        k += 1;
    }
    let fi = Interval::point(f);
    let z = fi
        .sub(&Interval::one(), wp)
        .div(&fi.add(&Interval::one(), wp), wp)
        .expect("f + 1 > 0");
    let log_f = two_atanh(&z, wp);
    let ln2 = enclose_ln2(wp);
    ln2.scale(&Dyadic::from_int(k), wp).add(&log_f, wp).round(prec)
}

pub fn enclose_log(a: &Interval, prec: Precision) -> Result<Interval, NumericsError> {
    if !a.lo().is_positive() {
        return Err(NumericsError::Domain("log of an interval with nonpositive points"));
    }
    let lo = log_point(a.lo(), prec);
    let hi = if a.lo() == a.hi() {
        lo.clone()
    } else {
        log_point(a.hi(), prec)
    };
    Ok(Interval::new_unchecked(lo.lo().clone(), hi.hi().clone()))
}

/// Ascending series `sum (y/2)^(2k+1) / (k! (k+1)!)` at a point `y >= 0`.
fn bessel_i1_point(y: &Dyadic, prec: Precision) -> Interval {
    if y.is_zero() {
        return Interval::zero();
    }
    let wp = prec.with_guard(GUARD);
    let half = Interval::point(y.shl(-1));
    let half_sq = half.sqr(wp);
    let mut term = half.clone();
    let mut sum = half;
    let mut k: i64 = 0;
    loop {
        let denom = Interval::from_int((k + 1) * (k + 2));
        // Ratio t_{k+1}/t_k, decreasing in k.
        let ratio = half_sq.div(&denom, wp).expect("positive");
        term = term.mul(&ratio, wp);
        sum = sum.add(&term, wp);
        k += 1;
        let ratio_next = half_sq
            .div(&Interval::from_int((k + 1) * (k + 2)), wp)
            .expect("positive");
        let converging = ratio_next.hi() <= &Dyadic::pow2(-1);
        let negligible = term.hi() < &sum.lo().shl(-(wp.bits() as i64) - 2);
        if converging && negligible {
            // Geometric tail with ratio <= 1/2: at most twice the next term.
            let next = term.mul(&ratio_next, wp);
            let tail = Interval::new_unchecked(Dyadic::zero(), next.hi().shl(1));
            return sum.add(&tail, wp).round(prec);
        }
    }
}

/// Modified Bessel function `I_1` on a nonnegative interval.
pub fn enclose_bessel_i1(x: &Interval, prec: Precision) -> Result<Interval, NumericsError> {
    if x.lo().is_negative() {
        return Err(NumericsError::Domain("I1 enclosure requires a nonnegative argument"));
    }
    // I1 is increasing on [0, inf).
    let lo = bessel_i1_point(x.lo(), prec);
    let hi = if x.lo() == x.hi() {
        lo.clone()
    } else {
        bessel_i1_point(x.hi(), prec)
    };
    Ok(Interval::new_unchecked(lo.lo().clone(), hi.hi().clone()))
}
