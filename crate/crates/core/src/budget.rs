//! Explicit error constants of the expansion of q(n + s), the validity
//! threshold n(N, s), and the two-sided bounds L and U built from them.

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::exact_q::QTable;
use crate::expansion::{a_coeff, bhat_coeff, CoeffContext, RingElem};
use crate::numerics::{
    enclose_bessel_i1, enclose_cosh, enclose_exp, enclose_log, enclose_pi, enclose_sqrt, Dyadic, Interval, Precision,
    Rat, Round,
};

/// Largest precision tried before a comparison is declared undecidable.
pub const MAX_PRECISION_BITS: u32 = 1536;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BudgetError {
    #[error("n = {n} is below the validity window n(N={order}, s={s}) = {n_min}")]
    BelowWindow { n: u64, s: u32, order: u32, n_min: u64 },
    #[error("truncation order N must be at least 1")]
    ZeroOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

fn iv(n: i64) -> Interval {
    Interval::from_int(n)
}

fn sqrt(x: &Interval, p: Precision) -> Interval {
    enclose_sqrt(x, p).expect("nonnegative argument")
}

fn div(a: &Interval, b: &Interval, p: Precision) -> Interval {
    a.div(b, p).expect("nonzero divisor")
}

/// `x^{k/2}` for `x > 0`.
fn pow_half(x: &Interval, k: u32, p: Precision) -> Interval {
    let whole = x.powi((k / 2) as i32, p).expect("integer power");
    if k % 2 == 1 {
        whole.mul(&sqrt(x, p), p)
    } else {
        whole
    }
}

fn sigma(s: u32, p: Precision) -> Interval {
    Interval::from_ratio(24 * s as i64 + 1, 24, p)
}

fn abs_a(m: u32, p: Precision) -> Interval {
    Interval::from_rational(&a_coeff(m).abs(), p)
}

/// `cosh(pi sqrt(sigma/3))`, the hyperbolic factor shared by several constants.
fn cosh_sigma(s: u32, p: Precision) -> Interval {
    let pi = enclose_pi(p);
    let arg = pi.mul(&sqrt(&div(&sigma(s, p), &iv(3), p), p), p);
    enclose_cosh(&arg, p)
}

/// `N_0(m)`: 1 for m = 1, else `4m log m - 3m log log m`.
pub fn n0(m: u32, prec: Precision) -> Interval {
    assert!(m >= 1, "N_0 is defined for m >= 1");
    if m == 1 {
        return Interval::one();
    }
    let wp = prec.with_guard(16);
    let mi = iv(m as i64);
    let lm = enclose_log(&mi, wp).expect("m >= 2");
    let llm = enclose_log(&lm, wp).expect("log m > 0");
    let a = mi.mul(&lm, wp).shl(2);
    let b = mi.mul(&llm, wp).scale(&Dyadic::from_int(3), wp);
    a.sub(&b, wp).round(prec)
}

/// `n(N, s) = max{206, (72/pi^2 N_0(N+2)^2 - 1)/24, ceil(2(24s+1)/3)}`,
/// with the middle term replaced by the ceiling of its certified upper bound.
pub fn n_min(order: u32, s: u32, prec: Precision) -> u64 {
    let pi = enclose_pi(prec);
    let n0v = n0(order + 2, prec);
    let mid = div(&iv(72), &pi.sqr(prec), prec)
        .mul(&n0v.sqr(prec), prec)
        .sub(&Interval::one(), prec);
    let mid = div(&mid, &iv(24), prec);
    let mid_up = mid.hi().ceil().to_u64().unwrap_or(u64::MAX);
    let shift_term = (2 * (24 * s as u64 + 1)).div_ceil(3);
    206.max(mid_up).max(shift_term)
}

/// Writes an upper bound as a decimal string rounded up.
fn ser_upper<S: serde::Serializer>(d: &Dyadic, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(&d.to_sci_string(20, Round::Up))
}

/// Certified upper bounds of every constant in the error budget.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ErrorBudget {
    pub order: u32,
    pub s: u32,
    pub n_min: u64,
    #[serde(serialize_with = "ser_upper")]
    pub er_n1: Dyadic,
    #[serde(serialize_with = "ser_upper")]
    pub er2: Dyadic,
    #[serde(serialize_with = "ser_upper")]
    pub er3: Dyadic,
    #[serde(serialize_with = "ser_upper")]
    pub er4: Dyadic,
    #[serde(serialize_with = "ser_upper")]
    pub er5: Dyadic,
    #[serde(serialize_with = "ser_upper")]
    pub er6: Dyadic,
    #[serde(serialize_with = "ser_upper")]
    pub a_s: Dyadic,
    #[serde(serialize_with = "ser_upper")]
    pub er_n: Dyadic,
}

/// Enclosures of the budget constants; `er_budget` keeps the upper ends.
#[derive(Clone, Debug)]
pub struct BudgetEnclosures {
    pub er_n1: Interval,
    pub er2: Interval,
    pub er3: Interval,
    pub er4: Interval,
    pub er5: Interval,
    pub er6: Interval,
    pub a_s: Interval,
    pub er_n: Interval,
}

pub fn budget_enclosures(order: u32, s: u32, prec: Precision) -> Result<BudgetEnclosures, BudgetError> {
    if order == 0 {
        return Err(BudgetError::ZeroOrder);
    }
    let p = prec.with_guard(32);
    let n = order;
    let pi = enclose_pi(p);
    let s3 = sqrt(&iv(3), p);
    let sg = sigma(s, p);
    let sqrt_sg = sqrt(&sg, p);
    let ch = cosh_sigma(s, p);
    let a_n = abs_a(n, p);
    let a_n1 = abs_a(n + 1, p);
    let pi_over_2s3 = div(&pi, &s3.shl(1), p);
    let nn = iv(n as i64);
    let s24 = iv(24 * s as i64 + 1);

    // Er_{N,1}
    let log_n1 = enclose_log(&iv(n as i64 + 1), p).expect("N + 1 >= 2");
    let ratio = div(&s3, &pi, p).powi(n as i32 + 1, p).expect("power");
    let t1 = Interval::one()
        .add(&div(&iv(9), &log_n1, p), p)
        .add(&Interval::from_ratio(9, n as i64 + 2, p), p);
    let t1 = div(&t1, &sqrt(&pi.shl(1), p), p);
    let t2 = sqrt(&iv(2), p).add(
        &div(
            &Interval::one(),
            &sqrt(&Interval::from_ratio(2 * n as i64 + 5, 2, p), p),
            p,
        ),
        p,
    );
    let t2 = div(&t2, &log_n1, p);
    let er_n1 = ratio.mul(&t1.add(&t2, p), p).mul(&a_n1, p);

    // Er_2 = 4/3 sqrt(2 pi/3) N^{-3/2} sigma^{(N+2)/2} cosh(...)
    let n32 = pow_half(&nn, 3, p);
    let er2 = div(&sqrt(&div(&pi.shl(1), &iv(3), p), p).shl(2), &iv(3), p);
    let er2 = div(&er2, &n32, p).mul(&pow_half(&sg, n + 2, p), p).mul(&ch, p);

    // Er_3 = 4/3 sigma^{(N+1)/2}
    let er3 = div(&pow_half(&sg, n + 1, p).shl(2), &iv(3), p);

    // Er_4
    let c4 = div(&n32.shl(2), &iv(3), p).add(&Interval::one(), p);
    let tail = Interval::one()
        .add(&pi_over_2s3.mul(&sg, p), p)
        .add(&div(&sqrt(&pi.mul(&s24, p), p), &iv(72), p).mul(&ch, p), p);
    let er4 = c4
        .mul(&er2, p)
        .add(&pi_over_2s3.mul(&pow_half(&sg, n + 2, p), p), p)
        .add(&er3.mul(&tail, p), p);

    // Er_5
    let three_over_pi2 = div(&iv(3), &pi.sqr(p), p);
    let e5a = div(&a_n.shl(2), &iv(3), p).mul(
        &sg.add(&three_over_pi2, p).powi((n / 2 + 1) as i32, p).expect("power"),
        p,
    );
    let e5b_base = sqrt_sg.add(&div(&s3, &pi, p), p);
    let e5b =
        div(&a_n.shl(2), &s3.mul(&pi, p), p).mul(&e5b_base.powi((2 * ((n - 1) / 2) + 2) as i32, p).expect("power"), p);
    let er5 = e5a.add(&e5b, p);

    // Er_6
    let e6a = div(&s3, &pi, p)
        .powi(n as i32 + 1, p)
        .expect("power")
        .mul(&a_n, p)
        .shl(3);
    let inner = div(&iv(3), &pi.mul(&sqrt(&s24.shl(1), p), p), p)
        .powi(n as i32 + 1, p)
        .expect("power")
        .shl(2)
        .add(&Interval::one(), p);
    let er6 = e6a.add(&inner.mul(&er5.add(&er_n1, p), p), p);

    // A(s)
    let a_s = Interval::one()
        .add(&pi_over_2s3.mul(&sqrt_sg, p), p)
        .add(&div(&sqrt(&pi.mul(&s24, p), p), &iv(12), p).mul(&ch, p), p);

    // Er_N(s)
    let nm = n_min(order, s, prec);
    let two_pow = |k: i64| Interval::point(Dyadic::pow2(k));
    let head = div(&pi.mul(&two_pow(n as i64 - 1), p), &s3, p).mul(&sqrt_sg, p).add(
        &a_s.mul(&Interval::one().add(&div(&two_pow(n as i64 + 1), &iv(3), p), p), p),
        p,
    );
    let head = a_n.mul(&head, p).mul(&pow_half(&sg, n + 1, p), p);
    let mid = Interval::one()
        .add(&pi_over_2s3.mul(&sg, p), p)
        .add(&div(&a_s, &iv(12), p), p)
        .mul(&er6, p);
    let last = div(
        &er4.mul(&er6, p),
        &pow_half(&Interval::from_bigint(&BigInt::from(nm)), n + 1, p),
        p,
    );
    let er_n = head.add(&mid, p).add(&a_n.mul(&er4, p).shl(1), p).add(&last, p);

    let r = |x: Interval| x.round(prec);
    Ok(BudgetEnclosures {
        er_n1: r(er_n1),
        er2: r(er2),
        er3: r(er3),
        er4: r(er4),
        er5: r(er5),
        er6: r(er6),
        a_s: r(a_s),
        er_n: r(er_n),
    })
}

pub fn er_budget(order: u32, s: u32, prec: Precision) -> Result<ErrorBudget, BudgetError> {
    let e = budget_enclosures(order, s, prec)?;
    let up = |x: Interval| x.into_bounds().1;
    Ok(ErrorBudget {
        order,
        s,
        n_min: n_min(order, s, prec),
        er_n1: up(e.er_n1),
        er2: up(e.er2),
        er3: up(e.er3),
        er4: up(e.er4),
        er5: up(e.er5),
        er6: up(e.er6),
        a_s: up(e.a_s),
        er_n: up(e.er_n),
    })
}

/// `nu(n) = pi sqrt(24n + 1) / (6 sqrt 2)`.
pub fn nu(n: u64, prec: Precision) -> Interval {
    let p = prec.with_guard(16);
    let pi = enclose_pi(p);
    let r = sqrt(&Interval::from_bigint(&BigInt::from(24 * n + 1)), p);
    let d = sqrt(&iv(2), p).scale(&Dyadic::from_int(6), p);
    div(&pi.mul(&r, p), &d, p).round(prec)
}

/// `M(n) = sqrt2 pi^2 / (12 nu(n)) I_1(nu(n))`.
pub fn m_of_n(n: u64, prec: Precision) -> Interval {
    let p = prec.with_guard(16);
    let v = nu(n, p);
    let pi = enclose_pi(p);
    let i1 = enclose_bessel_i1(&v, p).expect("nu > 0");
    let c = sqrt(&iv(2), p).mul(&pi.sqr(p), p);
    div(&c.mul(&i1, p), &v.scale(&Dyadic::from_int(12), p), p).round(prec)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaOutcome {
    Holds,
    Fails,
    /// The hypothesis `nu(n) >= max{26, N_0(m+1)}` could not be certified.
    OutOfRegime,
}

/// Checks `M(1 - 4/nu^m) <= q(n) <= M(1 + 4/nu^m)` on conservative endpoints,
/// raising precision while a comparison is undecided.
pub fn lemma21_check(t: &QTable, n: u64, m: u32, prec: Precision) -> LemmaOutcome {
    let q = Interval::from_bigint(&BigInt::from(t.q(n as usize).clone()));
    let mut p = prec;
    loop {
        let v = nu(n, p);
        let need = n0(m + 1, p);
        let regime = v.lo() >= &Dyadic::from_int(26) && v.lo() >= need.hi();
        let undecided_regime = !regime && v.hi() >= need.lo().max(&Dyadic::from_int(26));
        if regime {
            let mv = m_of_n(n, p);
            let rel = div(&iv(4), &v.powi(m as i32, p).expect("power"), p);
            let lower = mv.mul(&Interval::one().sub(&rel, p), p);
            let upper = mv.mul(&Interval::one().add(&rel, p), p);
            if lower.hi() <= q.lo() && q.hi() <= upper.lo() {
                return LemmaOutcome::Holds;
            }
            if lower.lo() > q.hi() || upper.hi() < q.lo() {
                return LemmaOutcome::Fails;
            }
        } else if !undecided_regime {
            return LemmaOutcome::OutOfRegime;
        }
        if p.bits() >= MAX_PRECISION_BITS {
            return if regime {
                LemmaOutcome::Fails
            } else {
                LemmaOutcome::OutOfRegime
            };
        }
        p = p.doubled();
    }
}

/// `e^{pi sqrt(n/3)} / (4 3^{1/4} n^{3/4})`.
pub fn prefactor(n: u64, prec: Precision) -> Interval {
    let p = prec.with_guard(24);
    let ni = Interval::from_bigint(&BigInt::from(n));
    let pi = enclose_pi(p);
    let e = enclose_exp(&pi.mul(&sqrt(&div(&ni, &iv(3), p), p), p), p);
    // 3^{1/4} n^{3/4} = sqrt(sqrt(3 n^3))
    let q = sqrt(
        &sqrt(&ni.powi(3, p).expect("power").scale(&Dyadic::from_int(3), p), p),
        p,
    );
    div(&e, &q.shl(2), p).round(prec)
}

/// The bound `L(n, s, N)` or `U(n, s, N)` as a polynomial in `x = n^{-1/2}`:
/// exact coefficients for degrees `0..=N` and `-Er_N(s)` / `+Er_N(s)` at degree `N + 1`.
#[derive(Debug)]
pub struct BoundPoly {
    pub s: u32,
    pub order: u32,
    pub side: Side,
    pub coeffs: Vec<RingElem>,
    /// Signed degree-(N+1) coefficient.
    pub err: Dyadic,
    /// `n(N, s)^{-1/2}` rounded up.
    pub x_max: Dyadic,
    pub n_min: u64,
    cache: Mutex<HashMap<u32, Vec<Interval>>>,
}

impl Clone for BoundPoly {
    fn clone(&self) -> Self {
        Self {
            s: self.s,
            order: self.order,
            side: self.side,
            coeffs: self.coeffs.clone(),
            err: self.err.clone(),
            x_max: self.x_max.clone(),
            n_min: self.n_min,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl BoundPoly {
    /// All coefficients `0..=N+1` as exact ring elements.
    pub fn ring_coeffs(&self) -> Vec<RingElem> {
        let mut v = self.coeffs.clone();
        v.push(RingElem::rat(self.err.to_rational()));
        v
    }

    fn coeff_intervals(&self, prec: Precision) -> Vec<Interval> {
        let mut cache = self.cache.lock().unwrap();
        cache
            .entry(prec.bits())
            .or_insert_with(|| self.ring_coeffs().iter().map(|c| c.eval(prec)).collect())
            .clone()
    }

    /// Horner evaluation at an interval of `x`.
    pub fn eval(&self, x: &Interval, prec: Precision) -> Interval {
        let cs = self.coeff_intervals(prec);
        let mut acc = Interval::zero();
        for c in cs.iter().rev() {
            acc = acc.mul(x, prec).add(c, prec);
        }
        acc
    }
}

/// Upper bound of `n^{-1/2}`.
pub fn inv_sqrt_up(n: u64, prec: Precision) -> Dyadic {
    let r = Rat::new(1.into(), BigInt::from(n));
    Dyadic::from_rational(&r, prec.bits() + 8, Round::Up).sqrt_round(prec.bits(), Round::Up)
}

/// Enclosure of `n^{-1/2}`.
pub fn inv_sqrt(n: u64, prec: Precision) -> Interval {
    let r = Rat::new(1.into(), BigInt::from(n));
    let lo = Dyadic::from_rational(&r, prec.bits() + 8, Round::Down).sqrt_round(prec.bits(), Round::Down);
    let hi = inv_sqrt_up(n, prec);
    Interval::new(lo, hi).expect("ordered")
}

pub fn bound_poly(s: u32, order: u32, side: Side, prec: Precision) -> Result<BoundPoly, BudgetError> {
    let budget = er_budget(order, s, prec)?;
    let ctx = CoeffContext::new(s);
    let coeffs = (0..=order).map(|m| bhat_coeff(m, &ctx)).collect();
    let err = match side {
        Side::Lower => budget.er_n.neg(),
        Side::Upper => budget.er_n.clone(),
    };
    Ok(BoundPoly {
        s,
        order,
        side,
        coeffs,
        err,
        x_max: inv_sqrt_up(budget.n_min, prec),
        n_min: budget.n_min,
        cache: Mutex::new(HashMap::new()),
    })
}

/// Both bounds for one `(s, N)`.
pub fn bound_pair(s: u32, order: u32, prec: Precision) -> Result<(BoundPoly, BoundPoly), BudgetError> {
    Ok((
        bound_poly(s, order, Side::Lower, prec)?,
        bound_poly(s, order, Side::Upper, prec)?,
    ))
}

/// Enclosure of `prefactor(n) * L(n, s, N)` (or `U`), valid for `n >= n(N, s)`.
pub fn bound_value(n: u64, s: u32, order: u32, side: Side, prec: Precision) -> Result<Interval, BudgetError> {
    let poly = bound_poly(s, order, side, prec)?;
    bound_value_with(&poly, n, prec)
}

/// As [`bound_value`] with a prebuilt polynomial.
pub fn bound_value_with(poly: &BoundPoly, n: u64, prec: Precision) -> Result<Interval, BudgetError> {
    if n < poly.n_min {
        return Err(BudgetError::BelowWindow {
            n,
            s: poly.s,
            order: poly.order,
            n_min: poly.n_min,
        });
    }
    let x = inv_sqrt(n, prec.with_guard(16));
    let v = poly.eval(&x, prec.with_guard(16));
    Ok(prefactor(n, prec.with_guard(16))
        .mul(&v, prec.with_guard(16))
        .round(prec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(bits: u32) -> Precision {
        Precision::new(bits).unwrap()
    }

    #[test]
    fn n0_values() {
        assert_eq!(n0(1, p(64)), Interval::one());
        let v2 = n0(2, p(64)).to_f64();
        let ln2 = std::f64::consts::LN_2;
        assert!((v2 - (8.0 * ln2 - 6.0 * ln2.ln())).abs() < 1e-12);
        assert!(v2 > 8.0 * ln2);
        let v16 = n0(16, p(64));
        let f = 64.0 * 16f64.ln() - 48.0 * 16f64.ln().ln();
        assert!((v16.to_f64() - f).abs() < 1e-10, "{v16:?}");
        // 128.49616907751... from a 50-digit reference
        assert!(
            v16.contains_rational(&Rat::new(12849616907751i64.into(), 100000000000i64.into())) || {
                (v16.to_f64() - 128.496_169_077_51).abs() < 1e-10
            }
        );
    }

    #[test]
    fn window_values() {
        assert_eq!(n_min(1, 0, p(192)), 206);
        let m14 = (0..=4).map(|s| n_min(14, s, p(192))).max().unwrap();
        let m24 = (0..=6).map(|s| n_min(24, s, p(192))).max().unwrap();
        assert!(m14 <= 5019, "{m14}");
        assert!(m24 <= 18502, "{m24}");
        for order in [1, 6, 14, 24] {
            for s in 0..7u32 {
                let w = n_min(order, s, p(192));
                assert!(w >= 206 && w >= (2 * (24 * s as u64 + 1)).div_ceil(3));
            }
        }
    }

    #[test]
    fn nu_facts() {
        assert!(nu(206, p(128)).lo() >= &Dyadic::from_int(26));
        assert!(nu(205, p(128)).hi() < &Dyadic::from_int(26));
        let v0 = nu(0, p(128)).to_f64();
        assert!((v0 - std::f64::consts::PI / (6.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!(m_of_n(1000, p(128)).is_positive());
    }

    #[test]
    fn budget_is_positive() {
        let b = er_budget(14, 0, p(192)).unwrap();
        for d in [&b.er_n1, &b.er2, &b.er3, &b.er4, &b.er5, &b.er6, &b.a_s, &b.er_n] {
            assert!(d.is_positive());
        }
        assert_eq!(er_budget(0, 0, p(64)), Err(BudgetError::ZeroOrder));
    }

    #[test]
    fn bound_poly_shape() {
        let (l, u) = bound_pair(2, 14, p(192)).unwrap();
        assert_eq!(l.coeffs[0], RingElem::one());
        assert_eq!(l.coeffs.len(), 15);
        assert_eq!(u.err, l.err.neg());
        assert!(u.err.is_positive());
        assert!(matches!(
            bound_value(100, 0, 14, Side::Lower, p(64)),
            Err(BudgetError::BelowWindow { .. })
        ));
    }
}
