use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::Serialize;

use super::forms::{Condition, IneqPoly};
use super::poly::{horner, RingPoly};
use super::CertifyError;
use crate::budget::{inv_sqrt_up, MAX_PRECISION_BITS};
use crate::numerics::{Dyadic, Interval, Precision};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Proved,
    Inconclusive,
    Refuted,
}

#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions {
    pub precision: Precision,
    pub max_depth: u32,
    pub max_precision_bits: u32,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            precision: Precision::default(),
            max_depth: 60,
            max_precision_bits: MAX_PRECISION_BITS,
        }
    }
}

/// Outcome of a positivity proof on `(0, x_star]`.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub status: Status,
    #[serde(serialize_with = "ser_dyadic")]
    pub x_star: Dyadic,
    /// `ceil(x_star^{-2})`.
    pub n_star: u64,
    pub leading_zero_degree: usize,
    pub subdivisions: u64,
    pub leaves: u64,
    pub max_depth_hit: bool,
    pub precision_bits: u32,
    /// A point where the polynomial is provably negative.
    #[serde(serialize_with = "ser_opt_dyadic")]
    pub witness: Option<Dyadic>,
}

fn ser_dyadic<S: serde::Serializer>(d: &Dyadic, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&d.to_sci_string(20, crate::numerics::Round::Up))
}

fn ser_opt_dyadic<S: serde::Serializer>(d: &Option<Dyadic>, s: S) -> Result<S::Ok, S::Error> {
    match d {
        Some(d) => ser_dyadic(d, s),
        None => s.serialize_none(),
    }
}

/// `ceil(x^{-2})` for `x > 0`.
pub fn n_of_x(x: &Dyadic) -> u64 {
    let r = x.to_rational();
    let inv = (&r * &r).recip();
    let (q, rem) = inv.numer().div_rem(inv.denom());
    let c = if rem.is_positive() { q + BigInt::one() } else { q };
    u64::try_from(c).unwrap_or(u64::MAX)
}

#[derive(Clone)]
struct Item {
    a: Dyadic,
    b: Dyadic,
    depth: u32,
    prec: Precision,
    local: u32,
}

enum Verdict {
    Positive,
    Negative(Dyadic),
    Undecided,
}

struct Reduced {
    poly: RingPoly,
    deriv: RingPoly,
}

impl Reduced {
    fn decide(&self, it: &Item) -> Verdict {
        let p = it.prec;
        let x = Interval::new(it.a.clone(), it.b.clone()).expect("ordered");
        let cs = self.poly.coeff_intervals(p);
        if horner(&cs, &x, p).is_positive() {
            return Verdict::Positive;
        }
        let mid = x.midpoint();
        let at_mid = horner(&cs, &Interval::point(mid.clone()), p);
        if at_mid.is_negative() {
            return Verdict::Negative(mid);
        }
        // monotonicity, then the mean-value form
        let d = self.deriv.eval(&x, p);
        if d.is_positive() || d.is_negative() {
            let end = if d.is_positive() { &it.a } else { &it.b };
            let v = horner(&cs, &Interval::point(end.clone()), p);
            if v.is_positive() {
                return Verdict::Positive;
            }
            if v.is_negative() {
                return Verdict::Negative(end.clone());
            }
            return Verdict::Undecided;
        }
        let offset = x.sub(&Interval::point(mid), p);
        if at_mid.add(&d.mul(&offset, p), p).is_positive() {
            return Verdict::Positive;
        }
        Verdict::Undecided
    }
}

/// Proves `p(x) > 0` on `(0, x_star]`.
///
/// Exactly vanishing low-order coefficients are divided out first; the
/// quotient is then required to be positive on `[0, x_star]` by adaptive
/// bisection. The result is never `Proved` unless every leaf has a strictly
/// positive enclosure.
pub fn certify_positive(p: &RingPoly, x_star: &Dyadic, opts: &CertifyOptions) -> Certificate {
    let (d, poly) = p.strip_low_zeros();
    let mut cert = Certificate {
        status: Status::Inconclusive,
        x_star: x_star.clone(),
        n_star: n_of_x(x_star),
        leading_zero_degree: d,
        subdivisions: 0,
        leaves: 0,
        max_depth_hit: false,
        precision_bits: opts.precision.bits(),
        witness: None,
    };
    if poly.is_zero() || !x_star.is_positive() {
        return cert;
    }
    let reduced = Reduced {
        deriv: poly.derivative(),
        poly,
    };

    // the reduced constant term decides the sign near zero
    let mut prec = opts.precision;
    loop {
        let c0 = reduced.poly.coeff(0).eval(prec);
        if c0.is_positive() {
            break;
        }
        if c0.is_negative() {
            let mut x = x_star.clone();
            loop {
                let v = reduced.poly.eval(&Interval::point(x.clone()), prec);
                if v.is_negative() {
                    cert.status = Status::Refuted;
                    cert.witness = Some(x);
                    break;
                }
                if x.exponent() < -(prec.bits() as i64) {
                    break;
                }
                x = x.shl(-4);
            }
            cert.precision_bits = prec.bits();
            return cert;
        }
        if prec.bits() >= opts.max_precision_bits {
            cert.precision_bits = prec.bits();
            return cert;
        }
        prec = prec.doubled();
    }

    let mut level = vec![Item {
        a: Dyadic::zero(),
        b: x_star.clone(),
        depth: 0,
        prec,
        local: 0,
    }];
    let mut max_prec = prec.bits();
    while !level.is_empty() {
        let verdicts: Vec<Verdict> = level.par_iter().map(|it| reduced.decide(it)).collect();
        let mut next = Vec::new();
        for (it, v) in level.into_iter().zip(verdicts) {
            match v {
                Verdict::Positive => cert.leaves += 1,
                Verdict::Negative(w) => {
                    cert.status = Status::Refuted;
                    cert.witness = Some(w);
                    cert.precision_bits = max_prec;
                    return cert;
                }
                Verdict::Undecided => {
                    if it.depth >= opts.max_depth {
                        cert.max_depth_hit = true;
                        cert.precision_bits = max_prec;
                        return cert;
                    }
                    cert.subdivisions += 1;
                    let mut local = it.local + 1;
                    let mut child_prec = it.prec;
                    if local >= 4 && child_prec.bits() < opts.max_precision_bits {
                        child_prec =
                            Precision::new((child_prec.bits() * 2).min(opts.max_precision_bits)).expect("bits");
                        local = 0;
                    }
                    max_prec = max_prec.max(child_prec.bits());
                    let mid = it.a.add(&it.b).shl(-1);
                    for (a, b) in [(it.a.clone(), mid.clone()), (mid, it.b.clone())] {
                        next.push(Item {
                            a,
                            b,
                            depth: it.depth + 1,
                            prec: child_prec,
                            local,
                        });
                    }
                }
            }
        }
        level = next;
    }
    cert.status = Status::Proved;
    cert.precision_bits = max_prec;
    cert
}

/// Certificates for an inequality polynomial and all of its side conditions.
#[derive(Debug, Clone, Serialize)]
pub struct IneqCertificate {
    pub status: Status,
    pub main: Certificate,
    pub side: Vec<(String, Certificate)>,
}

impl IneqCertificate {
    pub fn subdivisions(&self) -> u64 {
        self.main.subdivisions + self.side.iter().map(|(_, c)| c.subdivisions).sum::<u64>()
    }

    pub fn precision_bits(&self) -> u32 {
        self.side
            .iter()
            .map(|(_, c)| c.precision_bits)
            .fold(self.main.precision_bits, u32::max)
    }
}

fn combine(main: Certificate, side: Vec<(String, Certificate)>) -> IneqCertificate {
    let all = std::iter::once(&main).chain(side.iter().map(|(_, c)| c));
    let status = all.fold(Status::Proved, |acc, c| match (acc, c.status) {
        (Status::Refuted, _) | (_, Status::Refuted) => Status::Refuted,
        (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
        _ => Status::Proved,
    });
    IneqCertificate { status, main, side }
}

/// Certifies the inequality and its side conditions on `(0, x_star]`.
pub fn certify_ineq(ineq: &IneqPoly, x_star: &Dyadic, opts: &CertifyOptions) -> IneqCertificate {
    let main = certify_positive(&ineq.expanded, x_star, opts);
    if main.status != Status::Proved {
        return combine(main, Vec::new());
    }
    let side = ineq
        .side_conditions
        .iter()
        .map(|Condition { name, poly }| (name.clone(), certify_positive(poly, x_star, opts)))
        .collect();
    combine(main, side)
}

/// Certifies at `x_star = n^{-1/2}` rounded up.
pub fn certify_at(ineq: &IneqPoly, n: u64, opts: &CertifyOptions) -> IneqCertificate {
    certify_ineq(ineq, &inv_sqrt_up(n, opts.precision), opts)
}

#[derive(Debug, Clone, Serialize)]
pub struct Crossover {
    /// Smallest `n` with a certificate on `(0, n^{-1/2}]`.
    pub n: u64,
    pub certificate: IneqCertificate,
    pub probes: u32,
}

/// Smallest `n` in `[n_lo, n_hi]` whose certificate succeeds, searched by doubling `n`
/// from `n_lo` and then bisecting.
pub fn find_crossover(ineq: &IneqPoly, n_lo: u64, n_hi: u64, opts: &CertifyOptions) -> Result<Crossover, CertifyError> {
    let n_lo = n_lo.max(1);
    let mut probes = 0;
    let mut fail = n_lo - 1;
    let mut n = n_lo;
    let (mut ok, mut cert) = loop {
        probes += 1;
        let c = certify_at(ineq, n, opts);
        if c.status == Status::Proved {
            break (n, c);
        }
        if n >= n_hi {
            return Err(CertifyError::NoCrossover {
                id: ineq.id.name(),
                n_hi,
                status: c.status,
            });
        }
        fail = n;
        n = (n * 2).min(n_hi);
    };
    while ok - fail > 1 {
        let mid = fail + (ok - fail) / 2;
        probes += 1;
        let c = certify_at(ineq, mid, opts);
        if c.status == Status::Proved {
            ok = mid;
            cert = c;
        } else {
            fail = mid;
        }
    }
    Ok(Crossover {
        n: ok,
        certificate: cert,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::RingElem;
    use crate::numerics::Rat;

    fn opts() -> CertifyOptions {
        CertifyOptions {
            precision: Precision::new(64).unwrap(),
            ..Default::default()
        }
    }

    #[test]
    fn pure_power_is_proved_after_stripping() {
        let p = RingPoly::monomial(RingElem::one(), 2);
        let c = certify_positive(&p, &Dyadic::one(), &opts());
        assert_eq!(c.status, Status::Proved);
        assert_eq!(c.leading_zero_degree, 2);
        assert_eq!(c.n_star, 1);
    }

    #[test]
    fn sign_change_is_not_proved() {
        let p = RingPoly::new(vec![RingElem::zero(), RingElem::one(), RingElem::int(-1)]);
        let c = certify_positive(&p, &Dyadic::from_int(2), &opts());
        assert_eq!(c.status, Status::Refuted);
        let w = c.witness.unwrap().to_rational();
        assert!(w > Rat::one());
        let on_left = certify_positive(&p, &Dyadic::new(3.into(), -2), &opts());
        assert_eq!(on_left.status, Status::Proved);
    }

    #[test]
    fn negative_constant_is_refuted() {
        let p = RingPoly::new(vec![RingElem::int(-1), RingElem::int(5)]);
        let c = certify_positive(&p, &Dyadic::one(), &opts());
        assert_eq!(c.status, Status::Refuted);
    }

    #[test]
    fn tangential_root_is_never_proved() {
        // (1 - 2x)^2 touches zero at 1/2
        let p = RingPoly::new(vec![RingElem::int(1), RingElem::int(-4), RingElem::int(4)]);
        let c = certify_positive(
            &p,
            &Dyadic::one(),
            &CertifyOptions {
                max_depth: 20,
                ..opts()
            },
        );
        assert_ne!(c.status, Status::Proved);
    }

    #[test]
    fn zero_polynomial_is_inconclusive() {
        let c = certify_positive(&RingPoly::zero(), &Dyadic::one(), &opts());
        assert_eq!(c.status, Status::Inconclusive);
    }

    #[test]
    fn n_of_x_rounding() {
        assert_eq!(n_of_x(&Dyadic::new(1.into(), -1)), 4);
        let p = Precision::new(96).unwrap();
        for n in [5019u64, 18502, 3] {
            assert_eq!(n_of_x(&inv_sqrt_up(n, p)), n);
        }
    }
}
