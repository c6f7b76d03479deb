use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::poly::RingPoly;
use super::CertifyError;
use crate::budget::{bound_poly, inv_sqrt_up, BoundPoly, Side};
use crate::expansion::RingElem;
use crate::numerics::{Dyadic, Interval, Precision, Rat};

/// The certified bound inequalities, written in `L(s) = L(n, s, N)` and `U(s) = U(n, s, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum IneqId {
    #[serde(rename = "ineq1")]
    Ineq1,
    #[serde(rename = "ineq2")]
    Ineq2,
    #[serde(rename = "ineq3")]
    Ineq3,
    #[serde(rename = "ineq4")]
    Ineq4,
    #[serde(rename = "ineq5")]
    Ineq5,
    #[serde(rename = "ineq6")]
    Ineq6,
    #[serde(rename = "ineq-L3")]
    IneqL3,
    #[serde(rename = "ineq-c-L3")]
    IneqCL3,
}

impl IneqId {
    pub const ALL: [IneqId; 8] = [
        IneqId::Ineq1,
        IneqId::Ineq2,
        IneqId::Ineq3,
        IneqId::Ineq4,
        IneqId::Ineq5,
        IneqId::Ineq6,
        IneqId::IneqL3,
        IneqId::IneqCL3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IneqId::Ineq1 => "ineq1",
            IneqId::Ineq2 => "ineq2",
            IneqId::Ineq3 => "ineq3",
            IneqId::Ineq4 => "ineq4",
            IneqId::Ineq5 => "ineq5",
            IneqId::Ineq6 => "ineq6",
            IneqId::IneqL3 => "ineq-L3",
            IneqId::IneqCL3 => "ineq-c-L3",
        }
    }

    /// Truncation order used for this inequality.
    pub fn default_order(self) -> u32 {
        match self {
            IneqId::Ineq1 | IneqId::Ineq2 | IneqId::Ineq5 | IneqId::Ineq6 => 14,
            _ => 24,
        }
    }

    /// Largest shift `s` appearing in the inequality.
    pub fn s_max(self) -> u32 {
        match self {
            IneqId::IneqL3 | IneqId::IneqCL3 => 6,
            _ => 4,
        }
    }

    /// Companion multiplier, if any.
    pub fn perturbation(self) -> Option<Perturbation> {
        let rat = |n: i64, d: i64| Rat::new(n.into(), d.into());
        let inv_sqrt3 = RingElem::monomial(rat(1, 3), 0, 1);
        match self {
            IneqId::Ineq2 => Some(Perturbation {
                c: RingElem::monomial(rat(1, 32), 2, 0),
                power: 6,
                minorant: Some(Minorant {
                    r: rat(1, 1),
                    exponent: rat(3, 1),
                }),
            }),
            IneqId::Ineq4 => Some(Perturbation {
                c: RingElem::monomial(rat(1, 288), 3, 0) * inv_sqrt3,
                power: 9,
                minorant: Some(Minorant {
                    r: rat(1, 4),
                    exponent: rat(9, 2),
                }),
            }),
            IneqId::Ineq6 => Some(Perturbation {
                c: RingElem::monomial(rat(1, 2), 1, 0) * inv_sqrt3,
                power: 3,
                minorant: Some(Minorant {
                    r: rat(1, 1),
                    exponent: rat(3, 2),
                }),
            }),
            IneqId::IneqCL3 => Some(Perturbation {
                c: RingElem::monomial(rat(5, 256), 3, 0) * inv_sqrt3,
                power: 9,
                minorant: None,
            }),
            _ => None,
        }
    }

    /// The inequality as an expression tree.
    pub fn form(self) -> Expr {
        use Expr::{L, U};
        let f = || Expr::Factor;
        let k = Expr::Int;
        match self {
            IneqId::Ineq1 => Expr::sum(vec![
                Expr::prod(vec![L(0), L(4)]),
                Expr::prod(vec![k(3), L(2), L(2)]),
                Expr::prod(vec![k(-4), U(1), U(3)]),
            ]),
            IneqId::Ineq2 => Expr::sum(vec![
                Expr::prod(vec![k(4), f(), L(1), L(3)]),
                Expr::prod(vec![k(-1), U(0), U(4)]),
                Expr::prod(vec![k(-3), U(2), U(2)]),
            ]),
            IneqId::Ineq3 => Expr::sum(vec![
                Expr::prod(vec![L(2), L(2), L(2)]),
                Expr::prod(vec![L(0), L(3), L(3)]),
                Expr::prod(vec![L(1), L(1), L(4)]),
                Expr::prod(vec![k(-1), U(0), U(2), U(4)]),
                Expr::prod(vec![k(-2), U(1), U(2), U(3)]),
            ]),
            IneqId::Ineq4 => Expr::sum(vec![
                Expr::prod(vec![
                    f(),
                    Expr::sum(vec![
                        Expr::prod(vec![L(0), L(2), L(4)]),
                        Expr::prod(vec![k(2), L(1), L(2), L(3)]),
                    ]),
                ]),
                Expr::prod(vec![k(-1), U(2), U(2), U(2)]),
                Expr::prod(vec![k(-1), U(0), U(3), U(3)]),
                Expr::prod(vec![k(-1), U(1), U(1), U(4)]),
            ]),
            IneqId::Ineq5 => {
                let d2 = Expr::sum(vec![Expr::prod(vec![L(2), L(2)]), Expr::prod(vec![k(-1), U(1), U(3)])]);
                let e1 = Expr::sum(vec![Expr::prod(vec![U(1), U(1)]), Expr::prod(vec![k(-1), L(0), L(2)])]);
                let e3 = Expr::sum(vec![Expr::prod(vec![U(3), U(3)]), Expr::prod(vec![k(-1), L(2), L(4)])]);
                Expr::sum(vec![Expr::prod(vec![d2.clone(), d2]), Expr::prod(vec![k(-1), e1, e3])])
            }
            IneqId::Ineq6 => {
                let d1 = Expr::sum(vec![Expr::prod(vec![L(1), L(1)]), Expr::prod(vec![k(-1), U(0), U(2)])]);
                let d3 = Expr::sum(vec![Expr::prod(vec![L(3), L(3)]), Expr::prod(vec![k(-1), U(2), U(4)])]);
                let e2 = Expr::sum(vec![Expr::prod(vec![U(2), U(2)]), Expr::prod(vec![k(-1), L(1), L(3)])]);
                Expr::sum(vec![
                    Expr::prod(vec![f(), d1, d3]),
                    Expr::prod(vec![k(-1), e2.clone(), e2]),
                ])
            }
            IneqId::IneqL3 => Expr::sum(vec![
                Expr::prod(vec![k(10), L(3), L(3)]),
                Expr::prod(vec![k(6), L(1), L(5)]),
                Expr::prod(vec![k(-15), U(2), U(4)]),
                Expr::prod(vec![k(-1), U(0), U(6)]),
            ]),
            IneqId::IneqCL3 => Expr::sum(vec![
                Expr::prod(vec![
                    f(),
                    Expr::sum(vec![Expr::prod(vec![k(15), L(2), L(4)]), Expr::prod(vec![L(0), L(6)])]),
                ]),
                Expr::prod(vec![k(-10), U(3), U(3)]),
                Expr::prod(vec![k(-6), U(1), U(5)]),
            ]),
        }
    }

    /// Auxiliary positivity conditions under which the inequality implies the exact one,
    /// beyond positivity of every lower bound.
    fn difference_conditions(self) -> Vec<(String, Expr)> {
        use Expr::{L, U};
        let diff = |a: u32, b: u32, c: u32| {
            (
                format!("L({a})^2 - U({b}) U({c})"),
                Expr::sum(vec![
                    Expr::prod(vec![L(a), L(a)]),
                    Expr::prod(vec![Expr::Int(-1), U(b), U(c)]),
                ]),
            )
        };
        match self {
            IneqId::Ineq5 | IneqId::Ineq6 => vec![diff(1, 0, 2), diff(2, 1, 3), diff(3, 2, 4)],
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for IneqId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IneqId {
    type Err = CertifyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IneqId::ALL
            .into_iter()
            .find(|i| i.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| CertifyError::UnknownId(s.to_string()))
    }
}

/// `(1 + (n + delta)^{-a} c')` replaced by the polynomial minorant
/// `1 + c x^power - r x^{power + 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub c: RingElem,
    pub power: usize,
    pub minorant: Option<Minorant>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minorant {
    pub r: Rat,
    /// Exponent `a` in `(1 + 1/n)^{-a} >= 1 - a/n`.
    pub exponent: Rat,
}

impl Perturbation {
    pub fn factor(&self) -> RingPoly {
        let mut p = &RingPoly::one() + &RingPoly::monomial(self.c.clone(), self.power);
        if let Some(m) = &self.minorant {
            p = &p - &RingPoly::monomial(RingElem::rat(m.r.clone()), self.power + 1);
        }
        p
    }

    /// `r x^{p+1} - c a x^{p+2}`: nonnegativity makes the minorant valid, since
    /// `c (n+1)^{-a} >= c n^{-a} (1 - a/n)`.
    pub fn minorant_gap(&self) -> Option<RingPoly> {
        let m = self.minorant.as_ref()?;
        let r = RingPoly::monomial(RingElem::rat(m.r.clone()), self.power + 1);
        let ca = RingPoly::monomial(self.c.scale(&m.exponent), self.power + 2);
        Some(&r - &ca)
    }

    /// Human-readable form of the multiplier.
    pub fn describe(&self) -> String {
        let mut s = format!("1 + [{}] x^{}", self.c, self.power);
        if let Some(m) = &self.minorant {
            s.push_str(&format!(" - ({}) x^{}", m.r, self.power + 1));
        }
        s
    }
}

/// Expression tree over the bound polynomials.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    L(u32),
    U(u32),
    /// The companion multiplier.
    Factor,
    Int(i64),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
}

/// One product in the fully expanded formal sum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Term {
    pub coeff: i64,
    pub perturbed: bool,
    pub bounds: Vec<(Side, u32)>,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.coeff)?;
        if self.perturbed {
            f.write_str("*F")?;
        }
        for (side, s) in &self.bounds {
            let c = match side {
                Side::Lower => 'L',
                Side::Upper => 'U',
            };
            write!(f, "*{c}{s}")?;
        }
        Ok(())
    }
}

impl Expr {
    pub fn sum(v: Vec<Expr>) -> Expr {
        Expr::Sum(v)
    }

    pub fn prod(v: Vec<Expr>) -> Expr {
        Expr::Prod(v)
    }

    /// Number of bound factors in every product; `None` if not homogeneous.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        match self {
            Expr::L(_) | Expr::U(_) => Some(1),
            Expr::Factor | Expr::Int(_) => Some(0),
            Expr::Sum(v) => {
                let mut it = v.iter().map(Expr::homogeneous_degree);
                let first = it.next()??;
                it.all(|d| d == Some(first)).then_some(first)
            }
            Expr::Prod(v) => v.iter().map(Expr::homogeneous_degree).sum(),
        }
    }

    /// Expansion into a formal sum of products, like terms merged.
    pub fn terms(&self) -> Vec<Term> {
        let raw = self.raw_terms();
        let mut merged: BTreeMap<(bool, Vec<(Side, u32)>), i64> = BTreeMap::new();
        for t in raw {
            *merged.entry((t.perturbed, t.bounds)).or_default() += t.coeff;
        }
        merged
            .into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|((perturbed, bounds), coeff)| Term {
                coeff,
                perturbed,
                bounds,
            })
            .collect()
    }

    fn raw_terms(&self) -> Vec<Term> {
        let leaf = |b: Option<(Side, u32)>, perturbed: bool, coeff: i64| {
            vec![Term {
                coeff,
                perturbed,
                bounds: b.into_iter().collect(),
            }]
        };
        match self {
            Expr::L(s) => leaf(Some((Side::Lower, *s)), false, 1),
            Expr::U(s) => leaf(Some((Side::Upper, *s)), false, 1),
            Expr::Factor => leaf(None, true, 1),
            Expr::Int(k) => leaf(None, false, *k),
            Expr::Sum(v) => v.iter().flat_map(Expr::raw_terms).collect(),
            Expr::Prod(v) => v.iter().fold(leaf(None, false, 1), |acc, e| {
                let rhs = e.raw_terms();
                let mut out = Vec::with_capacity(acc.len() * rhs.len());
                for a in &acc {
                    for b in &rhs {
                        let mut bounds = a.bounds.clone();
                        bounds.extend(b.bounds.iter().copied());
                        bounds.sort();
                        out.push(Term {
                            coeff: a.coeff * b.coeff,
                            perturbed: a.perturbed || b.perturbed,
                            bounds,
                        });
                    }
                }
                out
            }),
        }
    }

    /// Exact polynomial in `x`.
    pub fn to_poly(&self, bounds: &BoundSet, factor: &RingPoly) -> RingPoly {
        match self {
            Expr::L(s) => bounds.poly(Side::Lower, *s).clone(),
            Expr::U(s) => bounds.poly(Side::Upper, *s).clone(),
            Expr::Factor => factor.clone(),
            Expr::Int(k) => RingPoly::constant(RingElem::int(*k)),
            Expr::Sum(v) => v
                .iter()
                .fold(RingPoly::zero(), |acc, e| &acc + &e.to_poly(bounds, factor)),
            Expr::Prod(v) => {
                // integer factors scale instead of multiplying
                let mut scale = 1i64;
                let mut acc: Option<RingPoly> = None;
                for e in v {
                    if let Expr::Int(k) = e {
                        scale *= k;
                        continue;
                    }
                    let p = e.to_poly(bounds, factor);
                    acc = Some(match acc {
                        None => p,
                        Some(a) => &a * &p,
                    });
                }
                let acc = acc.unwrap_or_else(RingPoly::one);
                if scale == 1 {
                    acc
                } else {
                    acc.scale(&Rat::from_integer(scale.into()))
                }
            }
        }
    }

    /// Interval evaluation with caller-supplied leaf values.
    pub fn eval_with(&self, leaf: &dyn Fn(Side, u32) -> Interval, factor: &Interval, prec: Precision) -> Interval {
        match self {
            Expr::L(s) => leaf(Side::Lower, *s),
            Expr::U(s) => leaf(Side::Upper, *s),
            Expr::Factor => factor.clone(),
            Expr::Int(k) => Interval::from_int(*k),
            Expr::Sum(v) => v.iter().fold(Interval::zero(), |acc, e| {
                acc.add(&e.eval_with(leaf, factor, prec), prec)
            }),
            Expr::Prod(v) => v.iter().fold(Interval::one(), |acc, e| {
                acc.mul(&e.eval_with(leaf, factor, prec), prec)
            }),
        }
    }
}

/// Exact `L` and `U` polynomials for `s = 0..=s_max` at one order.
#[derive(Debug, Clone)]
pub struct BoundSet {
    pub order: u32,
    pub s_max: u32,
    lower: Vec<RingPoly>,
    upper: Vec<RingPoly>,
    pub raw: Vec<(BoundPoly, BoundPoly)>,
    /// Largest `n(N, s)` over the set.
    pub n_min: u64,
}

impl BoundSet {
    pub fn new(order: u32, s_max: u32, prec: Precision) -> Result<Self, CertifyError> {
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut raw = Vec::new();
        let mut n_min = 0;
        for s in 0..=s_max {
            let l = bound_poly(s, order, Side::Lower, prec)?;
            let u = bound_poly(s, order, Side::Upper, prec)?;
            n_min = n_min.max(l.n_min);
            lower.push(RingPoly::new(l.ring_coeffs()));
            upper.push(RingPoly::new(u.ring_coeffs()));
            raw.push((l, u));
        }
        Ok(Self {
            order,
            s_max,
            lower,
            upper,
            raw,
            n_min,
        })
    }

    pub fn poly(&self, side: Side, s: u32) -> &RingPoly {
        match side {
            Side::Lower => &self.lower[s as usize],
            Side::Upper => &self.upper[s as usize],
        }
    }

    pub fn bound(&self, side: Side, s: u32) -> &BoundPoly {
        let pair = &self.raw[s as usize];
        match side {
            Side::Lower => &pair.0,
            Side::Upper => &pair.1,
        }
    }
}

/// A polynomial that must be positive on the certified interval.
#[derive(Debug, Clone)]
pub struct Condition {
    pub name: String,
    pub poly: RingPoly,
}

/// A bound inequality in expanded form together with its side conditions.
#[derive(Debug, Clone)]
pub struct IneqPoly {
    pub id: IneqId,
    pub order: u32,
    pub form: Expr,
    pub terms: Vec<Term>,
    pub degree: u32,
    pub perturbation: Option<Perturbation>,
    pub factor: RingPoly,
    pub expanded: RingPoly,
    pub bounds: BoundSet,
    /// `n(N, s)^{-1/2}` over all involved `s`, rounded up.
    pub x0: Dyadic,
    pub side_conditions: Vec<Condition>,
}

impl IneqPoly {
    pub fn build(id: IneqId, order: u32, prec: Precision) -> Result<Self, CertifyError> {
        let form = id.form();
        let degree = form
            .homogeneous_degree()
            .ok_or(CertifyError::NotHomogeneous(id.name()))?;
        let bounds = BoundSet::new(order, id.s_max(), prec)?;
        let perturbation = id.perturbation();
        let factor = perturbation
            .as_ref()
            .map(Perturbation::factor)
            .unwrap_or_else(RingPoly::one);
        let expanded = form.to_poly(&bounds, &factor);

        let mut side_conditions: Vec<Condition> = (0..=id.s_max())
            .map(|s| Condition {
                name: format!("L({s}) > 0"),
                poly: bounds.poly(Side::Lower, s).clone(),
            })
            .collect();
        for (name, e) in id.difference_conditions() {
            side_conditions.push(Condition {
                name: format!("{name} > 0"),
                poly: e.to_poly(&bounds, &factor),
            });
        }
        if let Some(p) = &perturbation {
            side_conditions.push(Condition {
                name: "multiplier > 0".into(),
                poly: factor.clone(),
            });
            if let Some(gap) = p.minorant_gap() {
                side_conditions.push(Condition {
                    name: "minorant gap > 0".into(),
                    poly: gap,
                });
            }
        }

        Ok(Self {
            id,
            order,
            terms: form.terms(),
            form,
            degree,
            perturbation,
            factor,
            expanded,
            x0: inv_sqrt_up(bounds.n_min, prec),
            bounds,
            side_conditions,
        })
    }

    /// Unexpanded evaluation: every bound polynomial evaluated separately.
    pub fn eval_unexpanded(&self, x: &Interval, prec: Precision) -> Interval {
        let leaf = |side, s| self.bounds.poly(side, s).eval(x, prec);
        self.form.eval_with(&leaf, &self.factor.eval(x, prec), prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for id in IneqId::ALL {
            assert_eq!(id.name().parse::<IneqId>().unwrap(), id);
        }
        assert!("ineq9".parse::<IneqId>().is_err());
    }

    #[test]
    fn homogeneity() {
        let degrees: Vec<_> = IneqId::ALL.iter().map(|i| i.form().homogeneous_degree()).collect();
        assert_eq!(degrees, [2, 2, 3, 3, 4, 4, 2, 2].map(Some));
        for t in IneqId::Ineq4.form().terms() {
            assert_eq!(t.bounds.len(), 3);
        }
        let bad = Expr::sum(vec![Expr::L(0), Expr::prod(vec![Expr::L(0), Expr::U(1)])]);
        assert_eq!(bad.homogeneous_degree(), None);
    }

    #[test]
    fn formal_terms() {
        let t: Vec<String> = IneqId::Ineq1.form().terms().iter().map(|t| t.to_string()).collect();
        assert_eq!(t, ["+1*L0*L4", "+3*L2*L2", "-4*U1*U3"]);
        let t5 = IneqId::Ineq5.form().terms();
        assert!(t5.iter().all(|t| t.bounds.len() == 4));
    }

    #[test]
    fn perturbation_polynomials() {
        let p = IneqId::Ineq2.perturbation().unwrap();
        let f = p.factor();
        assert_eq!(f.degree(), Some(7));
        assert_eq!(f.coeff(0), RingElem::one());
        assert_eq!(f.coeff(7), RingElem::int(-1));
        let gap = p.minorant_gap().unwrap();
        assert_eq!(gap.low_zero_count(), 7);
        assert!(IneqId::IneqCL3.perturbation().unwrap().minorant_gap().is_none());
    }
}
