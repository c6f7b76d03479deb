//! Exact coefficient families of the asymptotic expansion of q(n + s),
//! as elements of the ring Q[pi, 1/pi, sqrt3].

mod ring;

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub use ring::{max_abs_coeff, RingElem};

use crate::numerics::{Interval, Precision, Rat};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExpansionError {
    #[error("binomial identity needs r < 2m or r = m = 0, got r={r}, m={m}")]
    IdentityDomain { r: u32, m: u32 },
}

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * k)
}

fn rat_pow(x: &Rat, e: u32) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

/// Rising factorial `x (x+1) ... (x+m-1)`.
pub fn rising_factorial(x: &Rat, m: u32) -> Rat {
    let mut acc = Rat::one();
    let mut t = x.clone();
    for _ in 0..m {
        acc *= &t;
        t += Rat::one();
    }
    acc
}

/// Generalized binomial coefficient `x (x-1) ... (x-m+1) / m!`.
pub fn gen_binomial(x: &Rat, m: u32) -> Rat {
    let mut acc = Rat::one();
    let mut t = x.clone();
    for _ in 0..m {
        acc *= &t;
        t -= Rat::one();
    }
    acc / Rat::from_integer(factorial(m))
}

/// `a_m(1) = C(1/2, m) (3/2)_m / 2^m`, the coefficients of the large-argument
/// expansion of I1.
pub fn a_coeff(m: u32) -> Rat {
    gen_binomial(&rat(1, 2), m) * rising_factorial(&rat(3, 2), m) / Rat::from_integer(BigInt::one() << m)
}

/// Closed form of `sum_{t=0}^{r} (-1)^t C(r,t) C(t/2, m)`.
pub fn lemma31_rhs(r: u32, m: u32) -> Result<Rat, ExpansionError> {
    if r == 0 && m == 0 {
        return Ok(Rat::one());
    }
    if r >= 2 * m {
        return Err(ExpansionError::IdentityDomain { r, m });
    }
    if r > m {
        return Ok(Rat::zero());
    }
    let sign = if m.is_multiple_of(2) { 1 } else { -1 };
    let num = BigInt::from(sign * r as i64) << r;
    let den = BigInt::from(m) << (2 * m);
    let binom = gen_binomial(&Rat::from_integer((2 * m - r - 1).into()), m - r);
    Ok(Rat::new(num, den) * binom)
}

/// The shift `s` and its companion rational `sigma = (24s + 1)/24`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoeffContext {
    s: u32,
    sigma: Rat,
}

impl CoeffContext {
    pub fn new(s: u32) -> Self {
        Self {
            s,
            sigma: rat(24 * s as i64 + 1, 24),
        }
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn sigma(&self) -> &Rat {
        &self.sigma
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    B,
    Bbar,
    Chat,
    Bhat,
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "B" => Ok(Self::B),
            "Bbar" => Ok(Self::Bbar),
            "Chat" => Ok(Self::Chat),
            "Bhat" => Ok(Self::Bhat),
            "Abar" => Err("Abar is purely rational; use abar_coeff".into()),
            other => Err(format!("unknown coefficient family {other:?}")),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::B => "B",
            Self::Bbar => "Bbar",
            Self::Chat => "Chat",
            Self::Bhat => "Bhat",
        })
    }
}

type Memo = RwLock<HashMap<(Family, u32, u32), RingElem>>;

fn memo() -> &'static Memo {
    static M: OnceLock<Memo> = OnceLock::new();
    M.get_or_init(|| RwLock::new(HashMap::new()))
}

fn memoized(fam: Family, k: u32, ctx: &CoeffContext, f: impl FnOnce() -> RingElem) -> RingElem {
    let key = (fam, k, ctx.s);
    if let Some(v) = memo().read().unwrap().get(&key) {
        return v.clone();
    }
    // Computed outside the lock; a concurrent duplicate insert stores the same value.
    let v = f();
    memo().write().unwrap().entry(key).or_insert(v).clone()
}

/// Coefficient of `n^{-k/2}` in the expansion of `exp(pi sqrt(n/3) (sqrt(1 + sigma/n) - 1))`.
pub fn b_coeff(k: u32, ctx: &CoeffContext) -> RingElem {
    memoized(Family::B, k, ctx, || {
        if k == 0 {
            return RingElem::one();
        }
        let sg = ctx.sigma();
        // c = pi^2 sigma / 3, kept as (sigma/3) * pi^2.
        let c = sg / rat(3, 1);
        let half = rat(1, 2);
        if k.is_multiple_of(2) {
            let kk = k / 2;
            let pre = rat_pow(sg, kk) * rising_factorial(&(&half - Rat::from_integer(kk.into())), kk + 1)
                / Rat::from_integer(kk.into());
            (1..=kk)
                .map(|l| {
                    let r = rising_factorial(&Rat::from_integer(-BigInt::from(kk)), l)
                        / Rat::from_integer(factorial(kk + l) * factorial(2 * l - 1))
                        * rat_pow(&c, l)
                        * &pre;
                    RingElem::monomial(r, 2 * l as i32, 0)
                })
                .sum()
        } else {
            let kk = (k - 1) / 2;
            let pre = rat_pow(sg, kk + 1) * rising_factorial(&(&half - Rat::from_integer(kk.into())), kk + 1);
            // pi / sqrt3 = pi sqrt3 / 3
            (0..=kk)
                .map(|l| {
                    let r = rising_factorial(&Rat::from_integer(-BigInt::from(kk)), l)
                        / Rat::from_integer(factorial(l + kk + 1) * factorial(2 * l))
                        * rat_pow(&c, l)
                        * &pre
                        / rat(3, 1);
                    RingElem::monomial(r, 2 * l as i32 + 1, 1)
                })
                .sum()
        }
    })
}

/// Coefficients of `(1 + sigma/n)^{-3/4}` in powers of `n^{-1/2}`.
pub fn abar_coeff(l: u32, ctx: &CoeffContext) -> Rat {
    if l % 2 == 1 {
        return Rat::zero();
    }
    rat_pow(ctx.sigma(), l / 2) * gen_binomial(&rat(-3, 4), l / 2)
}

pub fn bbar_coeff(k: u32, ctx: &CoeffContext) -> RingElem {
    memoized(Family::Bbar, k, ctx, || {
        (0..=k).map(|l| b_coeff(l, ctx).scale(&abar_coeff(k - l, ctx))).sum()
    })
}

/// Coefficients from re-expanding the Bessel factor around `n`.
pub fn chat_coeff(m: u32, ctx: &CoeffContext) -> RingElem {
    memoized(Family::Chat, m, ctx, || {
        let sg = ctx.sigma();
        let l = m / 2;
        if m.is_multiple_of(2) {
            // (sqrt3/pi)^{2k} = 3^k pi^{-2k}
            (0..=l)
                .map(|k| {
                    let r =
                        gen_binomial(&Rat::from_integer(-BigInt::from(k)), l - k) * a_coeff(2 * k) * rat_pow(sg, l - k);
                    RingElem::monomial(r, -2 * k as i32, 2 * k)
                })
                .sum()
        } else {
            (0..=l)
                .map(|k| {
                    let r =
                        -gen_binomial(&rat(-(2 * k as i64 + 1), 2), l - k) * a_coeff(2 * k + 1) * rat_pow(sg, l - k);
                    RingElem::monomial(r, -(2 * k as i32 + 1), 2 * k + 1)
                })
                .sum()
        }
    })
}

/// Coefficient of `n^{-m/2}` in the normalized expansion of q(n + s).
pub fn bhat_coeff(m: u32, ctx: &CoeffContext) -> RingElem {
    memoized(Family::Bhat, m, ctx, || {
        (0..=m).map(|k| bbar_coeff(k, ctx) * chat_coeff(m - k, ctx)).sum()
    })
}

pub fn coeff(fam: Family, k: u32, ctx: &CoeffContext) -> RingElem {
    match fam {
        Family::B => b_coeff(k, ctx),
        Family::Bbar => bbar_coeff(k, ctx),
        Family::Chat => chat_coeff(k, ctx),
        Family::Bhat => bhat_coeff(k, ctx),
    }
}

pub fn ring_eval(e: &RingElem, prec: Precision) -> Interval {
    e.eval(prec)
}
