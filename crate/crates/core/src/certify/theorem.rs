use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::forms::{IneqId, IneqPoly};
use super::invariants::{invariant_a, invariant_b};
use super::positivity::{find_crossover, CertifyOptions, Crossover, IneqCertificate, Status};
use super::CertifyError;
use crate::budget::{inv_sqrt, MAX_PRECISION_BITS};
use crate::exact_q::QTable;
use crate::expansion::RingElem;
use crate::numerics::{Interval, Precision, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TheoremId {
    #[serde(rename = "A")]
    A,
    #[serde(rename = "A-companion")]
    ACompanion,
    #[serde(rename = "B")]
    B,
    #[serde(rename = "B-companion")]
    BCompanion,
    #[serde(rename = "double-turan")]
    DoubleTuran,
    #[serde(rename = "double-turan-companion")]
    DoubleTuranCompanion,
    #[serde(rename = "laguerre3")]
    Laguerre3,
    #[serde(rename = "laguerre3-companion")]
    Laguerre3Companion,
}

impl TheoremId {
    pub const ALL: [TheoremId; 8] = [
        TheoremId::A,
        TheoremId::ACompanion,
        TheoremId::B,
        TheoremId::BCompanion,
        TheoremId::DoubleTuran,
        TheoremId::DoubleTuranCompanion,
        TheoremId::Laguerre3,
        TheoremId::Laguerre3Companion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::A => "A",
            TheoremId::ACompanion => "A-companion",
            TheoremId::B => "B",
            TheoremId::BCompanion => "B-companion",
            TheoremId::DoubleTuran => "double-turan",
            TheoremId::DoubleTuranCompanion => "double-turan-companion",
            TheoremId::Laguerre3 => "laguerre3",
            TheoremId::Laguerre3Companion => "laguerre3-companion",
        }
    }

    pub fn spec(self) -> TheoremSpec {
        let (shift, threshold, order, crossover_paper, exact_range, ineq) = match self {
            TheoremId::A => (1, 230, 14, 2469, (229, 5018), IneqId::Ineq1),
            TheoremId::ACompanion => (1, 279, 14, 5885, (278, 5884), IneqId::Ineq2),
            TheoremId::B => (1, 272, 24, 9800, (271, 18501), IneqId::Ineq3),
            TheoremId::BCompanion => (1, 309, 24, 18225, (308, 18501), IneqId::Ineq4),
            TheoremId::DoubleTuran => (2, 273, 14, 3153, (271, 5018), IneqId::Ineq5),
            TheoremId::DoubleTuranCompanion => (2, 346, 14, 7056, (344, 7055), IneqId::Ineq6),
            TheoremId::Laguerre3 => (0, 651, 24, 12884, (651, 18501), IneqId::IneqL3),
            TheoremId::Laguerre3Companion => (0, 715, 24, 17880, (715, 18501), IneqId::IneqCL3),
        };
        TheoremSpec {
            id: self,
            shift,
            threshold,
            order,
            crossover_paper,
            exact_range,
            ineq,
        }
    }

    /// Number of consecutive q-values in the statement.
    pub fn arity(self) -> usize {
        match self {
            TheoremId::Laguerre3 | TheoremId::Laguerre3Companion => 7,
            _ => 5,
        }
    }

    /// Companion factor `c(m)` of the exact statement in the shifted index.
    fn companion(self, reading: Reading) -> Option<Companion> {
        let rat = |n: i64, d: i64| Rat::new(n.into(), d.into());
        let inv_sqrt3 = RingElem::monomial(rat(1, 3), 0, 1);
        match self {
            TheoremId::ACompanion => Some(Companion {
                k: RingElem::monomial(rat(1, 32), 2, 0),
                delta: 1,
                twice_a: 6,
            }),
            TheoremId::BCompanion => Some(Companion {
                k: RingElem::monomial(rat(1, 288), 3, 0) * inv_sqrt3,
                delta: 1,
                twice_a: 9,
            }),
            TheoremId::DoubleTuranCompanion => Some(Companion {
                k: RingElem::monomial(rat(1, 2), 1, 0) * inv_sqrt3,
                delta: match reading {
                    Reading::Proved => 1,
                    Reading::Literal => 2,
                },
                twice_a: 3,
            }),
            TheoremId::Laguerre3Companion => Some(Companion {
                k: RingElem::monomial(rat(5, 256), 3, 0) * inv_sqrt3,
                delta: 0,
                twice_a: 9,
            }),
            _ => None,
        }
    }

    /// Exact statement at shifted index `m` as `base + weight * c(m) > 0`.
    fn base_weight(self, q: &[BigInt]) -> (BigInt, BigInt) {
        let zero = BigInt::zero;
        match self {
            TheoremId::A => (invariant_a(&arr5(q)), zero()),
            TheoremId::ACompanion => {
                let w = 4 * &q[1] * &q[3];
                (&w - &q[0] * &q[4] - 3 * &q[2] * &q[2], w)
            }
            TheoremId::B => (invariant_b(&arr5(q)), zero()),
            TheoremId::BCompanion => {
                let w = 2 * &q[1] * &q[2] * &q[3] + &q[0] * &q[2] * &q[4];
                let rhs = &q[2] * &q[2] * &q[2] + &q[0] * &q[3] * &q[3] + &q[1] * &q[1] * &q[4];
                (&w - rhs, w)
            }
            TheoremId::DoubleTuran | TheoremId::DoubleTuranCompanion => {
                let t1 = &q[1] * &q[1] - &q[0] * &q[2];
                let t2 = &q[2] * &q[2] - &q[1] * &q[3];
                let t3 = &q[3] * &q[3] - &q[2] * &q[4];
                if self == TheoremId::DoubleTuran {
                    (&t2 * &t2 - &t1 * &t3, zero())
                } else {
                    let w = t1 * t3;
                    (&w - &t2 * &t2, w)
                }
            }
            TheoremId::Laguerre3 => (
                10 * &q[3] * &q[3] + 6 * &q[1] * &q[5] - 15 * &q[2] * &q[4] - &q[0] * &q[6],
                zero(),
            ),
            TheoremId::Laguerre3Companion => {
                let w = 15 * &q[2] * &q[4] + &q[0] * &q[6];
                (&w - 10 * &q[3] * &q[3] - 6 * &q[1] * &q[5], w)
            }
        }
    }
}

fn arr5(q: &[BigInt]) -> [BigInt; 5] {
    std::array::from_fn(|i| q[i].clone())
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = CertifyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('á', "a").replace('_', "-");
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name().to_ascii_lowercase() == norm)
            .ok_or_else(|| CertifyError::UnknownId(s.to_string()))
    }
}

/// Which form of a companion statement to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Reading {
    /// The shifted statement that the bound inequality implies.
    Proved,
    /// The statement read verbatim in the original index.
    Literal,
}

/// `c(m) = k (m + delta)^{-twice_a / 2}`.
#[derive(Debug, Clone)]
struct Companion {
    k: RingElem,
    delta: u64,
    twice_a: u32,
}

impl Companion {
    fn eval(&self, m: u64, prec: Precision) -> Interval {
        let x = inv_sqrt(m + self.delta, prec);
        self.k
            .eval(prec)
            .mul(&x.powi(self.twice_a as i32, prec).expect("positive power"), prec)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremSpec {
    pub id: TheoremId,
    /// Offset between the statement's index and the shifted index `m = n - shift`.
    pub shift: u64,
    /// Stated bound in the original index.
    pub threshold: u64,
    pub order: u32,
    /// Published cutoff of the bound inequality.
    pub crossover_paper: u64,
    /// Published exact range in the shifted index.
    pub exact_range: (u64, u64),
    pub ineq: IneqId,
}

impl TheoremSpec {
    /// Largest `n` up to which the exact range must reach.
    pub fn window(&self) -> u64 {
        self.exact_range.1 + 1
    }

    /// First shifted index covered by the statement.
    pub fn first_m(&self) -> u64 {
        self.threshold - self.shift
    }

    /// Companion multiplier in `x`, when there is one.
    pub fn perturbation(&self) -> Option<String> {
        self.ineq.perturbation().map(|p| p.describe())
    }
}

/// Decides the exact statement at shifted index `m`; `None` if even
/// `max_bits` of precision cannot separate the sides.
pub fn exact_holds(
    id: TheoremId,
    t: &QTable,
    m: u64,
    reading: Reading,
    max_bits: u32,
) -> Result<Option<bool>, CertifyError> {
    let k = id.arity();
    t.ensure_range(m as usize, m as usize, k - 1)?;
    let q: Vec<BigInt> = (0..k).map(|i| t.qi(m as usize + i)).collect();
    let (base, weight) = id.base_weight(&q);
    let Some(c) = id.companion(reading) else {
        return Ok(Some(base.is_positive()));
    };
    if weight.is_zero() || (base.is_positive() && !weight.is_negative()) {
        return Ok(Some(base.is_positive()));
    }
    if m + c.delta == 0 {
        return Ok(Some(weight.is_positive()));
    }
    let mut bits = 192u32;
    loop {
        let prec = Precision::new(bits)?;
        let v = Interval::from_bigint(&base).add(&Interval::from_bigint(&weight).mul(&c.eval(m, prec), prec), prec);
        if v.is_positive() {
            return Ok(Some(true));
        }
        if !v.lo().is_positive() && !v.hi().is_positive() {
            return Ok(Some(false));
        }
        if bits >= max_bits {
            return Ok(None);
        }
        bits = (bits * 2).min(max_bits);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactResult {
    pub range: (u64, u64),
    pub checked: u64,
    /// Shifted indices where the statement fails.
    pub failures: Vec<u64>,
    /// Shifted indices left undecided at the maximal precision.
    pub undecided: Vec<u64>,
}

impl ExactResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.undecided.is_empty()
    }
}

/// Checks the exact statement on every shifted index in `[lo, hi]`.
pub fn exact_verify(
    id: TheoremId,
    t: &QTable,
    lo: u64,
    hi: u64,
    reading: Reading,
) -> Result<ExactResult, CertifyError> {
    t.ensure_range(lo as usize, hi.max(lo) as usize, id.arity() - 1)?;
    let outcomes: Vec<(u64, Option<bool>)> = (lo..=hi)
        .into_par_iter()
        .map(|m| Ok((m, exact_holds(id, t, m, reading, MAX_PRECISION_BITS)?)))
        .collect::<Result<_, CertifyError>>()?;
    let mut res = ExactResult {
        range: (lo, hi),
        checked: outcomes.len() as u64,
        failures: Vec::new(),
        undecided: Vec::new(),
    };
    for (m, o) in outcomes {
        match o {
            Some(true) => {}
            Some(false) => res.failures.push(m),
            None => res.undecided.push(m),
        }
    }
    Ok(res)
}

/// Largest shifted index below `first_m` where the statement fails, in the original index.
pub fn sharpness_witness(spec: &TheoremSpec, t: &QTable, reading: Reading) -> Result<Option<u64>, CertifyError> {
    let start = match spec.id {
        TheoremId::Laguerre3Companion => 1,
        _ => 0,
    };
    let first = spec.first_m();
    if first == 0 {
        return Ok(None);
    }
    let r = exact_verify(spec.id, t, start, first - 1, reading)?;
    Ok(r.failures.iter().chain(&r.undecided).max().map(|m| m + spec.shift))
}

/// One reading of a companion statement together with its smallest valid threshold.
#[derive(Debug, Clone, Serialize)]
pub struct ReadingCheck {
    pub reading: Reading,
    pub holds_from_threshold: bool,
    /// Largest failing index (original indexing) up to the window.
    pub last_failure: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub theorem: TheoremId,
    pub threshold: u64,
    pub shift: u64,
    /// Certified regime starts here (shifted index).
    pub n_star: Option<u64>,
    /// Smallest certified `n` for the bound inequality alone.
    pub crossover: Option<u64>,
    pub crossover_paper: u64,
    /// Validity window of the bounds, `max_s n(N, s)`.
    pub bounds_window: u64,
    pub exact_range: Option<(u64, u64)>,
    pub exact_failures: Vec<u64>,
    pub exact_undecided: Vec<u64>,
    pub sharpness_witness: Option<u64>,
    pub literal_reading: Option<ReadingCheck>,
    pub status: Verdict,
    pub failed_stage: Option<String>,
    pub precision_bits: u32,
    pub subdivisions: u64,
    pub seconds: f64,
    #[serde(skip)]
    pub certificate: Option<IneqCertificate>,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub certify: CertifyOptions,
    pub sharpness: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            certify: CertifyOptions::default(),
            sharpness: true,
        }
    }
}

/// Crossover of the bound inequality for a theorem.
pub fn theorem_crossover(spec: &TheoremSpec, opts: &CertifyOptions) -> Result<(IneqPoly, Crossover), CertifyError> {
    let ineq = IneqPoly::build(spec.ineq, spec.order, opts.precision)?;
    let cross = find_crossover(&ineq, 1, spec.window(), opts)?;
    Ok((ineq, cross))
}

/// Certified regime, finite exact range and optional sharpness scan.
pub fn verify_theorem(spec: &TheoremSpec, t: &QTable, opts: &VerifyOptions) -> VerificationReport {
    let start = Instant::now();
    let mut report = VerificationReport {
        theorem: spec.id,
        threshold: spec.threshold,
        shift: spec.shift,
        n_star: None,
        crossover: None,
        crossover_paper: spec.crossover_paper,
        bounds_window: 0,
        exact_range: None,
        exact_failures: Vec::new(),
        exact_undecided: Vec::new(),
        sharpness_witness: None,
        literal_reading: None,
        status: Verdict::Inconclusive,
        failed_stage: None,
        precision_bits: opts.certify.precision.bits(),
        subdivisions: 0,
        seconds: 0.0,
        certificate: None,
    };
    let finish = |mut r: VerificationReport, status: Verdict, stage: Option<String>| {
        r.status = status;
        r.failed_stage = stage;
        r.seconds = start.elapsed().as_secs_f64();
        r
    };

    let (ineq, cross) = match theorem_crossover(spec, &opts.certify) {
        Ok(v) => v,
        Err(e) => return finish(report, Verdict::Inconclusive, Some(format!("certify: {e}"))),
    };
    report.crossover = Some(cross.n);
    report.bounds_window = ineq.bounds.n_min;
    report.precision_bits = cross.certificate.precision_bits();
    report.subdivisions = cross.certificate.subdivisions();
    let n_star = cross.n.max(ineq.bounds.n_min);
    report.n_star = Some(n_star);
    report.certificate = Some(cross.certificate);
    if n_star > spec.window() {
        return finish(
            report,
            Verdict::Fail,
            Some(format!("certify: n_star {n_star} beyond window {}", spec.window())),
        );
    }

    let lo = spec.first_m();
    let hi = n_star - 1;
    match exact_verify(spec.id, t, lo, hi, Reading::Proved) {
        Ok(r) => {
            report.exact_range = Some(r.range);
            report.exact_failures = r.failures.clone();
            report.exact_undecided = r.undecided.clone();
            if !r.failures.is_empty() {
                return finish(report, Verdict::Fail, Some("exact".into()));
            }
            if !r.undecided.is_empty() {
                return finish(report, Verdict::Inconclusive, Some("exact".into()));
            }
        }
        Err(e) => return finish(report, Verdict::Inconclusive, Some(format!("exact: {e}"))),
    }

    if opts.sharpness {
        match sharpness_witness(spec, t, Reading::Proved) {
            Ok(w) => report.sharpness_witness = w,
            Err(e) => return finish(report, Verdict::Inconclusive, Some(format!("sharpness: {e}"))),
        }
        if spec.id.companion(Reading::Literal).map(|c| c.delta) != spec.id.companion(Reading::Proved).map(|c| c.delta) {
            match literal_check(spec, t, hi) {
                Ok(c) => report.literal_reading = Some(c),
                Err(e) => return finish(report, Verdict::Inconclusive, Some(format!("literal reading: {e}"))),
            }
        }
    }
    finish(report, Verdict::Pass, None)
}

/// Checks the verbatim reading of a companion statement on `[first_m, hi]`.
pub fn literal_check(spec: &TheoremSpec, t: &QTable, hi: u64) -> Result<ReadingCheck, CertifyError> {
    let r = exact_verify(spec.id, t, spec.first_m(), hi, Reading::Literal)?;
    Ok(ReadingCheck {
        reading: Reading::Literal,
        holds_from_threshold: r.passed(),
        last_failure: r.failures.iter().max().map(|m| m + spec.shift),
    })
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.status == Verdict::Pass
    }

    /// No gap between the exact and certified regimes.
    pub fn seamless(&self) -> bool {
        match (self.exact_range, self.n_star) {
            (Some((_, hi)), Some(n)) => n <= hi + 1,
            _ => false,
        }
    }
}

impl From<Status> for Verdict {
    fn from(s: Status) -> Self {
        match s {
            Status::Proved => Verdict::Pass,
            Status::Refuted => Verdict::Fail,
            Status::Inconclusive => Verdict::Inconclusive,
        }
    }
}
