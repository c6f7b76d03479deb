//! Acceptance harness: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use qcert::budget::{bound_poly, bound_value_with, lemma21_check, n_min, LemmaOutcome, Side};
use qcert::certify::{
    certify_at, invariant_a, laguerre, verify_theorem, window, IneqPoly, Status, TheoremId, VerificationReport,
    VerifyOptions,
};
use qcert::exact_q::{check_log_concavity, check_turan3, odd_part_counts, q_enumerate, QTable};
use qcert::expansion::{gen_binomial, lemma31_rhs};
use qcert::numerics::{Interval, Precision, Rat};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn exact_values(t: &QTable) -> Outcome {
    ensure(t.q(9) == &8u32.into(), "q(9) != 8")?;
    for n in 0..=60u64 {
        ensure(
            t.q(n as usize) == &q_enumerate(n).unwrap(),
            format!("q({n}) differs from enumeration"),
        )?;
    }
    let odd = odd_part_counts(2000);
    ensure(odd.as_slice() == &t.values()[..=2000], "odd-part DP differs")?;
    Ok("q(9) = 8; q(0..60) match enumeration; odd-part DP agrees to 2000".into())
}

fn classical(t: &QTable) -> Outcome {
    let lc = check_log_concavity(t, 33, 10_000).unwrap();
    ensure(lc.is_empty(), format!("log-concavity fails at {lc:?}"))?;
    let lc_low = check_log_concavity(t, 1, 32).unwrap();
    ensure(!lc_low.is_empty(), "no log-concavity violation below 33")?;
    let t3 = check_turan3(t, 121, 10_000).unwrap();
    ensure(t3.is_empty(), format!("third-order Turán fails at {t3:?}"))?;
    let t3_low = check_turan3(t, 1, 120).unwrap();
    ensure(!t3_low.is_empty(), "no third-order Turán violation below 121")?;
    Ok(format!(
        "log-concave on 33..=10000 (last violation {}), third-order Turán on 121..=10000 (last violation {})",
        lc_low.last().unwrap(),
        t3_low.last().unwrap()
    ))
}

fn sandwich(t: &QTable) -> Outcome {
    let prec = Precision::default();
    let mut rng = StdRng::seed_from_u64(0x5a4d);
    let mut checked = 0;
    for order in [1u32, 6, 14, 24] {
        for s in 0..=6u32 {
            let lo_poly = bound_poly(s, order, Side::Lower, prec).unwrap();
            let hi_poly = bound_poly(s, order, Side::Upper, prec).unwrap();
            let lo_n = lo_poly.n_min;
            let hi_n = 20_000 - s as u64;
            ensure(lo_n <= hi_n, format!("empty window for N={order} s={s}"))?;
            let mut ns: Vec<u64> = (0..200).map(|_| rng.gen_range(lo_n..=hi_n)).collect();
            ns.extend([lo_n, hi_n]);
            for n in ns {
                let q = Interval::from_bigint(&BigInt::from(t.q((n + s as u64) as usize).clone()));
                let l = bound_value_with(&lo_poly, n, prec).unwrap();
                let u = bound_value_with(&hi_poly, n, prec).unwrap();
                ensure(
                    l.hi() <= q.lo() && q.hi() <= u.lo(),
                    format!("sandwich fails at N={order} s={s} n={n}"),
                )?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} certified comparisons, zero failures"))
}

fn windows() -> Outcome {
    let prec = Precision::default();
    let w14 = (0..=4).map(|s| n_min(14, s, prec)).max().unwrap();
    let w24 = (0..=6).map(|s| n_min(24, s, prec)).max().unwrap();
    ensure(w14 <= 5019 && w24 <= 18502, format!("windows {w14}, {w24}"))?;
    Ok(format!("max n(14, s) = {w14} <= 5019, max n(24, s) = {w24} <= 18502"))
}

/// Bar for `n_star` per theorem: the end of its published exact range plus one.
fn theorems(reports: &[VerificationReport]) -> Outcome {
    let mut lines = Vec::new();
    for r in reports {
        let spec = r.theorem.spec();
        let n_star = r
            .n_star
            .ok_or(format!("{}: no certificate ({:?})", r.theorem, r.failed_stage))?;
        ensure(
            r.passed(),
            format!("{}: status {:?} at {:?}", r.theorem, r.status, r.failed_stage),
        )?;
        ensure(
            n_star <= spec.window(),
            format!("{}: n_star {n_star} > {}", r.theorem, spec.window()),
        )?;
        let (lo, hi) = r.exact_range.unwrap();
        ensure(
            lo == spec.threshold - spec.shift && hi + 1 == n_star,
            format!("{}: exact range {lo}..={hi}", r.theorem),
        )?;
        ensure(
            r.exact_failures.is_empty() && r.seamless(),
            format!("{}: exact failures", r.theorem),
        )?;
        lines.push(format!(
            "{} n_star={} (crossover {}, published {}) exact {}..={}",
            r.theorem,
            n_star,
            r.crossover.unwrap(),
            r.crossover_paper,
            lo,
            hi
        ));
    }
    Ok(lines.join("; "))
}

/// Literal bar: 5019 for every N = 14 theorem and 18502 for every N = 24 theorem.
fn theorems_literal_bar(reports: &[VerificationReport]) -> Outcome {
    let mut bad = Vec::new();
    for r in reports {
        let spec = r.theorem.spec();
        let bar = if spec.order == 14 { 5019 } else { 18502 };
        match r.n_star {
            Some(n) if n <= bar => {}
            other => {
                // evidence that the bound inequality is false somewhere below the bar
                let ineq = IneqPoly::build(spec.ineq, spec.order, Precision::default()).unwrap();
                let c = certify_at(&ineq, bar, &Default::default());
                let witness = c
                    .main
                    .witness
                    .as_ref()
                    .map(|w| format!("{} negative at n = {}", spec.ineq, qcert::certify::n_of_x(w)))
                    .unwrap_or_else(|| format!("{:?}", c.status));
                bad.push(format!("{}: n_star {:?} > {bar} ({witness})", r.theorem, other));
            }
        }
    }
    ensure(bad.is_empty(), bad.join("; "))?;
    Ok("all theorems certified within 5019 / 18502".into())
}

fn sharpness(reports: &[VerificationReport]) -> Outcome {
    let fixtures: BTreeMap<String, u64> =
        serde_json::from_str(include_str!("fixtures/sharpness.json")).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    for r in reports {
        let w = r
            .sharpness_witness
            .ok_or(format!("{}: no violation below threshold", r.theorem))?;
        ensure(
            w < r.threshold,
            format!("{}: witness {w} not below threshold", r.theorem),
        )?;
        ensure(
            fixtures.get(r.theorem.name()) == Some(&w),
            format!("{}: witness {w} differs from fixture", r.theorem),
        )?;
        lines.push(format!("{} fails at n={w}", r.theorem));
    }
    Ok(lines.join(", "))
}

fn lemma21(t: &QTable) -> Outcome {
    let prec = Precision::default();
    for m in [2u32, 3] {
        for k in 0..20u64 {
            let n = 2_000 + k * 900;
            let o = lemma21_check(t, n, m, prec);
            ensure(o == LemmaOutcome::Holds, format!("m={m} n={n}: {o:?}"))?;
        }
    }
    Ok("m in {2, 3}, n = 2000, 2900, ..., 19100: q(n) within M(n)(1 +- 4/nu^m)".into())
}

fn lemma31() -> Outcome {
    let mut count = 0;
    for m in 1..=20u32 {
        for r in 0..2 * m {
            let mut brute = Rat::from_integer(0.into());
            for tt in 0..=r {
                let c = num_integer::binomial(BigInt::from(r), BigInt::from(tt));
                let term = Rat::from_integer(c) * gen_binomial(&Rat::new(tt.into(), 2.into()), m);
                if tt % 2 == 0 {
                    brute += term;
                } else {
                    brute -= term;
                }
            }
            ensure(brute == lemma31_rhs(r, m).unwrap(), format!("r={r} m={m}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} exact identities for 0 <= r < 2m <= 40"))
}

fn laguerre_consistency(t: &QTable) -> Outcome {
    for n in 0..=1000usize {
        let a = window::<5>(t, n).unwrap();
        ensure(
            laguerre(2, t, n).unwrap() == Rat::from_integer(invariant_a(&a)),
            format!("order 2 at {n}"),
        )?;
        let q = window::<7>(t, n).unwrap();
        let l3 = 10 * &q[3] * &q[3] + 6 * &q[1] * &q[5] - 15 * &q[2] * &q[4] - &q[0] * &q[6];
        ensure(
            laguerre(3, t, n).unwrap() == Rat::from_integer(l3),
            format!("order 3 at {n}"),
        )?;
    }
    Ok("orders 2 and 3 agree exactly for n <= 1000".into())
}

fn main() {
    let start = Instant::now();
    let t = QTable::compute(20_010);
    let reports: Vec<VerificationReport> = TheoremId::ALL
        .iter()
        .map(|id| verify_theorem(&id.spec(), &t, &VerifyOptions::default()))
        .collect();
    debug_assert!(reports
        .iter()
        .all(|r| r.certificate.as_ref().map(|c| c.status) != Some(Status::Refuted)));

    let criteria: Vec<Criterion> = vec![
        ("1 exact values", Box::new(|| exact_values(&t))),
        ("2 classical inequalities", Box::new(|| classical(&t))),
        ("3 asymptotic sandwich", Box::new(|| sandwich(&t))),
        ("4 window maxima", Box::new(windows)),
        ("5 theorem reproductions", Box::new(|| theorems(&reports))),
        (
            "5 theorem reproductions (bar 5019 / 18502 for every theorem)",
            Box::new(|| theorems_literal_bar(&reports)),
        ),
        ("6 sharpness", Box::new(|| sharpness(&reports))),
        ("7 Bessel-sum sandwich", Box::new(|| lemma21(&t))),
        ("8 binomial identity", Box::new(lemma31)),
        ("9 Laguerre consistency", Box::new(|| laguerre_consistency(&t))),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
