use std::sync::OnceLock;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use qcert::budget::{inv_sqrt, inv_sqrt_up, prefactor};
use qcert::certify::*;
use qcert::exact_q::QTable;
use qcert::numerics::{Dyadic, Interval, Precision};

fn table() -> &'static QTable {
    static T: OnceLock<QTable> = OnceLock::new();
    T.get_or_init(|| QTable::compute(20_010))
}

fn ineqs() -> &'static Vec<IneqPoly> {
    static I: OnceLock<Vec<IneqPoly>> = OnceLock::new();
    I.get_or_init(|| {
        IneqId::ALL
            .iter()
            .map(|id| IneqPoly::build(*id, id.default_order(), Precision::default()).unwrap())
            .collect()
    })
}

fn theorem_for(id: IneqId) -> TheoremSpec {
    TheoremId::ALL.iter().map(|t| t.spec()).find(|s| s.ineq == id).unwrap()
}

/// Uniform dyadic point in `(0, x]`.
fn sample_x(rng: &mut StdRng, x: &Dyadic) -> Dyadic {
    let k: u64 = rng.gen_range(1..=1u64 << 40);
    x.mul(&Dyadic::new(k.into(), -40))
}

#[test]
fn proved_certificates_are_positive_at_random_points() {
    let prec = Precision::default();
    let mut rng = StdRng::seed_from_u64(7);
    for ineq in ineqs() {
        let n = theorem_for(ineq.id).window();
        let c = certify_at(ineq, n, &CertifyOptions::default());
        assert_eq!(c.status, Status::Proved, "{}", ineq.id);
        for _ in 0..100 {
            let x = Interval::point(sample_x(&mut rng, &c.main.x_star));
            assert!(ineq.expanded.eval(&x, prec).is_positive(), "{}", ineq.id);
            for cond in &ineq.side_conditions {
                assert!(cond.poly.eval(&x, prec).is_positive(), "{}: {}", ineq.id, cond.name);
            }
        }
    }
}

#[test]
fn expanded_and_unexpanded_forms_agree() {
    let prec = Precision::default();
    let mut rng = StdRng::seed_from_u64(11);
    for ineq in ineqs() {
        for _ in 0..20 {
            let x = Interval::point(sample_x(&mut rng, &ineq.x0));
            let e = ineq.expanded.eval(&x, prec);
            let u = ineq.eval_unexpanded(&x, prec);
            assert!(!(e.hi() < u.lo() || u.hi() < e.lo()), "{}", ineq.id);
        }
    }
}

#[test]
fn prefactors_cancel() {
    let prec = Precision::default();
    let mut rng = StdRng::seed_from_u64(13);
    for ineq in ineqs() {
        for _ in 0..20 {
            let n: u64 = rng.gen_range(1_000..=19_990);
            let x = inv_sqrt(n, prec);
            let pf = prefactor(n, prec);
            let leaf = |side, s| pf.mul(&ineq.bounds.poly(side, s).eval(&x, prec), prec);
            let with = ineq.form.eval_with(&leaf, &ineq.factor.eval(&x, prec), prec);
            let without = ineq.expanded.eval(&x, prec);
            if with.contains_zero() || without.contains_zero() {
                continue;
            }
            assert_eq!(with.is_positive(), without.is_positive(), "{} at n={n}", ineq.id);
            // the ratio is exactly prefactor^degree
            let scale = pf.powi(ineq.degree as i32, prec).unwrap();
            let ratio = with.div(&without, prec).unwrap();
            assert!(!(ratio.hi() < scale.lo() || scale.hi() < ratio.lo()), "{}", ineq.id);
        }
    }
}

#[test]
fn certified_regime_agrees_with_exact_arithmetic() {
    let t = table();
    let mut rng = StdRng::seed_from_u64(17);
    for id in TheoremId::ALL {
        let spec = id.spec();
        for _ in 0..50 {
            let m = rng.gen_range(spec.window()..=20_010 - id.arity() as u64 + 1);
            assert_eq!(
                exact_holds(id, t, m, Reading::Proved, 1536).unwrap(),
                Some(true),
                "{id} at {m}"
            );
        }
    }
}

#[test]
fn structural_properties() {
    let by_id = |id| ineqs().iter().find(|i| i.id == id).unwrap();
    let i1 = by_id(IneqId::Ineq1);
    let (d, r) = i1.expanded.strip_low_zeros();
    assert!(d > 0);
    assert!(r.coeff(0).eval(Precision::default()).is_positive());

    let i3 = by_id(IneqId::Ineq3);
    assert!(i3.expanded.degree().unwrap() <= 3 * (i3.order as usize + 1));
    assert!(by_id(IneqId::Ineq4).terms.iter().all(|t| t.bounds.len() == 3));

    // x0 is the common validity radius of the bounds
    assert_eq!(n_of_x(&i1.x0), 5019);
    assert_eq!(n_of_x(&i3.x0), 18502);
}

#[test]
fn double_turan_certified_at_window() {
    let i5 = ineqs().iter().find(|i| i.id == IneqId::Ineq5).unwrap();
    let c = certify_ineq(i5, &inv_sqrt_up(5019, Precision::default()), &CertifyOptions::default());
    assert_eq!(c.status, Status::Proved);
    assert_eq!(c.main.n_star, 5019);
    assert!(!c.main.max_depth_hit);
}

#[test]
fn companion_bound_inequalities_fail_below_their_crossings() {
    let opts = CertifyOptions::default();
    for (id, n) in [(IneqId::Ineq2, 5019u64), (IneqId::Ineq6, 5019)] {
        let ineq = ineqs().iter().find(|i| i.id == id).unwrap();
        let c = certify_at(ineq, n, &opts);
        assert_eq!(c.status, Status::Refuted, "{id}");
        let w = c.main.witness.unwrap();
        let v = ineq.expanded.eval(&Interval::point(w), opts.precision);
        assert!(v.is_negative());
    }
}

#[test]
fn crossover_is_minimal() {
    let opts = CertifyOptions::default();
    let ineq = ineqs().iter().find(|i| i.id == IneqId::Ineq1).unwrap();
    let c = find_crossover(ineq, 1, 5019, &opts).unwrap();
    assert!(c.n <= 2469);
    assert_eq!(certify_at(ineq, c.n, &opts).status, Status::Proved);
    assert_ne!(certify_at(ineq, c.n - 1, &opts).status, Status::Proved);
}

#[test]
fn report_json_shape() {
    let t = table().truncated(5_100);
    let spec = TheoremId::A.spec();
    let r = verify_theorem(&spec, &t, &VerifyOptions::default());
    assert!(r.passed(), "{:?}", r.failed_stage);
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    for key in [
        "theorem",
        "threshold",
        "shift",
        "n_star",
        "exact_range",
        "sharpness_witness",
        "status",
        "precision_bits",
        "subdivisions",
        "seconds",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["theorem"], "A");
    assert_eq!(v["status"], "pass");
    assert_eq!(v["threshold"], 230);
}

#[test]
fn insufficient_table_is_reported() {
    let t = table().truncated(3_000);
    let r = verify_theorem(&TheoremId::A.spec(), &t, &VerifyOptions::default());
    assert!(!r.passed());
    assert!(r.failed_stage.unwrap().starts_with("exact"));
}

#[test]
fn exact_statements_switch_at_threshold() {
    let t = table();
    for id in TheoremId::ALL {
        let spec = id.spec();
        let r = exact_verify(id, t, spec.first_m(), spec.first_m() + 200, Reading::Proved).unwrap();
        assert!(r.passed(), "{id}");
        let below = exact_holds(id, t, spec.first_m() - 1, Reading::Proved, 1536).unwrap();
        assert_eq!(below, Some(false), "{id}");
    }
}
