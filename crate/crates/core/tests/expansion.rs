use num_bigint::BigInt;
use qcert::expansion::*;
use qcert::numerics::{Precision, Rat};

fn brute(r: u32, m: u32) -> Rat {
    (0..=r)
        .map(|t| {
            let sign = if t % 2 == 0 { 1 } else { -1 };
            Rat::from_integer(sign * num_integer::binomial(BigInt::from(r), BigInt::from(t)))
                * gen_binomial(&Rat::new(t.into(), 2.into()), m)
        })
        .sum()
}

#[test]
fn binomial_identity_exhaustive() {
    for m in 1..=20 {
        for r in 0..2 * m {
            assert_eq!(lemma31_rhs(r, m).unwrap(), brute(r, m), "r={r} m={m}");
        }
    }
}

#[test]
fn leading_coefficient_is_one() {
    for s in 0..=6 {
        assert_eq!(bhat_coeff(0, &CoeffContext::new(s)), RingElem::one());
    }
}

#[test]
fn families_parse_and_agree() {
    let ctx = CoeffContext::new(2);
    for name in ["B", "Bbar", "Chat", "Bhat"] {
        let fam: Family = name.parse().unwrap();
        let c = coeff(fam, 3, &ctx);
        let v = ring_eval(&c, Precision::default());
        assert!(v.contains(&v.midpoint()));
    }
    assert_eq!(coeff(Family::Bhat, 4, &ctx), bhat_coeff(4, &ctx));
}
