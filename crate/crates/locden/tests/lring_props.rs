//! Property tests for the coefficient ring: ring laws on random canonical
//! elements, degree behaviour, positivity closure, evaluation compatibility,
//! and the rational-function identity test behind canonical equality.

use locden::lring::poly::Q;
use locden::lring::LElement;
use num_bigint::BigInt;
use proptest::prelude::*;

fn qq(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Random canonical ring element: rational combination of L-powers over a
/// product of (1 - L^-n) denominators.
fn arb_elem() -> impl Strategy<Value = LElement> {
    let term = (
        -4i64..=4,                 // L power
        -6i64..=6,                 // numerator
        1i64..=4,                  // denominator
        prop::collection::vec(1u32..=4, 0..=2), // geometric denominators
    )
        .prop_map(|(pow, num, den, dens)| {
            let mut x = LElement::l_pow(pow).scale(&qq(num, den));
            for n in dens {
                x = x.mul(&LElement::inv_one_minus_l_negpow(n));
            }
            x
        });
    prop::collection::vec(term, 1..=3)
        .prop_map(|terms| terms.into_iter().fold(LElement::zero(), |a, b| a.add(&b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn ring_laws(a in arb_elem(), b in arb_elem(), c in arb_elem()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.add(&LElement::zero()), a.clone());
        prop_assert_eq!(a.mul(&LElement::one()), a.clone());
        prop_assert_eq!(a.sub(&a), LElement::zero());
    }

    #[test]
    fn theta_is_a_homomorphism(a in arb_elem(), b in arb_elem()) {
        for q in [qq(3, 2), qq(2, 1), qq(5, 1), qq(17, 1)] {
            prop_assert_eq!(
                a.add(&b).theta_q(&q).unwrap(),
                a.theta_q(&q).unwrap() + b.theta_q(&q).unwrap()
            );
            prop_assert_eq!(
                a.mul(&b).theta_q(&q).unwrap(),
                a.theta_q(&q).unwrap() * b.theta_q(&q).unwrap()
            );
        }
    }

    #[test]
    fn equality_soundness(a in arb_elem(), b in arb_elem()) {
        // canonical equality iff theta agrees at (1 + degree bound) points:
        // the difference is a rational function; enough sample points force
        // the zero function
        let diff = a.sub(&b);
        let deg_bound = diff.numerator().degree().unwrap_or(0)
            + diff
                .cyclo_factors()
                .iter()
                .map(|(&m, &k)| (m as usize) * (k as usize))
                .sum::<usize>()
            + 2;
        let mut all_equal = true;
        for i in 0..=deg_bound {
            let q = qq(i as i64 + 2, 1);
            if a.theta_q(&q).unwrap() != b.theta_q(&q).unwrap() {
                all_equal = false;
                break;
            }
        }
        prop_assert_eq!(all_equal, a == b);
    }

    #[test]
    fn degree_rules(a in arb_elem(), b in arb_elem()) {
        if let (Some(da), Some(db)) = (a.deg_l(), b.deg_l()) {
            let prod = a.mul(&b);
            prop_assert_eq!(prod.deg_l(), Some(da + db));
            if let Some(ds) = a.add(&b).deg_l() {
                prop_assert!(ds <= da.max(db));
            }
        }
    }

    #[test]
    fn positivity_closure(a in arb_elem(), b in arb_elem()) {
        if a.is_nonneg() && b.is_nonneg() {
            prop_assert!(a.add(&b).is_nonneg());
            prop_assert!(a.mul(&b).is_nonneg());
        }
    }

    #[test]
    fn nonneg_agrees_with_sampling(a in arb_elem()) {
        // soundness direction: membership in the cone forces nonnegative
        // values at sampled q > 1
        if a.is_nonneg() {
            for q in [qq(101, 100), qq(3, 2), qq(2, 1), qq(7, 1), qq(97, 1)] {
                prop_assert!(a.theta_q(&q).unwrap() >= Q::from_integer(0.into()));
            }
        }
    }

    #[test]
    fn json_roundtrip_is_exact(a in arb_elem()) {
        let s = serde_json::to_string(&a).unwrap();
        let back: LElement = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(&back, &a);
        // canonical serialization: serializing again yields the same bytes
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }
}
