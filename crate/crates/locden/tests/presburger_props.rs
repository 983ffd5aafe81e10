//! Property tests for cell normalization and summation: random sets are
//! partitioned exactly, summation is order-independent, and closed forms
//! match numeric partial sums.

use locden::lring::poly::Q;
use locden::lring::LElement;
use locden::presburger::{
    normalize, sum_over_closed, Affine, Atom, Integrand, Monomial, PresburgerSet,
};
use num_bigint::BigInt;
use num_traits::Signed;
use proptest::prelude::*;

fn qq(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn arb_atom(dim: usize) -> impl Strategy<Value = Atom> {
    let coeffs = prop::collection::vec(-2i64..=2, dim);
    prop_oneof![
        3 => (coeffs.clone(), -8i64..=8).prop_map(|(coeffs, c)| Atom::Ge(Affine {
            coeffs,
            constant: c
        })),
        1 => (coeffs, 0i64..=5, 2i64..=3).prop_map(|(coeffs, r, m)| Atom::Cong {
            form: Affine {
                coeffs,
                constant: 0
            },
            rem: r % m,
            modulus: m,
        }),
    ]
}

fn arb_set(dim: usize, max_atoms: usize, max_disjuncts: usize) -> impl Strategy<Value = PresburgerSet> {
    prop::collection::vec(
        prop::collection::vec(arb_atom(dim), 1..=max_atoms),
        1..=max_disjuncts,
    )
    .prop_map(move |disjuncts| PresburgerSet { dim, disjuncts })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalization_partitions_dim1(set in arb_set(1, 3, 2)) {
        let cells = normalize(&set);
        for n in -20..=20i64 {
            let want = usize::from(set.contains(&[n]));
            let got = cells.iter().filter(|c| c.contains(&[n])).count();
            prop_assert_eq!(got, want, "n = {}", n);
        }
    }

    #[test]
    fn normalization_partitions_dim2(set in arb_set(2, 3, 2)) {
        let cells = normalize(&set);
        for a in -9..=9i64 {
            for b in -9..=9i64 {
                let want = usize::from(set.contains(&[a, b]));
                let got = cells.iter().filter(|c| c.contains(&[a, b])).count();
                prop_assert_eq!(got, want, "({}, {})", a, b);
            }
        }
    }

    #[test]
    fn normalization_partitions_dim3(set in arb_set(3, 2, 1)) {
        let cells = normalize(&set);
        for a in -4..=4i64 {
            for b in -4..=4i64 {
                for c in -4..=4i64 {
                    let want = usize::from(set.contains(&[a, b, c]));
                    let got = cells.iter().filter(|cell| cell.contains(&[a, b, c])).count();
                    prop_assert_eq!(got, want, "({}, {}, {})", a, b, c);
                }
            }
        }
    }

    #[test]
    fn fubini_order_independence(
        b1 in 1i64..=3, b2 in 1i64..=3,
        lo1 in -3i64..=2, lo2 in -3i64..=2,
        m in 1i64..=3, r in 0i64..=2,
    ) {
        // sum over {z1 >= lo1, z2 >= lo2, z1 ≡ r mod m} of L^{-b1 z1 - b2 z2},
        // in both variable orders
        let build = |first_exp: i64, second_exp: i64, swap: bool| {
            let (la, lb) = if swap { (lo2, lo1) } else { (lo1, lo2) };
            let cong_var = usize::from(swap);
            let set = PresburgerSet::from_conjunction(2, vec![
                Atom::Ge(Affine { coeffs: vec![1, 0], constant: -la }),
                Atom::Ge(Affine { coeffs: vec![0, 1], constant: -lb }),
                Atom::Cong {
                    form: Affine::var(2, cong_var),
                    rem: r % m,
                    modulus: m,
                },
            ]);
            sum_over_closed(
                &normalize(&set),
                &Integrand::l_linear(2, vec![-first_exp, -second_exp], 0),
            )
            .unwrap()
        };
        let direct = build(b1, b2, false);
        let swapped = build(b2, b1, true);
        prop_assert_eq!(direct, swapped);
    }

    #[test]
    fn closed_forms_match_partial_sums(
        a in 0u32..=2, b in 1i64..=3, lo in -2i64..=3, m in 1i64..=3, r in 0i64..=2
    ) {
        // F = sum over {z >= lo, z ≡ r mod m} z^a L^{-b z}
        let set = PresburgerSet::from_conjunction(1, vec![
            Atom::Ge(Affine { coeffs: vec![1], constant: -lo }),
            Atom::Cong { form: Affine::var(1, 0), rem: r % m, modulus: m },
        ]);
        let integrand = Integrand {
            terms: vec![Monomial {
                coeff: LElement::one(),
                powers: vec![a],
                lexps: vec![-b],
            }],
        };
        let closed = sum_over_closed(&normalize(&set), &integrand).unwrap();
        for q in [2i64, 3] {
            let target = closed.theta_q(&qq(q, 1)).unwrap();
            let mut partial = Q::from_integer(0.into());
            // weight q^{-b z}, starting at z = lo
            let step = qq(1, 1) / pow_q(q, b);
            let mut qpow = pow_q(q, -b * lo);
            // accumulate far enough that the geometric tail is below 1e-9
            for z in lo..(lo + 140) {
                if (z - r).rem_euclid(m) == 0 {
                    let mut zp = qq(1, 1);
                    for _ in 0..a {
                        zp = zp * qq(z, 1);
                    }
                    partial = partial + zp * qpow.clone();
                }
                qpow = qpow * step.clone();
            }
            prop_assert!((target - partial).abs() < qq(1, 1_000_000_000));
        }
    }
}

fn pow_q(q: i64, e: i64) -> Q {
    let mut acc = qq(1, 1);
    for _ in 0..e.unsigned_abs() {
        if e > 0 {
            acc = acc * qq(q, 1);
        } else {
            acc = acc / qq(q, 1);
        }
    }
    acc
}
