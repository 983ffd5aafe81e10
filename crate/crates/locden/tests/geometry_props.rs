//! Cross-cutting geometry invariants on the standing corpus: measure
//! additivity, cone support behaviour, and specialization consistency of the
//! two residue modes.

use locden::density::{cone_density_cm, local_density};
use locden::geometry::cone::{
    cone_with_multiplicities, is_lambda_invariant, sets_equal_sampled, stabilize, tangent_cone,
};
use locden::geometry::corpus;
use locden::geometry::measure::{measure_qep, sphere_measure, MeasureMode, RegionKind};
use locden::geometry::LambdaGroup;
use locden::lring::poly::Q;
use locden::padic::{specialize, PadicContext};

#[test]
fn sphere_measure_additive_over_congruence_partition() {
    // the classes mod m partition K^x; sphere measures add up to the full one
    for m in 2..=4i64 {
        let full = corpus::full_line().validate().unwrap();
        let total = measure_qep(&full, RegionKind::Sphere, MeasureMode::motivic()).unwrap();
        let mut sum = locden::presburger::QepFunction::zero();
        for r in 0..m {
            let mut part = corpus::ord_congruence(r, m);
            // drop the ord >= 0 restriction: replace with the full class
            part.cells[0].theta = locden::presburger::PresburgerSet::from_conjunction(
                1,
                vec![locden::presburger::Atom::Cong {
                    form: locden::presburger::Affine::var(1, 0),
                    rem: r,
                    modulus: m,
                }],
            );
            let part = part.validate().unwrap();
            sum = sum.add(&sphere_measure(&part, MeasureMode::motivic()).unwrap());
        }
        assert!(sum.eventually_equal(&total), "m = {}", m);
    }
}

#[test]
fn cm_support_is_the_tangent_cone_and_invariant() {
    for set in [
        corpus::cusp(),
        corpus::square_quartic(),
        corpus::line(0),
        corpus::ord_congruence(0, 3),
    ] {
        let x = set.validate().unwrap();
        let lam = stabilize(&x).unwrap();
        let cm = cone_with_multiplicities(&x, &lam).unwrap();
        let cone = tangent_cone(&x, &lam).unwrap();
        assert!(sets_equal_sampled(&cm.support_set(), &cone));
        assert!(is_lambda_invariant(&cm.support_set(), &lam));
    }
}

#[test]
fn class_limits_lie_in_the_positive_cone() {
    for set in [
        corpus::unit_ball(),
        corpus::cusp(),
        corpus::ord_congruence(1, 3),
        corpus::unit_polydisk(2),
    ] {
        let x = set.validate().unwrap();
        let r = local_density(&x, MeasureMode::motivic()).unwrap();
        for d in &r.class_limits {
            assert!(d.is_nonneg(), "limit {} not in the cone", d);
        }
        assert!(r.value.is_nonneg());
    }
}

#[test]
fn cone_density_specializes_like_local_density() {
    // the weighted cone density and the local density specialize to the same
    // rational for every sampled residue field
    for set in [corpus::cusp(), corpus::square_quartic()] {
        for p in [3u64, 7] {
            let x = set.clone().validate().unwrap();
            let mode = MeasureMode::padic(p, 1);
            let ctx = PadicContext::new(p, 1, 6);
            let lam = stabilize(&x).unwrap();
            let lhs = local_density(&x, mode).unwrap();
            let cm = cone_with_multiplicities(&x, &lam).unwrap();
            let rhs = cone_density_cm(&cm, mode).unwrap();
            let a: Q = specialize(&lhs.value, &ctx).unwrap();
            let b: Q = specialize(&rhs.value, &ctx).unwrap();
            assert_eq!(a, b, "p = {}", p);
        }
    }
}

#[test]
fn motivic_formula_specializes_to_finite_mode_on_single_sheet_cells() {
    // for cells with trivial parametrization kernel the motivic measure
    // specialized at L -> q equals the value computed directly over F_q
    for set in [corpus::unit_ball(), corpus::cusp(), corpus::unit_polydisk(2)] {
        let x = set.validate().unwrap();
        let motivic = sphere_measure(&x, MeasureMode::motivic()).unwrap();
        for p in [3u64, 5] {
            let ctx = PadicContext::new(p, 1, 6);
            let finite = sphere_measure(&x, MeasureMode::padic(p, 1)).unwrap();
            for n in motivic.threshold.max(finite.threshold).max(0)..8 {
                let a: Q = specialize(&motivic.value_at(n), &ctx).unwrap();
                let b: Q = specialize(&finite.value_at(n), &ctx).unwrap();
                assert_eq!(a, b, "p = {}, n = {}", p, n);
            }
        }
    }
}

#[test]
fn stabilized_lambda_is_stable_under_refinement() {
    for set in [corpus::cusp(), corpus::ord_congruence(0, 3), corpus::square_quartic()] {
        let x = set.validate().unwrap();
        let lam = stabilize(&x).unwrap();
        let base = tangent_cone(&x, &lam).unwrap();
        for k in [2i64, 3, 4, 5] {
            let finer = LambdaGroup::new(lam.n * k, 1);
            let refined = tangent_cone(&x, &finer).unwrap();
            assert!(
                sets_equal_sampled(&base, &refined),
                "refinement by {} changed the cone",
                k
            );
        }
    }
}
