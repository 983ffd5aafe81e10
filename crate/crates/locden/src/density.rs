//! The local-density pipeline: normalized sphere sequence, mean value at
//! infinity, the finite cone-density formula, and the main equality check.

use num_rational::BigRational;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::cone::{cone_with_multiplicities, is_lambda_invariant, stabilize, tangent_cone};
use crate::geometry::measure::{
    ball_measure, measure_at, sphere_measure, MeasureMode, RegionKind,
};
use crate::geometry::{ConeWithMultiplicities, DefinableSet, GeometryError, LambdaGroup};
use crate::lring::{LElement, LringError};
use crate::presburger::{PresburgerError, QepFunction};
use crate::residue::ResidueMode;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Presburger(#[from] PresburgerError),
    #[error(transparent)]
    Lring(#[from] LringError),
    #[error("normalized sphere sequence is unbounded; the set has dimension mismatch")]
    Unbounded,
    #[error("input is not a lambda-cone")]
    NotACone,
    #[error("ball-path and sphere-path mean values disagree (internal inconsistency)")]
    PathMismatch,
}

/// Where a density value came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    MeanValueOfSpheres,
    ConeFormula { lambda: LambdaGroup },
    MainTheoremCheck,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityReport {
    pub value: LElement,
    pub period: i64,
    pub class_limits: Vec<LElement>,
    pub lambda: Option<LambdaGroup>,
    pub mode: ResidueMode,
    pub provenance: Provenance,
}

/// theta_d(n) = mu_d(X ∩ S(0,n)) / ((1 - L^-d) L^-nd).
pub fn theta_sequence(
    set: &DefinableSet,
    mode: MeasureMode,
) -> Result<QepFunction, DensityError> {
    let d = set.dim();
    let raw = sphere_measure(set, mode)?;
    normalize_by_sphere_volume(&raw, d)
}

fn normalize_by_sphere_volume(raw: &QepFunction, d: usize) -> Result<QepFunction, DensityError> {
    // divide by (1 - L^-d) L^-nd: multiply by L^{nd} / (1 - L^-d)
    let d = d as i64;
    let scaled = raw.mul_l_linear(d);
    let inv = LElement::one().div(&LElement::one_minus_l_negpow(d as u32))?;
    Ok(scaled.scale(&inv))
}

/// The ball-normalized sequence theta'_d(n) = mu_d(X ∩ B(0,n)) / L^-nd.
pub fn theta_ball_sequence(
    set: &DefinableSet,
    mode: MeasureMode,
) -> Result<QepFunction, DensityError> {
    let d = set.dim() as i64;
    let raw = ball_measure(set, mode)?;
    Ok(raw.mul_l_linear(d))
}

/// The motivic local density at the origin, computed as the mean value at
/// infinity of the normalized sphere sequence and cross-checked against the
/// ball path.
pub fn local_density(set: &DefinableSet, mode: MeasureMode) -> Result<DensityReport, DensityError> {
    let theta = theta_sequence(set, mode)?;
    if !theta.is_bounded() {
        return Err(DensityError::Unbounded);
    }
    let value = theta.mean_value().map_err(|_| DensityError::Unbounded)?;
    // ball path: MV(theta') must agree
    let theta_ball = theta_ball_sequence(set, mode)?;
    if !theta_ball.is_bounded() {
        return Err(DensityError::Unbounded);
    }
    let ball_value = theta_ball
        .mean_value()
        .map_err(|_| DensityError::Unbounded)?;
    if value != ball_value {
        return Err(DensityError::PathMismatch);
    }
    Ok(DensityReport {
        value,
        period: theta.period,
        class_limits: theta.class_limits(),
        lambda: None,
        mode: mode.residue,
        provenance: Provenance::MeanValueOfSpheres,
    })
}

/// Density of a lambda-cone by the finite formula
/// `(1/n) sum_{i=0}^{n-1} mu_d(C ∩ S(0,i)) / (L^-di (1 - L^-d))`.
pub fn cone_density(
    support: &DefinableSet,
    lambda: &LambdaGroup,
    mode: MeasureMode,
) -> Result<DensityReport, DensityError> {
    if !is_lambda_invariant(support, lambda) {
        return Err(DensityError::NotACone);
    }
    let d = support.dim() as i64;
    let norm = LElement::one_minus_l_negpow(d as u32);
    let mut acc = LElement::zero();
    let mut limits = Vec::new();
    for i in 0..lambda.n {
        let mu = measure_at(support, i, RegionKind::Sphere, mode)?;
        let term = mu.mul(&LElement::l_pow(d * i)).div(&norm)?;
        limits.push(term.clone());
        acc = acc.add(&term);
    }
    let value = acc.scale(&BigRational::new(1.into(), lambda.n.into()));
    Ok(DensityReport {
        value,
        period: lambda.n,
        class_limits: limits,
        lambda: Some(*lambda),
        mode: mode.residue,
        provenance: Provenance::ConeFormula { lambda: *lambda },
    })
}

/// Density of a cone with multiplicities: the finite formula applied with the
/// weighted aux blocks in place.
pub fn cone_density_cm(
    cm: &ConeWithMultiplicities,
    mode: MeasureMode,
) -> Result<DensityReport, DensityError> {
    if !is_lambda_invariant(&cm.support_set(), &cm.lambda) {
        return Err(DensityError::NotACone);
    }
    let d = cm.support.dim() as i64;
    let norm = LElement::one_minus_l_negpow(d as u32);
    let mut acc = LElement::zero();
    let mut limits = Vec::new();
    for i in 0..cm.lambda.n {
        let mu = measure_at(&cm.support, i, RegionKind::Sphere, mode)?;
        let term = mu.mul(&LElement::l_pow(d * i)).div(&norm)?;
        limits.push(term.clone());
        acc = acc.add(&term);
    }
    let value = acc.scale(&BigRational::new(1.into(), cm.lambda.n.into()));
    Ok(DensityReport {
        value,
        period: cm.lambda.n,
        class_limits: limits,
        lambda: Some(cm.lambda),
        mode: mode.residue,
        provenance: Provenance::ConeFormula { lambda: cm.lambda },
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MainTheoremReport {
    pub lambda: LambdaGroup,
    pub lhs: DensityReport,
    pub rhs: DensityReport,
    pub equal: bool,
}

/// Stabilize, build the cone with multiplicities, and compare its density
/// with the local density (normal-form equality of ring elements).
pub fn main_theorem_check(
    set: &DefinableSet,
    mode: MeasureMode,
) -> Result<MainTheoremReport, DensityError> {
    let lambda = stabilize(set)?;
    let lhs = local_density(set, mode)?;
    let cm = cone_with_multiplicities(set, &lambda)?;
    let rhs = cone_density_cm(&cm, mode)?;
    let equal = lhs.value == rhs.value;
    Ok(MainTheoremReport {
        lambda,
        lhs,
        rhs,
        equal,
    })
}

/// The plain tangent cone's density (no multiplicities), via the finite
/// formula; used for the support-only surfaces.
pub fn tangent_cone_density(
    set: &DefinableSet,
    lambda: &LambdaGroup,
    mode: MeasureMode,
) -> Result<DensityReport, DensityError> {
    let cone = tangent_cone(set, lambda)?;
    cone_density(&cone, lambda, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::corpus;
    use crate::lring::poly::Q;

    fn motivic() -> MeasureMode {
        MeasureMode::motivic()
    }

    fn half() -> LElement {
        LElement::from_rational(Q::new(1.into(), 2.into()))
    }

    #[test]
    fn oscillating_density() {
        let x = corpus::ord_congruence(0, 2).validate().unwrap();
        let r = local_density(&x, motivic()).unwrap();
        assert_eq!(r.value, half());
        assert_eq!(r.period, 2);
        assert_eq!(
            r.class_limits,
            vec![LElement::one(), LElement::zero()]
        );
    }

    #[test]
    fn cusp_density() {
        let x = corpus::cusp().validate().unwrap();
        let r = local_density(&x, motivic()).unwrap();
        assert_eq!(r.value, half());
        assert_eq!(r.period, 2);
    }

    #[test]
    fn full_space_density_one() {
        for d in 1..=2usize {
            let x = corpus::full_space(d).validate().unwrap();
            let r = local_density(&x, motivic()).unwrap();
            assert_eq!(r.value, LElement::one());
        }
    }

    #[test]
    fn theta_values() {
        let x = corpus::unit_ball().validate().unwrap();
        let th = theta_sequence(&x, motivic()).unwrap();
        for n in 0..6 {
            assert_eq!(th.value_at(n), LElement::one());
        }
        let x = corpus::cusp().validate().unwrap();
        let th = theta_sequence(&x, motivic()).unwrap();
        assert_eq!(th.value_at(4), LElement::one());
        assert!(th.value_at(5).is_zero());
    }

    #[test]
    fn cusp_main_theorem() {
        let x = corpus::cusp().validate().unwrap();
        let report = main_theorem_check(&x, motivic()).unwrap();
        assert_eq!(report.lambda, LambdaGroup::new(2, 1));
        assert_eq!(report.lhs.value, half());
        assert_eq!(report.rhs.value, half());
        assert!(report.equal);
    }

    #[test]
    fn line_main_theorem() {
        let x = corpus::line(0).validate().unwrap();
        let report = main_theorem_check(&x, motivic()).unwrap();
        assert_eq!(report.lhs.value, LElement::one());
        assert!(report.equal);
    }

    #[test]
    fn square_quartic_main_theorem_both_modes() {
        let x = corpus::square_quartic().validate().unwrap();
        // motivic: both sides 1/2
        let report = main_theorem_check(&x, motivic()).unwrap();
        assert_eq!(report.lhs.value, half());
        assert!(report.equal);
        // finite q = 5: both sides specialize to 1/4 (only square classes in
        // the support, each carrying multiplicity 2 on the cone side)
        let report5 = main_theorem_check(&x, MeasureMode::padic(5, 1)).unwrap();
        assert_eq!(
            report5.lhs.value.theta_q(&Q::new(5.into(), 1.into())).unwrap(),
            Q::new(1.into(), 4.into())
        );
        assert!(report5.equal);
    }

    #[test]
    fn cone_density_matches_local_density_on_cones() {
        let x = corpus::cusp().validate().unwrap();
        let lam = LambdaGroup::new(2, 1);
        let cone = tangent_cone(&x, &lam).unwrap();
        let via_formula = cone_density(&cone, &lam, motivic()).unwrap();
        let via_mv = local_density(&cone, motivic()).unwrap();
        assert_eq!(via_formula.value, via_mv.value);
        assert_eq!(via_formula.value, half());
    }

    #[test]
    fn not_a_cone_rejected() {
        let x = corpus::unit_ball().validate().unwrap();
        assert!(matches!(
            cone_density(&x, &LambdaGroup::new(1, 1), motivic()),
            Err(DensityError::NotACone)
        ));
    }

    #[test]
    fn additivity_on_disjoint_cells() {
        // {ord ≡ 0 mod 2} ∪ {ord ≡ 1 mod 2} = K^x: densities add to 1
        let a = corpus::ord_congruence(0, 2).validate().unwrap();
        let b = corpus::ord_congruence(1, 2).validate().unwrap();
        let da = local_density(&a, motivic()).unwrap().value;
        let db = local_density(&b, motivic()).unwrap().value;
        let du = local_density(&a.union(&b), motivic()).unwrap().value;
        assert_eq!(da.add(&db), du);
    }

    #[test]
    fn boundary_strata_do_not_change_density() {
        // adjoining the origin (a lower-dimensional stratum) changes nothing
        let mut x = corpus::cusp().validate().unwrap();
        let d0 = local_density(&x, motivic()).unwrap().value;
        x.cells
            .push(crate::geometry::MonomialCell::origin(2).validate().unwrap());
        let d1 = local_density(&x, motivic()).unwrap().value;
        assert_eq!(d0, d1);
    }
}
