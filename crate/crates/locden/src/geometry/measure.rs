//! Sphere and ball measures of monomial cells.
//!
//! Per theta-stratum the contribution is `[orbit class] * L^(-sum theta - d - J)`
//! where J is the Jacobian order of the selected coordinate projection. The
//! orbit class counts the distinct ac-pieces of the stratum: the solution
//! class of the angular system divided by the free action of the
//! parametrization kernel (the cell's deck data). In finite-q mode this is a
//! point count modulo q-1; in algebraically-closed mode it is the class of
//! the quotient torus computed from character lattices. The two genuinely
//! differ on multi-sheeted cells, matching Haar measure over Q_p and motivic
//! measure over C((t)) respectively.

use num_rational::BigRational;


use super::{DefinableSet, GeometryError, MonomialCell};
use crate::lring::LElement;
use crate::presburger::{
    normalize, sum_over, sum_over_closed, Affine, Atom, Integrand, Monomial, PresburgerSet,
    QepFunction,
};
use crate::residue::ff::FiniteField;
use crate::residue::{class_of, ResidueMode};
use crate::zlattice::{preimage_lattice, smith_normal_form, subquotient_invariants, ZMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    Sphere,
    Ball,
}

/// Measure context: how residue symbols resolve and how integer determinants
/// are valued (0 in equal characteristic zero, v_p in p-adic mode).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasureMode {
    pub residue: ResidueMode,
    pub residue_char: Option<u64>,
}

impl MeasureMode {
    pub fn motivic() -> Self {
        MeasureMode {
            residue: ResidueMode::AlgebraicallyClosed,
            residue_char: None,
        }
    }

    pub fn padic(p: u64, f: u32) -> Self {
        MeasureMode {
            residue: ResidueMode::FiniteQ { q: p.pow(f) },
            residue_char: Some(p),
        }
    }

    fn det_valuation(&self, det: i128) -> i64 {
        let mut d = det.unsigned_abs();
        assert!(d != 0);
        match self.residue_char {
            None => 0,
            Some(p) => {
                let mut v = 0i64;
                while d % (p as u128) == 0 {
                    d /= p as u128;
                    v += 1;
                }
                v
            }
        }
    }
}

/// Count solutions of `a x ≡ b (mod m)` over x in (Z/m)^cols.
pub fn count_solutions_mod(a: &ZMat, b: &[i128], m: u64) -> u64 {
    assert_eq!(a.rows, b.len());
    let snf = smith_normal_form(a);
    let mm = m as i128;
    // transformed rhs: U b
    let ub: Vec<i128> = (0..a.rows)
        .map(|i| (0..a.rows).map(|j| snf.u[(i, j)] * b[j]).sum::<i128>())
        .collect();
    let mut count: u64 = 1;
    for i in 0..a.rows {
        if i < snf.rank {
            let g = crate::zlattice::gcd(snf.divisors[i], mm);
            if ub[i].rem_euclid(mm) % g != 0 {
                return 0;
            }
            count *= g as u64;
        } else if ub[i].rem_euclid(mm) != 0 {
            return 0;
        }
    }
    let free = a.cols - snf.rank;
    count * m.pow(free as u32)
}

/// Number of distinct ac-pieces of a stratum, resolved per mode.
pub fn orbit_class(cell: &MonomialCell, mode: MeasureMode) -> Result<LElement, GeometryError> {
    let v = cell.dim + cell.aux;
    // angular exponent matrix over all v variables
    let r_mat = cell.angular.exponent_matrix();
    debug_assert_eq!(r_mat.cols, v);
    // link matrix: how a deck element acts on (params, aux)
    let d0 = cell.deck.d0;
    let mut link_rows: Vec<Vec<i64>> = cell.deck.param_link.clone();
    link_rows.extend(cell.deck.aux_link.iter().cloned());
    assert_eq!(link_rows.len(), v);
    let link = if v == 0 {
        ZMat::new(0, d0)
    } else {
        ZMat::from_rows(&link_rows)
    };
    let kernel = if cell.deck.kernel_lattice.is_empty() {
        ZMat::new(0, d0)
    } else {
        ZMat::from_rows(&cell.deck.kernel_lattice)
    };
    match mode.residue {
        ResidueMode::FiniteQ { q } => {
            let field = FiniteField::new(q).map_err(crate::residue::ResidueError::from)?;
            let m = q - 1;
            // rhs dlogs
            let b: Vec<i128> = cell
                .angular
                .equations
                .iter()
                .map(|eq| eq.rhs.resolve(&field).map(|c| field.dlog(c) as i128))
                .collect::<Result<_, _>>()?;
            let sol = count_solutions_mod(&r_mat, &b, m);
            if sol == 0 {
                return Ok(LElement::zero());
            }
            let use_exists =
                matches!(cell.aux_semantics, super::AuxSemantics::Exists) && cell.aux > 0;
            let pieces = if !use_exists {
                // acting subgroup size: #(L(D) ∩ H) = pairs / kernel
                let rl = mat_mul(&r_mat, &link);
                let pairs = count_solutions_mod(&stack(&kernel, &rl), &zeros(kernel.rows + rl.rows), m);
                let ker = count_solutions_mod(&stack(&kernel, &link), &zeros(kernel.rows + link.rows), m);
                let acting = exact_div(pairs, ker);
                exact_div(sol, acting)
            } else {
                // project out aux witnesses first
                let r_aux = submatrix_cols(&r_mat, cell.dim, v);
                let fib = count_solutions_mod(&r_aux, &zeros(r_aux.rows), m);
                let pi_sol = exact_div(sol, fib);
                let l_p = submatrix_rows(&link, 0, cell.dim);
                let r_p = submatrix_cols(&r_mat, 0, cell.dim);
                // pairs over (zeta, eta): K zeta = 0, R_p L_p zeta + R_aux eta = 0
                let rplp = mat_mul(&r_p, &l_p);
                let sys = stack(
                    &augment(&kernel, &ZMat::new(kernel.rows, cell.aux)),
                    &augment(&rplp, &r_aux),
                );
                let pairs2 = count_solutions_mod(&sys, &zeros(sys.rows), m);
                let dprime = exact_div(pairs2, fib);
                let kernel_p =
                    count_solutions_mod(&stack(&kernel, &l_p), &zeros(kernel.rows + l_p.rows), m);
                let acting_p = exact_div(dprime, kernel_p);
                exact_div(pi_sol, acting_p)
            };
            Ok(LElement::from_rational(BigRational::from_integer(
                pieces.into(),
            )))
        }
        ResidueMode::AlgebraicallyClosed | ResidueMode::Symbolic => {
            // solvability of constants (divisible group): zero class if the
            // transformed constants are inconsistent
            let c = class_of(&cell.angular, ResidueMode::AlgebraicallyClosed)?;
            if c.is_zero() {
                return Ok(LElement::zero());
            }
            let ann = match cell.aux_semantics {
                super::AuxSemantics::Weighted => preimage_lattice(&link, &kernel),
                super::AuxSemantics::Exists => {
                    if cell.aux == 0 {
                        preimage_lattice(&link, &kernel)
                    } else {
                        let l_p = submatrix_rows(&link, 0, cell.dim);
                        let pre = preimage_lattice(&l_p, &kernel);
                        // embed with zero aux components
                        let rows: Vec<Vec<i64>> = (0..pre.rows)
                            .map(|i| {
                                let mut row: Vec<i64> =
                                    pre.row(i).iter().map(|&x| x as i64).collect();
                                row.extend(std::iter::repeat(0).take(cell.aux));
                                row
                            })
                            .collect();
                        if rows.is_empty() {
                            ZMat::new(0, v)
                        } else {
                            ZMat::from_rows(&rows)
                        }
                    }
                }
            };
            let (rank, torsion) = subquotient_invariants(&ann, &r_mat);
            let lm1 = LElement::l().sub(&LElement::one());
            let mut out = LElement::one();
            for _ in 0..rank {
                out = out.mul(&lm1);
            }
            let t: i64 = torsion.iter().map(|&x| x as i64).product();
            Ok(out.scale(&BigRational::from_integer(t.into())))
        }
    }
}

fn zeros(n: usize) -> Vec<i128> {
    vec![0; n]
}

fn exact_div(a: u64, b: u64) -> u64 {
    assert!(b != 0 && a % b == 0, "inexact orbit division {}/{}", a, b);
    a / b
}

fn mat_mul(a: &ZMat, b: &ZMat) -> ZMat {
    assert_eq!(a.cols, b.rows);
    let mut out = ZMat::new(a.rows, b.cols);
    for i in 0..a.rows {
        for j in 0..b.cols {
            out[(i, j)] = (0..a.cols).map(|k| a[(i, k)] * b[(k, j)]).sum();
        }
    }
    out
}

fn stack(a: &ZMat, b: &ZMat) -> ZMat {
    if a.rows == 0 {
        return b.clone();
    }
    if b.rows == 0 {
        return a.clone();
    }
    assert_eq!(a.cols, b.cols);
    let mut out = ZMat::new(a.rows + b.rows, a.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            out[(i, j)] = a[(i, j)];
        }
    }
    for i in 0..b.rows {
        for j in 0..b.cols {
            out[(a.rows + i, j)] = b[(i, j)];
        }
    }
    out
}

fn augment(a: &ZMat, b: &ZMat) -> ZMat {
    assert_eq!(a.rows, b.rows);
    let mut out = ZMat::new(a.rows, a.cols + b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            out[(i, j)] = a[(i, j)];
        }
        for j in 0..b.cols {
            out[(i, a.cols + j)] = b[(i, j)];
        }
    }
    out
}

fn submatrix_cols(a: &ZMat, from: usize, to: usize) -> ZMat {
    let mut out = ZMat::new(a.rows, to - from);
    for i in 0..a.rows {
        for j in from..to {
            out[(i, j - from)] = a[(i, j)];
        }
    }
    out
}

fn submatrix_rows(a: &ZMat, from: usize, to: usize) -> ZMat {
    let mut out = ZMat::new(to - from, a.cols);
    for i in from..to {
        for j in 0..a.cols {
            out[(i - from, j)] = a[(i, j)];
        }
    }
    out
}

/// One summation job: region atoms over [n, theta] plus the L-exponent data.
struct StratumJob {
    atoms: Vec<Atom>,
    /// per-theta-variable L-exponent (the n variable has coefficient 0)
    lexps: Vec<i64>,
    const_exp: i64,
}

/// All strata of one cell: region split (sphere argmin witness) crossed with
/// the Jacobian-minimizing projection choice.
fn cell_strata(cell: &MonomialCell, kind: RegionKind, mode: MeasureMode) -> Vec<StratumJob> {
    let d = cell.dim;
    let nz = cell.nonzero_indices();
    let nvars = d + 1; // [n, theta]
    let ord_form = |j: usize| -> Affine {
        // c_j + alpha_j . theta as a form over [n, theta]
        let (c, alpha) = cell.coord_ord_data(j).unwrap();
        let mut coeffs = vec![0i64; nvars];
        for (i, &a) in alpha.iter().enumerate() {
            coeffs[1 + i] = a;
        }
        Affine {
            coeffs,
            constant: c,
        }
    };
    let minus_n = |f: &Affine| -> Affine {
        let mut g = f.clone();
        g.coeffs[0] -= 1;
        g
    };
    // region pieces
    let mut pieces: Vec<Vec<Atom>> = Vec::new();
    match kind {
        RegionKind::Ball => {
            pieces.push(nz.iter().map(|&j| Atom::Ge(minus_n(&ord_form(j)))).collect());
        }
        RegionKind::Sphere => {
            for (k, &jstar) in nz.iter().enumerate() {
                let mut atoms = Vec::new();
                let f = minus_n(&ord_form(jstar));
                atoms.push(Atom::Ge(f.clone()));
                atoms.push(Atom::Ge(f.neg()));
                for (k2, &j) in nz.iter().enumerate() {
                    if k2 < k {
                        atoms.push(Atom::Ge(minus_n(&ord_form(j)).plus_const(-1)));
                    } else if k2 > k {
                        atoms.push(Atom::Ge(minus_n(&ord_form(j))));
                    }
                }
                pieces.push(atoms);
            }
        }
    }
    // candidate projections: subsets T of nz with |T| = d, det != 0
    let exps = cell.exponent_matrix(); // rows follow nz order
    let mut candidates: Vec<(Vec<usize>, i64, Affine)> = Vec::new(); // (nz positions, vdet, J affine)
    for combo in combinations(nz.len(), d) {
        let rows: Vec<Vec<i64>> = combo
            .iter()
            .map(|&k| (0..d).map(|j| exps[(k, j)] as i64).collect())
            .collect();
        let sub = ZMat::from_rows(&rows);
        let snf = smith_normal_form(&sub);
        if snf.rank < d {
            continue;
        }
        let det: i128 = snf.divisors.iter().product();
        let vdet = mode.det_valuation(det);
        // J_T = sum_{j in T}(c_j + alpha_j theta) - sum theta + vdet
        let mut j_aff = Affine {
            coeffs: vec![0i64; nvars],
            constant: vdet,
        };
        for &k in &combo {
            let j = nz[k];
            let f = ord_form(j);
            j_aff = j_aff.add(&f);
        }
        for i in 0..d {
            j_aff.coeffs[1 + i] -= 1;
        }
        candidates.push((combo, vdet, j_aff));
    }
    assert!(!candidates.is_empty(), "validated cell has a full-rank projection");
    let mut jobs = Vec::new();
    for piece in &pieces {
        for (t_idx, (combo, _vdet, j_t)) in candidates.iter().enumerate() {
            let mut atoms = piece.clone();
            let mut ok = true;
            for (t2, (_, _, j_other)) in candidates.iter().enumerate() {
                if t2 == t_idx {
                    continue;
                }
                let diff = j_other.sub(j_t);
                // constant comparisons can be decided now
                if diff.is_constant() {
                    let c = diff.constant;
                    let need = if t2 < t_idx { c >= 1 } else { c >= 0 };
                    if !need {
                        ok = false;
                        break;
                    }
                    continue;
                }
                let atom = if t2 < t_idx {
                    Atom::Ge(diff.plus_const(-1))
                } else {
                    Atom::Ge(diff)
                };
                atoms.push(atom);
            }
            if !ok {
                continue;
            }
            // exponent: -(sum theta) - d - J_T(theta); the sum-theta part of
            // J_T cancels one -sum theta: total = -d - sum_{j in T} (c_j + alpha_j theta) - vdet
            let mut lexps = vec![0i64; nvars];
            let mut const_exp = -(d as i64);
            // reconstruct from J_T: total exponent = -(sum theta) - d - J_T
            for i in 0..d {
                lexps[1 + i] = -1 - j_t.coeffs[1 + i];
            }
            const_exp -= j_t.constant;
            let _ = combo;
            jobs.push(StratumJob {
                atoms,
                lexps,
                const_exp,
            });
        }
    }
    jobs
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// mu_d(cell ∩ region(n)) as a function of the symbolic radius n.
fn cell_measure_qep(
    cell: &MonomialCell,
    kind: RegionKind,
    mode: MeasureMode,
) -> Result<QepFunction, GeometryError> {
    let class = orbit_class(cell, mode)?;
    if class.is_zero() {
        return Ok(QepFunction::zero());
    }
    let d = cell.dim;
    let base = cell.theta.prepend_vars(1);
    let mut total = QepFunction::zero();
    for job in cell_strata(cell, kind, mode) {
        let region = PresburgerSet::from_conjunction(d + 1, job.atoms);
        let cells = normalize(&base.intersect(&region));
        if cells.is_empty() {
            continue;
        }
        let integrand = Integrand {
            terms: vec![Monomial {
                coeff: class.mul(&LElement::l_pow(job.const_exp)),
                powers: vec![0; d + 1],
                lexps: job.lexps.clone(),
            }],
        };
        let qep = sum_over(&cells, &integrand, 1)?;
        total = total.add(&qep);
    }
    Ok(total)
}

/// mu_d(cell ∩ region(n)) at a concrete radius.
fn cell_measure_at(
    cell: &MonomialCell,
    n: i64,
    kind: RegionKind,
    mode: MeasureMode,
) -> Result<LElement, GeometryError> {
    let class = orbit_class(cell, mode)?;
    if class.is_zero() {
        return Ok(LElement::zero());
    }
    let d = cell.dim;
    let base = cell.theta.prepend_vars(1);
    let mut total = LElement::zero();
    for job in cell_strata(cell, kind, mode) {
        let region = PresburgerSet::from_conjunction(d + 1, job.atoms);
        let constrained = base.intersect(&region).substitute(0, n);
        let cells = normalize(&constrained);
        if cells.is_empty() {
            continue;
        }
        let integrand = Integrand {
            terms: vec![Monomial {
                coeff: class.mul(&LElement::l_pow(job.const_exp)),
                powers: vec![0; d],
                lexps: job.lexps[1..].to_vec(),
            }],
        };
        total = total.add(&sum_over_closed(&cells, &integrand)?);
    }
    Ok(total)
}

/// mu_d(X ∩ S(0,n)) with symbolic n, d = dim(X). Lower-dimensional cells
/// contribute nothing.
pub fn sphere_measure(set: &DefinableSet, mode: MeasureMode) -> Result<QepFunction, GeometryError> {
    measure_qep(set, RegionKind::Sphere, mode)
}

/// mu_d(X ∩ B(0,n)) with symbolic n.
pub fn ball_measure(set: &DefinableSet, mode: MeasureMode) -> Result<QepFunction, GeometryError> {
    measure_qep(set, RegionKind::Ball, mode)
}

pub fn measure_qep(
    set: &DefinableSet,
    kind: RegionKind,
    mode: MeasureMode,
) -> Result<QepFunction, GeometryError> {
    let d = set.dim();
    let mut total = QepFunction::zero();
    if d == 0 {
        return Ok(total);
    }
    for cell in set.cells.iter().filter(|c| c.dim == d) {
        total = total.add(&cell_measure_qep(cell, kind, mode)?);
    }
    // The eventual formula often extends below the assembled threshold
    // (bounded boundary pieces evaluate to the same closed form). Lower the
    // threshold as far as the direct per-radius computation confirms.
    let extend_limit = 24;
    let floor = -(1i64 << 20);
    if total.threshold > floor {
        let mut t = total.threshold;
        for _ in 0..extend_limit {
            let n = t - 1;
            if measure_at(set, n, kind, mode)? != total.value_at_unchecked(n) {
                break;
            }
            t = n;
        }
        total.threshold = t;
    }
    Ok(total)
}

/// Exact measure at a concrete radius (valid for every n, unlike the QEP
/// which is eventual).
pub fn measure_at(
    set: &DefinableSet,
    n: i64,
    kind: RegionKind,
    mode: MeasureMode,
) -> Result<LElement, GeometryError> {
    let d = set.dim();
    let mut total = LElement::zero();
    if d == 0 {
        return Ok(total);
    }
    for cell in set.cells.iter().filter(|c| c.dim == d) {
        total = total.add(&cell_measure_at(cell, n, kind, mode)?);
    }
    Ok(total)
}


#[cfg(test)]
impl MeasureMode {
    /// test helper: build a finite-q mode for prime powers without factoring
    fn residue_char_fix(self, q: u64) -> MeasureMode {
        let mut p = 2;
        while q % p != 0 {
            p += 1;
        }
        MeasureMode {
            residue: ResidueMode::FiniteQ { q },
            residue_char: Some(p),
        }
    }
}
