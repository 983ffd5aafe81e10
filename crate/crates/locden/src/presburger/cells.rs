//! Normalization of quantifier-free sets into disjoint variable-ordered
//! cells with aligned affine bounds and one congruence per variable.

use super::{Affine, Atom, PresburgerSet};
use serde::{Deserialize, Serialize};

/// `value = form / div`; on the cell the division is exact and the value lies
/// in the variable's congruence class (bounds are pre-aligned).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bound {
    pub form: Affine,
    pub div: i64,
}

impl Bound {
    /// Rational comparison helper: value of the bound at a prefix point,
    /// as (numerator, positive denominator).
    pub fn value_at(&self, prefix: &[i64]) -> (i64, i64) {
        (self.form.eval_prefix(prefix), self.div)
    }

    pub fn exact_value_at(&self, prefix: &[i64]) -> i64 {
        let (n, d) = self.value_at(prefix);
        debug_assert_eq!(n.rem_euclid(d), 0, "bound not aligned on cell point");
        n.div_euclid(d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarBound {
    pub lower: Option<Bound>,
    pub upper: Option<Bound>,
    pub rem: i64,
    pub modulus: i64,
}

impl VarBound {
    fn free() -> Self {
        VarBound {
            lower: None,
            upper: None,
            rem: 0,
            modulus: 1,
        }
    }
}

/// Variable-ordered cell: `vars[i]` constrains `z_i` in terms of `z_0..z_{i-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub dim: usize,
    pub vars: Vec<VarBound>,
}

impl Cell {
    pub fn contains(&self, z: &[i64]) -> bool {
        assert_eq!(z.len(), self.dim);
        for (i, vb) in self.vars.iter().enumerate() {
            let zi = z[i];
            if (zi - vb.rem).rem_euclid(vb.modulus) != 0 {
                return false;
            }
            if let Some(lo) = &vb.lower {
                let (n, d) = lo.value_at(&z[..i]);
                if zi * d < n {
                    return false;
                }
            }
            if let Some(up) = &vb.upper {
                let (n, d) = up.value_at(&z[..i]);
                if zi * d > n {
                    return false;
                }
            }
        }
        true
    }

    /// Enumerate all points in a bounding box (testing/oracle use).
    pub fn enumerate_in_box(&self, lo: i64, hi: i64) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        let mut point = vec![0i64; self.dim];
        self.enum_rec(0, lo, hi, &mut point, &mut out);
        out
    }

    fn enum_rec(&self, i: usize, lo: i64, hi: i64, point: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if i == self.dim {
            out.push(point.clone());
            return;
        }
        for v in lo..=hi {
            point[i] = v;
            let vb = &self.vars[i];
            if (v - vb.rem).rem_euclid(vb.modulus) != 0 {
                continue;
            }
            if let Some(b) = &vb.lower {
                let (n, d) = b.value_at(&point[..i]);
                if v * d < n {
                    continue;
                }
            }
            if let Some(b) = &vb.upper {
                let (n, d) = b.value_at(&point[..i]);
                if v * d > n {
                    continue;
                }
            }
            self.enum_rec(i + 1, lo, hi, point, out);
        }
    }
}

/// Extended gcd: returns (g, x, y) with a x + b y = g.
fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.abs(), a.signum(), 0)
    } else {
        let (g, x, y) = egcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

fn mod_inverse(a: i64, m: i64) -> i64 {
    let (g, x, _) = egcd(a.rem_euclid(m), m);
    debug_assert_eq!(g, 1);
    x.rem_euclid(m)
}

/// CRT-merge `x ≡ r1 (mod m1)` with `x ≡ r2 (mod m2)`; None if incompatible.
fn crt(r1: i64, m1: i64, r2: i64, m2: i64) -> Option<(i64, i64)> {
    let (g, p, _q) = egcd(m1, m2);
    if (r2 - r1).rem_euclid(g) != 0 {
        return None;
    }
    let lcm = m1 / g * m2;
    let diff = (r2 - r1) / g;
    let r = (r1 + m1 * ((diff * p).rem_euclid(m2 / g))).rem_euclid(lcm);
    Some((r, lcm))
}

/// Branch under construction while peeling one variable.
#[derive(Clone)]
struct Branch {
    rem: i64,
    modulus: i64,
    pushed: Vec<Atom>,
    alive: bool,
}

pub fn normalize(set: &PresburgerSet) -> Vec<Cell> {
    let mut cells = Vec::new();
    let mut seen = PresburgerSet::empty(set.dim);
    for conj in &set.disjuncts {
        let this = PresburgerSet::from_conjunction(set.dim, conj.clone());
        let disjoint_part = this.difference(&seen);
        for sub in &disjoint_part.disjuncts {
            peel(set.dim, sub.clone(), Vec::new(), &mut cells);
        }
        seen = seen.union(&this);
    }
    cells
}

/// Peel variables from the highest index down, accumulating VarBounds in
/// `done` (highest variable first).
fn peel(dim: usize, atoms: Vec<Atom>, done: Vec<VarBound>, out: &mut Vec<Cell>) {
    let v = dim - done.len();
    // Split off constant atoms and evaluate them; deduplicate the rest
    // (branch expansion copies shared prefixes around).
    let mut live: Vec<Atom> = Vec::new();
    for a in atoms {
        let top = match &a {
            Atom::Ge(f) => f.top_var(),
            Atom::Cong { form, .. } => form.top_var(),
        };
        match top {
            None => {
                let ok = match &a {
                    Atom::Ge(f) => f.constant >= 0,
                    Atom::Cong { form, rem, modulus } => {
                        (form.constant - rem).rem_euclid(*modulus) == 0
                    }
                };
                if !ok {
                    return; // branch empty
                }
            }
            Some(t) => {
                debug_assert!(t < v, "atom references an already-peeled variable");
                if !live.contains(&a) {
                    live.push(a);
                }
            }
        }
    }
    if v == 0 {
        let mut vars = done.clone();
        vars.reverse();
        out.push(Cell { dim, vars });
        return;
    }
    let var = v - 1;
    let mine: Vec<Atom> = live
        .iter()
        .filter(|a| {
            matches!(a, Atom::Ge(f) if f.top_var() == Some(var))
                || matches!(a, Atom::Cong { form, .. } if form.top_var() == Some(var))
        })
        .cloned()
        .collect();
    let rest: Vec<Atom> = live
        .iter()
        .filter(|a| {
            !(matches!(a, Atom::Ge(f) if f.top_var() == Some(var))
                || matches!(a, Atom::Cong { form, .. } if form.top_var() == Some(var)))
        })
        .cloned()
        .collect();

    // Phase 1: congruences on `var`.
    let mut branches = vec![Branch {
        rem: 0,
        modulus: 1,
        pushed: Vec::new(),
        alive: true,
    }];
    let mut ineqs: Vec<&Atom> = Vec::new();
    for atom in &mine {
        match atom {
            Atom::Ge(_) => ineqs.push(atom),
            Atom::Cong { form, rem, modulus } => {
                let m0 = *modulus;
                let a = form.coeffs[var];
                let mut lower_form = form.clone();
                lower_form.coeffs[var] = 0;
                // a * z ≡ rem - lower_form (mod m0)
                let g = egcd(a.rem_euclid(m0).max(1) * 0 + a, m0).0.max(1);
                let g = if a.rem_euclid(m0) == 0 { m0 } else { g };
                let m1 = m0 / g;
                let mut next = Vec::new();
                for br in branches.iter().filter(|b| b.alive) {
                    for c in 0..m0 {
                        // class: (rem - lower_form) ≡ c (mod m0)
                        if c.rem_euclid(g) != 0 {
                            continue;
                        }
                        let z_rem = if m1 == 1 {
                            0
                        } else {
                            let ainv = mod_inverse((a / g).rem_euclid(m1), m1);
                            (ainv * (c / g)).rem_euclid(m1)
                        };
                        let Some((r, m)) = crt(br.rem, br.modulus, z_rem, m1) else {
                            continue;
                        };
                        let mut nb = br.clone();
                        nb.rem = r;
                        nb.modulus = m;
                        // push: lower_form ≡ rem - c (mod m0)
                        nb.pushed.push(Atom::Cong {
                            form: lower_form.clone(),
                            rem: (rem - c).rem_euclid(m0),
                            modulus: m0,
                        });
                        next.push(nb);
                    }
                }
                branches = next;
            }
        }
    }

    // Phase 2: inequalities -> lower/upper candidates.
    // a * z + rest >= 0 with a > 0: z >= (-rest)/a; a < 0: z <= rest/(-a).
    let mut lowers: Vec<Bound> = Vec::new();
    let mut uppers: Vec<Bound> = Vec::new();
    for atom in ineqs {
        let Atom::Ge(f) = atom else { unreachable!() };
        let a = f.coeffs[var];
        let mut r = f.clone();
        r.coeffs[var] = 0;
        if a > 0 {
            lowers.push(Bound {
                form: r.neg(),
                div: a,
            });
        } else {
            uppers.push(Bound { form: r, div: -a });
        }
    }

    for br in branches.into_iter().filter(|b| b.alive) {
        // choose the binding lower (max) and upper (min) with disjoint branching
        let lower_choices = select_extremal(&lowers, true);
        for (lo, lo_atoms) in &lower_choices {
            let upper_choices = select_extremal(&uppers, false);
            for (up, up_atoms) in &upper_choices {
                let mut b2 = br.clone();
                b2.pushed.extend(lo_atoms.iter().cloned());
                b2.pushed.extend(up_atoms.iter().cloned());
                align_and_emit(
                    dim,
                    var,
                    lo.clone(),
                    up.clone(),
                    b2,
                    &rest,
                    &done,
                    out,
                );
            }
        }
    }
}

/// All ways one candidate is the binding bound (max of lowers / min of
/// uppers), with the defining comparison atoms; branches are disjoint via
/// first-index tie-breaking. Returns [(None, [])] if no candidates.
fn select_extremal(cands: &[Bound], is_lower: bool) -> Vec<(Option<Bound>, Vec<Atom>)> {
    if cands.is_empty() {
        return vec![(None, Vec::new())];
    }
    if cands.len() == 1 {
        return vec![(Some(cands[0].clone()), Vec::new())];
    }
    let mut out = Vec::new();
    for j in 0..cands.len() {
        let mut atoms = Vec::new();
        for i in 0..cands.len() {
            if i == j {
                continue;
            }
            // lower: candidate j binding means value_j >= value_i
            // (strict for i < j to break ties disjointly)
            let diff = cands[j]
                .form
                .scale(cands[i].div)
                .sub(&cands[i].form.scale(cands[j].div));
            let cmp = if is_lower { diff.clone() } else { diff.neg() };
            let atom = if i < j {
                Atom::Ge(cmp.plus_const(-1)) // strict
            } else {
                Atom::Ge(cmp)
            };
            atoms.push(atom);
        }
        out.push((Some(cands[j].clone()), atoms));
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn align_and_emit(
    dim: usize,
    var: usize,
    lower: Option<Bound>,
    upper: Option<Bound>,
    br: Branch,
    rest: &[Atom],
    done: &[VarBound],
    out: &mut Vec<Cell>,
) {
    let m = br.modulus;
    // Align the lower bound upward to the congruence class; every residue of
    // form mod (div*m) becomes its own branch with the residue pushed down.
    let lower_variants = match &lower {
        None => vec![(None, Vec::new())],
        Some(b) => align_bound(b, br.rem, m, true),
    };
    for (alo, alo_atoms) in &lower_variants {
        let upper_variants = match &upper {
            None => vec![(None, Vec::new())],
            Some(b) => align_bound(b, br.rem, m, false),
        };
        for (aup, aup_atoms) in &upper_variants {
            let mut pushed = br.pushed.clone();
            pushed.extend(alo_atoms.iter().cloned());
            pushed.extend(aup_atoms.iter().cloned());
            // nonemptiness: aligned lower <= aligned upper
            if let (Some(l), Some(u)) = (alo, aup) {
                pushed.push(Atom::Ge(
                    u.form.scale(l.div).sub(&l.form.scale(u.div)),
                ));
            }
            let mut next_atoms = rest.to_vec();
            next_atoms.extend(pushed);
            let mut next_done = done.to_vec();
            next_done.push(VarBound {
                lower: alo.clone(),
                upper: aup.clone(),
                rem: br.rem,
                modulus: m,
            });
            // fill skipped variables later; recursion handles each index once
            peel_next(dim, var, next_atoms, next_done, out);
        }
    }
}

fn peel_next(dim: usize, var: usize, atoms: Vec<Atom>, mut done: Vec<VarBound>, out: &mut Vec<Cell>) {
    // `done` holds bounds for vars dim-1 .. var. Continue with var-1.
    let _ = var;
    while dim - done.len() > 0 {
        let next_var = dim - done.len() - 1;
        let has_atoms = atoms.iter().any(|a| {
            let t = match a {
                Atom::Ge(f) => f.top_var(),
                Atom::Cong { form, .. } => form.top_var(),
            };
            t == Some(next_var) || t.is_none()
        });
        if has_atoms || next_var == 0 {
            peel(dim, atoms, done, out);
            return;
        }
        done.push(VarBound::free());
    }
    peel(dim, atoms, done, out);
}

/// Branches aligning `b` (value form/div) to the class `rem (mod m)`:
/// for lower bounds round up to the first class point, for upper bounds down
/// to the last. Each residue c of form mod (div*m) is a separate branch.
fn align_bound(b: &Bound, rem: i64, m: i64, is_lower: bool) -> Vec<(Option<Bound>, Vec<Atom>)> {
    let d = b.div;
    if d == 1 && m == 1 {
        return vec![(Some(b.clone()), Vec::new())];
    }
    let period = d * m;
    let mut out = Vec::new();
    for c in 0..period {
        // branch condition: form ≡ c (mod d*m)
        let cond = Atom::Cong {
            form: b.form.clone(),
            rem: c,
            modulus: period,
        };
        // On the branch: (form - c)/d ≡ 0 (mod m) and is an integer.
        // ceil(form/d) = (form - c)/d + ceil(c/d); floor = .. + floor(c/d).
        let (base_const, aligned_const) = if is_lower {
            let ceil_c = (c + d - 1).div_euclid(d);
            let pad = (rem - ceil_c).rem_euclid(m);
            (c, ceil_c + pad)
        } else {
            let floor_c = c.div_euclid(d);
            let back = (floor_c - rem).rem_euclid(m);
            (c, floor_c - back)
        };
        // aligned value = (form - c)/d + aligned_const
        //              = (form - c + d*aligned_const) / d
        let form = b.form.plus_const(-base_const + d * aligned_const);
        out.push((Some(Bound { form, div: d }), vec![cond]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presburger::{cong, ge};

    fn check_partition(set: &PresburgerSet, lo: i64, hi: i64) {
        let cells = normalize(set);
        let dim = set.dim;
        let mut point = vec![lo; dim];
        loop {
            let in_set = set.contains(&point);
            let count = cells.iter().filter(|c| c.contains(&point)).count();
            assert_eq!(
                count,
                usize::from(in_set),
                "point {:?}: set={} cells={}",
                point,
                in_set,
                count
            );
            // odometer
            let mut i = 0;
            loop {
                if i == dim {
                    return;
                }
                point[i] += 1;
                if point[i] <= hi {
                    break;
                }
                point[i] = lo;
                i += 1;
            }
        }
    }

    #[test]
    fn single_congruence_halfline() {
        let s = PresburgerSet::from_conjunction(1, vec![ge(vec![1], 0), cong(vec![1], 0, 2)]);
        let cells = normalize(&s);
        assert_eq!(cells.len(), 1);
        check_partition(&s, -15, 40);
    }

    #[test]
    fn triangle() {
        // {(a,b): 0 <= a <= b}
        let s = PresburgerSet::from_conjunction(
            2,
            vec![ge(vec![1, 0], 0), ge(vec![-1, 1], 0)],
        );
        check_partition(&s, -8, 12);
    }

    #[test]
    fn union_disjointness() {
        // {n >= 3} ∪ {n ≡ 1 mod 2, n >= 0}
        let a = PresburgerSet::from_conjunction(1, vec![ge(vec![1], -3)]);
        let b = PresburgerSet::from_conjunction(1, vec![cong(vec![1], 1, 2), ge(vec![1], 0)]);
        let s = a.union(&b);
        check_partition(&s, -10, 50);
    }

    #[test]
    fn scaled_inequality_and_congruence() {
        // {(a,b): 2b >= a + 1, 3a ≡ 1 mod 5, b <= 7}
        let s = PresburgerSet::from_conjunction(
            2,
            vec![
                ge(vec![-1, 2], -1),
                cong(vec![3, 0], 1, 5),
                ge(vec![0, -1], 7),
            ],
        );
        check_partition(&s, -12, 12);
    }

    #[test]
    fn congruence_with_mixed_vars() {
        // {(a,b): a + b ≡ 2 mod 4, a >= -3, b >= a}
        let s = PresburgerSet::from_conjunction(
            2,
            vec![cong(vec![1, 1], 2, 4), ge(vec![1, 0], 3), ge(vec![-1, 1], 0)],
        );
        check_partition(&s, -10, 10);
    }

    #[test]
    fn empty_set_no_cells() {
        let s = PresburgerSet::from_conjunction(1, vec![ge(vec![1], 0), ge(vec![-1], -5)]);
        // n >= 0 and -n - 5 >= 0: empty
        assert!(normalize(&s).is_empty());
    }

    #[test]
    fn two_lower_bounds() {
        // {(a,b): b >= a, b >= -a, b <= 6}: V-shape
        let s = PresburgerSet::from_conjunction(
            2,
            vec![ge(vec![-1, 1], 0), ge(vec![1, 1], 0), ge(vec![0, -1], 6)],
        );
        check_partition(&s, -9, 9);
    }
}
