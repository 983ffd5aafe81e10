//! p-adic specialization and the independent counting oracle.
//!
//! The oracle recomputes sphere/ball measures of monomial cells over an
//! unramified extension of Q_p by exhaustive enumeration of the parameter
//! data: valuation vectors theta swept over an explicit window (with exact
//! schoolbook geometric tails past it), leading residue digits enumerated in
//! F_q, Jacobian weights q^(-v(Jac)), and the parametrization fibers divided
//! out by literal orbit enumeration over F_q. Nothing here touches the
//! symbolic engine: no ring elements, no Presburger cells, no Smith forms.

use std::collections::BTreeSet;


use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::density::DensityReport;
use crate::geometry::measure::RegionKind;
use crate::geometry::{AuxSemantics, Coord, DefinableSet, MonomialCell};
use crate::lring::poly::{q_int, Q};
use crate::lring::{LElement, LringError};
use crate::residue::ff::FiniteField;
use crate::residue::{ResidueClass, ResidueError};

#[derive(Debug, Error)]
pub enum PadicError {
    #[error("results at consecutive depths disagree; raise the working depth")]
    DepthInsufficient,
    #[error("no period <= {0} fits the sequence")]
    PeriodUndetected(i64),
    #[error(transparent)]
    Residue(#[from] ResidueError),
    #[error(transparent)]
    Lring(#[from] LringError),
    #[error("geometric tail did not stabilize for variable {0}")]
    TailUnstable(usize),
}

/// Working context: residue cardinality q = p^f, precision window depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PadicContext {
    pub p: u64,
    pub f: u32,
    pub depth: i64,
}

impl PadicContext {
    pub fn new(p: u64, f: u32, depth: i64) -> Self {
        assert!(depth >= 1);
        PadicContext { p, f, depth }
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.f)
    }

    fn q_rational(&self) -> Q {
        q_int(self.q() as i64)
    }

    fn q_pow(&self, e: i64) -> Q {
        use num_bigint::BigInt;
        let q = BigInt::from(self.q());
        if e >= 0 {
            Q::from_integer(q.pow(e as u32))
        } else {
            Q::new(1.into(), q.pow((-e) as u32))
        }
    }

    fn vp(&self, mut x: u128) -> i64 {
        assert!(x != 0);
        let mut v = 0;
        while x % self.p as u128 == 0 {
            x /= self.p as u128;
            v += 1;
        }
        v
    }
}

/// Specialize a ring element at L -> q.
pub fn specialize(x: &LElement, ctx: &PadicContext) -> Result<Q, PadicError> {
    Ok(x.theta_q(&ctx.q_rational())?)
}

/// Specialize a residue class (L -> q, rho_g -> gcd(g, q-1)).
pub fn specialize_class(c: &ResidueClass, ctx: &PadicContext) -> Q {
    c.evaluate_q(ctx.q())
}

/// Specialize a density report to exact rationals.
pub fn specialize_report(r: &DensityReport, ctx: &PadicContext) -> Result<(Q, Vec<Q>), PadicError> {
    let value = specialize(&r.value, ctx)?;
    let limits = r
        .class_limits
        .iter()
        .map(|l| specialize(l, ctx))
        .collect::<Result<_, _>>()?;
    Ok((value, limits))
}

/// Number of distinct parametrization pieces of a stratum over F_q, by
/// literal orbit enumeration of the deck action on the angular solutions.
pub fn pieces_bruteforce(cell: &MonomialCell, q: u64) -> Result<u64, PadicError> {
    let field = FiniteField::new(q).map_err(ResidueError::from)?;
    let nv = cell.dim + cell.aux;
    if nv == 0 {
        return Ok(1);
    }
    // angular solutions
    let mut sols: Vec<Vec<u32>> = Vec::new();
    let mut assign = vec![1u32; nv];
    loop {
        let mut ok = true;
        for eq in &cell.angular.equations {
            let r = eq.rhs.resolve(&field)?;
            let mut acc = field.one();
            for (i, &e) in eq.exps.iter().enumerate() {
                if e != 0 {
                    acc = field.mul(acc, field.pow(assign[i], e));
                }
            }
            if acc != r {
                ok = false;
                break;
            }
        }
        if ok {
            sols.push(assign.clone());
        }
        let mut i = 0;
        loop {
            if i == nv {
                break;
            }
            assign[i] += 1;
            if (assign[i] as u64) < q {
                break;
            }
            assign[i] = 1;
            i += 1;
        }
        if i == nv {
            break;
        }
    }
    if sols.is_empty() {
        return Ok(0);
    }
    // deck elements
    let d0 = cell.deck.d0;
    let mut deck: Vec<Vec<u32>> = Vec::new();
    if d0 == 0 {
        deck.push(Vec::new());
    } else {
        let mut zeta = vec![1u32; d0];
        loop {
            let ok = cell.deck.kernel_lattice.iter().all(|row| {
                let mut acc = field.one();
                for (i, &e) in row.iter().enumerate() {
                    if e != 0 {
                        acc = field.mul(acc, field.pow(zeta[i], e));
                    }
                }
                acc == field.one()
            });
            if ok {
                deck.push(zeta.clone());
            }
            let mut i = 0;
            loop {
                if i == d0 {
                    break;
                }
                zeta[i] += 1;
                if (zeta[i] as u64) < q {
                    break;
                }
                zeta[i] = 1;
                i += 1;
            }
            if i == d0 {
                break;
            }
        }
    }
    let act = |x: &[u32], zeta: &[u32]| -> Vec<u32> {
        let mut out = Vec::with_capacity(nv);
        for i in 0..nv {
            let link = if i < cell.dim {
                &cell.deck.param_link[i]
            } else {
                &cell.deck.aux_link[i - cell.dim]
            };
            let mut factor = field.one();
            for (t, &e) in link.iter().enumerate() {
                if e != 0 {
                    factor = field.mul(factor, field.pow(zeta[t], e));
                }
            }
            out.push(field.mul(x[i], factor));
        }
        out
    };
    match cell.aux_semantics {
        AuxSemantics::Weighted => {
            // orbits of Sol under the deck action
            let sol_set: BTreeSet<Vec<u32>> = sols.iter().cloned().collect();
            let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
            let mut orbits = 0u64;
            for s in &sols {
                if seen.contains(s) {
                    continue;
                }
                orbits += 1;
                for z in &deck {
                    let img = act(s, z);
                    if sol_set.contains(&img) {
                        seen.insert(img);
                    }
                }
            }
            Ok(orbits)
        }
        AuxSemantics::Exists => {
            // orbits of the parameter projection under the parameter action
            let proj: BTreeSet<Vec<u32>> = sols.iter().map(|s| s[..cell.dim].to_vec()).collect();
            let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
            let mut orbits = 0u64;
            for s in &proj {
                if seen.contains(s) {
                    continue;
                }
                orbits += 1;
                for z in &deck {
                    let mut img = Vec::with_capacity(cell.dim);
                    for i in 0..cell.dim {
                        let mut factor = field.one();
                        for (t, &e) in cell.deck.param_link[i].iter().enumerate() {
                            if e != 0 {
                                factor = field.mul(factor, field.pow(zeta_get(z, t), e));
                            }
                        }
                        img.push(field.mul(s[i], factor));
                    }
                    if proj.contains(&img) {
                        seen.insert(img);
                    }
                }
            }
            Ok(orbits)
        }
    }
}

fn zeta_get(z: &[u32], t: usize) -> u32 {
    z[t]
}

/// The exponent e(theta) with q^-e(theta) the stratum weight (without the
/// piece count): sum theta + d + min_T [ sum_{j in T}(c_j + alpha_j theta)
/// - sum theta + v_p(det alpha_T) ]. None when theta is outside the region.
fn stratum_exponent(
    cell: &MonomialCell,
    theta: &[i64],
    n: i64,
    kind: RegionKind,
    ctx: &PadicContext,
) -> Option<i64> {
    if !cell.theta.contains(theta) {
        return None;
    }
    let nz = cell.nonzero_indices();
    let ords: Vec<i64> = nz
        .iter()
        .map(|&j| {
            let (c, a) = cell.coord_ord_data(j).unwrap();
            c + a.iter().zip(theta).map(|(&x, &y)| x * y).sum::<i64>()
        })
        .collect();
    let min = *ords.iter().min()?;
    match kind {
        RegionKind::Sphere => {
            if min != n {
                return None;
            }
        }
        RegionKind::Ball => {
            if min < n {
                return None;
            }
        }
    }
    // minimal Jacobian order over full-rank coordinate subsets, by brute
    // determinant expansion
    let d = cell.dim;
    let mut best: Option<i64> = None;
    for combo in combos(nz.len(), d) {
        let det = det_i128(&combo, cell, &nz);
        if det == 0 {
            continue;
        }
        let j: i64 = combo.iter().map(|&k| ords[k]).sum::<i64>() - theta.iter().sum::<i64>()
            + ctx.vp(det.unsigned_abs());
        best = Some(best.map_or(j, |b: i64| b.min(j)));
    }
    let j = best?;
    Some(theta.iter().sum::<i64>() + d as i64 + j)
}

fn combos(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
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
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Determinant by cofactor expansion (d <= 4 in practice).
fn det_i128(combo: &[usize], cell: &MonomialCell, nz: &[usize]) -> i128 {
    let d = cell.dim;
    let rows: Vec<Vec<i128>> = combo
        .iter()
        .map(|&k| {
            cell.coord_ord_data(nz[k])
                .unwrap()
                .1
                .iter()
                .map(|&x| x as i128)
                .collect()
        })
        .collect();
    det_rec(&rows, &(0..d).collect::<Vec<_>>())
}

fn det_rec(rows: &[Vec<i128>], cols: &[usize]) -> i128 {
    if cols.is_empty() {
        return 1;
    }
    let mut acc = 0i128;
    for (i, &c) in cols.iter().enumerate() {
        let rest: Vec<usize> = cols
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &x)| x)
            .collect();
        let minor = det_rec(&rows[1..], &rest);
        let sign = if i % 2 == 0 { 1 } else { -1 };
        acc += sign * rows[0][c] * minor;
    }
    acc
}

/// Exact sum of q^-e(theta) over the cell's strata intersected with the
/// region, by windowed enumeration with geometric tails. Coordinates are
/// swept recursively; past the window the per-class term ratios must be an
/// exact geometric progression (verified on three periods), otherwise the
/// depth is declared insufficient.
fn stratum_sum(
    cell: &MonomialCell,
    n: i64,
    kind: RegionKind,
    ctx: &PadicContext,
) -> Result<Q, PadicError> {
    let d = cell.dim;
    if d == 0 {
        return Ok(Q::zero());
    }
    let cbound = cell
        .coords
        .iter()
        .filter_map(|c| match c {
            Coord::Monomial { gamma, .. } => Some(gamma.ord.abs()),
            Coord::Zero => None,
        })
        .max()
        .unwrap_or(0);
    let window = ctx.depth + cbound + n.abs() + 2;
    let lcm_period = 12i64; // covers moduli up to 12 hmm: safe multiple for tails
    rec_sum(cell, n, kind, ctx, &mut Vec::new(), window, lcm_period)
}

fn rec_sum(
    cell: &MonomialCell,
    n: i64,
    kind: RegionKind,
    ctx: &PadicContext,
    prefix: &mut Vec<i64>,
    window: i64,
    period: i64,
) -> Result<Q, PadicError> {
    let d = cell.dim;
    if prefix.len() == d {
        let e = stratum_exponent(cell, prefix, n, kind, ctx);
        return Ok(match e {
            Some(e) => ctx.q_pow(-e),
            None => Q::zero(),
        });
    }
    let i = prefix.len();
    let mut total = Q::zero();
    for v in -window..=window {
        prefix.push(v);
        total += rec_sum(cell, n, kind, ctx, prefix, window, period)?;
        prefix.pop();
    }
    // upward tail: classes v = window+1 .. window+period, geometric in steps
    // of `period`
    for c in 1..=period {
        let g0 = eval_at(cell, n, kind, ctx, prefix, window + c, window, period)?;
        if g0.is_zero() {
            continue;
        }
        let g1 = eval_at(cell, n, kind, ctx, prefix, window + c + period, window, period)?;
        let g2 = eval_at(
            cell,
            n,
            kind,
            ctx,
            prefix,
            window + c + 2 * period,
            window,
            period,
        )?;
        let r1 = g1.clone() / g0.clone();
        let r2 = if g1.is_zero() {
            Q::zero()
        } else {
            g2.clone() / g1.clone()
        };
        if r1 != r2 || r1.abs() >= Q::one() {
            return Err(PadicError::TailUnstable(i));
        }
        // sum = g0 / (1 - r)
        total += g0 / (Q::one() - r1);
    }
    // downward tail
    for c in 1..=period {
        let g0 = eval_at(cell, n, kind, ctx, prefix, -window - c, window, period)?;
        if g0.is_zero() {
            continue;
        }
        let g1 = eval_at(cell, n, kind, ctx, prefix, -window - c - period, window, period)?;
        let g2 = eval_at(
            cell,
            n,
            kind,
            ctx,
            prefix,
            -window - c - 2 * period,
            window,
            period,
        )?;
        let r1 = g1.clone() / g0.clone();
        let r2 = if g1.is_zero() {
            Q::zero()
        } else {
            g2 / g1
        };
        if r1 != r2 || r1.abs() >= Q::one() {
            return Err(PadicError::TailUnstable(i));
        }
        total += g0 / (Q::one() - r1);
    }
    Ok(total)
}

fn eval_at(
    cell: &MonomialCell,
    n: i64,
    kind: RegionKind,
    ctx: &PadicContext,
    prefix: &mut Vec<i64>,
    value: i64,
    window: i64,
    period: i64,
) -> Result<Q, PadicError> {
    prefix.push(value);
    let r = rec_sum(cell, n, kind, ctx, prefix, window, period);
    prefix.pop();
    r
}

/// mu_d(cell ∩ region(n)) over the p-adic field, by parameter-space
/// enumeration. Exact rational output.
pub fn oracle_cell_measure(
    cell: &MonomialCell,
    n: i64,
    kind: RegionKind,
    ctx: &PadicContext,
) -> Result<Q, PadicError> {
    let pieces = pieces_bruteforce(cell, ctx.q())?;
    if pieces == 0 {
        return Ok(Q::zero());
    }
    let sum = stratum_sum(cell, n, kind, ctx)?;
    Ok(sum * q_int(pieces as i64))
}

/// mu_d(X ∩ region(n)): sum over top-dimensional cells, with the
/// depth-stability guard (depth k and k+1 must agree).
pub fn oracle_measure(
    set: &DefinableSet,
    n: i64,
    kind: RegionKind,
    ctx: &PadicContext,
) -> Result<Q, PadicError> {
    let d = set.dim();
    let run = |depth: i64| -> Result<Q, PadicError> {
        let c = PadicContext { depth, ..*ctx };
        set.cells
            .par_iter()
            .filter(|cell| cell.dim == d && d > 0)
            .map(|cell| oracle_cell_measure(cell, n, kind, &c))
            .try_reduce(Q::zero, |a, b| Ok(a + b))
    };
    let at_k = run(ctx.depth)?;
    let at_k1 = run(ctx.depth + 1)?;
    if at_k != at_k1 {
        return Err(PadicError::DepthInsufficient);
    }
    Ok(at_k)
}

/// Raw digit-level check for one-parameter, aux-free, trivial-kernel cells
/// over Q_p: literally enumerate the residue classes `u = p^shift w`,
/// `w in Z/p^k` nonzero, each of Haar measure `p^(-k-shift)`, and sum the
/// Jacobian weights `p^(-v(Jac))`. Validates the stratified oracle on a code
/// path with no stratum grouping at all.
pub fn raw_measure_zp_dim1(
    cell: &MonomialCell,
    n: i64,
    kind: RegionKind,
    p: u64,
    k: u32,
    ord_shift: i64,
) -> Result<Q, PadicError> {
    assert_eq!(cell.dim, 1);
    assert_eq!(cell.aux, 0);
    let field = FiniteField::new(p).map_err(ResidueError::from)?;
    let ctx = PadicContext::new(p, 1, k as i64);
    let pk = (p as u128).pow(k);
    let class_measure = ctx.q_pow(-(k as i64) - ord_shift);
    let mut total = Q::zero();
    for w in 1..pk {
        let theta = [ctx.vp(w) + ord_shift];
        let Some(e) = stratum_exponent(cell, &theta, n, kind, &ctx) else {
            continue;
        };
        let digit = field.int((unit_part(w, p) % p as u128) as u64);
        let ok = cell.angular.equations.iter().all(|eq| {
            let Ok(r) = eq.rhs.resolve(&field) else {
                return false;
            };
            field.pow(digit, eq.exps[0]) == r
        });
        if !ok {
            continue;
        }
        // e = theta + 1 + v(Jac), so v(Jac) = e - theta - 1
        let jac = e - theta[0] - 1;
        total += ctx.q_pow(-jac) * class_measure.clone();
    }
    Ok(total)
}

/// Empirical density data from oracle measures.
#[derive(Debug, Clone)]
pub struct EmpiricalDensity {
    pub thetas: Vec<Q>,
    pub period: i64,
    pub class_limits: Vec<Q>,
    pub mean: Q,
}

impl EmpiricalDensity {
    /// JSON value with rationals rendered canonically as "p/q" strings.
    pub fn to_json(&self) -> serde_json::Value {
        let rat = |q: &Q| -> serde_json::Value {
            serde_json::Value::String(if q.denom().is_one() {
                q.numer().to_string()
            } else {
                format!("{}/{}", q.numer(), q.denom())
            })
        };
        serde_json::json!({
            "thetas": self.thetas.iter().map(rat).collect::<Vec<_>>(),
            "period": self.period,
            "class_limits": self.class_limits.iter().map(rat).collect::<Vec<_>>(),
            "mean": rat(&self.mean),
        })
    }
}

/// theta_n from the oracle, period detection, and the mean of the class
/// limits.
pub fn empirical_density(
    set: &DefinableSet,
    ctx: &PadicContext,
    n_max: i64,
) -> Result<EmpiricalDensity, PadicError> {
    let d = set.dim() as i64;
    let q = ctx.q();
    let norm_inv = |n: i64| -> Q {
        // 1 / ((1 - q^-d) q^{-nd})
        let one_minus = Q::one() - ctx.q_pow(-d);
        ctx.q_pow(n * d) / one_minus
    };
    let mut thetas = Vec::new();
    for n in 0..=n_max {
        let mu = oracle_measure(set, n, RegionKind::Sphere, ctx)?;
        thetas.push(mu * norm_inv(n));
    }
    let _ = q;
    // detect the smallest period e <= n_max/3 with eventually constant classes
    'outer: for e in 1..=(n_max / 3).max(1) {
        let mut limits = Vec::new();
        for j in 0..e {
            // the last few members of class j must be constant
            let members: Vec<&Q> = (0..=n_max)
                .filter(|n| n % e == j)
                .map(|n| &thetas[n as usize])
                .collect();
            if members.len() < 3 {
                continue 'outer;
            }
            let tail = &members[members.len() - 2..];
            if tail[0] != tail[1] {
                continue 'outer;
            }
            limits.push(tail[0].clone());
        }
        let mean = limits.iter().fold(Q::zero(), |a, b| a + b) / q_int(e);
        return Ok(EmpiricalDensity {
            thetas,
            period: e,
            class_limits: limits,
            mean,
        });
    }
    Err(PadicError::PeriodUndetected(n_max / 3))
}

/// The multiplicity-correction demonstration on the cusp (x^2 = y^3,
/// parametrized (u^3, u^2)) over Q_p:
///
/// - `cm`: the number of angular partition classes xi = ac(u) whose scaled
///   images converge to a fixed square direction y0 (counted over F_p),
/// - `sc`: the naive variant: the group index [K^* : squares] times the
///   deformation density at (0, y0, 0), the latter confirmed = 1 by literal
///   counting of deformation points modulo p^k.
pub struct MultiplicityDemo {
    pub cm: u64,
    pub sc: Q,
    pub deformation_density_observed: Vec<Q>,
}

pub fn cusp_multiplicity_demo(p: u64, k: u32) -> Result<MultiplicityDemo, PadicError> {
    assert!(p % 2 == 1, "odd residue characteristic required");
    let field = FiniteField::new(p).map_err(ResidueError::from)?;
    // cm: #{xi in F_p^* : xi^2 = ac(y0)} for a square unit y0 (take y0 = 1)
    let ac_y0 = field.one();
    let mut cm = 0u64;
    for xi in field.nonzero_elements() {
        if field.pow(xi, 2) == ac_y0 {
            cm += 1;
        }
    }
    // sc: 4 * Theta_2(D(X,0,P2), (0,y0,0)); confirm the density is 1 by
    // counting |{(y1,y2) mod p^m : ord y1 >= n, ord(y2-1) >= n,
    // y1^2/y2^3 a square with ord >= n}| * p^{-2m} = p^{-2n}.
    let mut observed = Vec::new();
    let y0: u128 = 1;
    for n in 1..=2i64 {
        let m = (n as u32) + k.min(3); // enough digits past the ball radius
        let pm = (p as u128).pow(m);
        let pn = (p as u128).pow(n as u32);
        let mut count: u128 = 0;
        for y1 in 0..pm {
            if y1 % pn != 0 {
                continue; // ord y1 >= n
            }
            for y2 in 0..pm {
                if (y2 + pm - y0 % pm) % pn != 0 {
                    continue; // ord(y2 - y0) >= n
                }
                if y2 == 0 {
                    continue;
                }
                // lambda = y1^2 / y2^3 must be a square in Q_p with ord >= n;
                // ord lambda = 2 ord(y1) - 3 ord(y2) = 2 ord(y1) (y2 unit);
                // y1 = 0 represents the deep class ord y1 >= m: lambda -> 0
                // boundary of the ball: include (the fiber is the full ball).
                if y1 == 0 {
                    count += 1;
                    continue;
                }
                let mut v1 = 0u32;
                let mut t = y1;
                while t % p as u128 == 0 {
                    t /= p as u128;
                    v1 += 1;
                }
                let ord_lambda = 2 * v1 as i64;
                if ord_lambda < n {
                    continue;
                }
                // square iff ord even (true) and ac(lambda) a QR:
                // ac(lambda) = ac(y1)^2 / ac(y2)^3: square iff ac(y2) is a QR
                let acy2 = field.int((unit_part(y2, p) % p as u128) as u64);
                let is_qr = field.pow(acy2, ((p - 1) / 2) as i64) == field.one();
                if is_qr {
                    count += 1;
                }
            }
        }
        let measure = q_int(count as i64) / q_int((pm * pm) as i64);
        observed.push(measure * q_int((pn * pn) as i64)); // / p^{-2n}
    }
    let sc = q_int(4) * observed.last().unwrap().clone();
    Ok(MultiplicityDemo {
        cm,
        sc,
        deformation_density_observed: observed,
    })
}

fn unit_part(mut x: u128, p: u64) -> u128 {
    while x % p as u128 == 0 {
        x /= p as u128;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::corpus;
    use crate::geometry::measure::{measure_at, MeasureMode};

    fn ctx(p: u64, f: u32) -> PadicContext {
        PadicContext::new(p, f, 6)
    }

    fn qq(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    #[test]
    fn unit_ball_oracle() {
        let x = corpus::unit_ball().validate().unwrap();
        let c = ctx(3, 1);
        // O_K ∩ S(0,2): (2/3) 3^-2
        let m = oracle_measure(&x, 2, RegionKind::Sphere, &c).unwrap();
        assert_eq!(m, qq(2, 3) * qq(1, 9));
        let b = oracle_measure(&x, 2, RegionKind::Ball, &c).unwrap();
        assert_eq!(b, qq(1, 9));
    }

    #[test]
    fn cusp_oracle_values() {
        let x = corpus::cusp().validate().unwrap();
        let c = ctx(5, 1);
        assert_eq!(
            oracle_measure(&x, 2, RegionKind::Sphere, &c).unwrap(),
            qq(4, 5) * qq(1, 25)
        );
        assert_eq!(
            oracle_measure(&x, 3, RegionKind::Sphere, &c).unwrap(),
            Q::zero()
        );
    }

    #[test]
    fn oracle_matches_symbolic_on_products() {
        // strata with an infinite tail (theta_2 free above the radius)
        let x = corpus::unit_polydisk(2).validate().unwrap();
        let c = ctx(3, 1);
        for n in 0..4 {
            let sym = measure_at(&x, n, RegionKind::Sphere, MeasureMode::padic(3, 1)).unwrap();
            let sym_q = sym.theta_q(&qq(3, 1)).unwrap();
            let ora = oracle_measure(&x, n, RegionKind::Sphere, &c).unwrap();
            assert_eq!(sym_q, ora, "n={}", n);
        }
    }

    #[test]
    fn square_quartic_oracle_counts_squares() {
        let x = corpus::square_quartic().validate().unwrap();
        let c = ctx(5, 1);
        // S(0,0): square unit classes only: ((q-1)/2) q^-1
        assert_eq!(
            oracle_measure(&x, 0, RegionKind::Sphere, &c).unwrap(),
            qq(2, 5)
        );
    }

    #[test]
    fn empirical_densities() {
        let c = ctx(3, 1);
        let x = corpus::ord_congruence(0, 2).validate().unwrap();
        let e = empirical_density(&x, &c, 8).unwrap();
        assert_eq!(e.period, 2);
        assert_eq!(e.mean, qq(1, 2));
        assert_eq!(e.class_limits, vec![Q::one(), Q::zero()]);
        let x = corpus::unit_ball().validate().unwrap();
        let e = empirical_density(&x, &c, 6).unwrap();
        assert_eq!(e.period, 1);
        assert_eq!(e.mean, Q::one());
        let x = corpus::cusp().validate().unwrap();
        let e = empirical_density(&x, &ctx(7, 1), 8).unwrap();
        assert_eq!(e.period, 2);
        assert_eq!(e.mean, qq(1, 2));
    }

    #[test]
    fn multiplicity_demo_values() {
        for p in [3u64, 7] {
            let demo = cusp_multiplicity_demo(p, 3).unwrap();
            assert_eq!(demo.cm, 2, "p={}", p);
            assert_eq!(demo.sc, qq(4, 1), "p={}", p);
            for obs in &demo.deformation_density_observed {
                assert_eq!(*obs, Q::one(), "p={}", p);
            }
        }
    }

    #[test]
    fn specialization_of_class() {
        let c = ResidueClass::rho(2).mul(&ResidueClass::l_minus_one(1));
        assert_eq!(specialize_class(&c, &ctx(3, 2)), qq(16, 1)); // gcd(2,8)*8
    }

    #[test]
    fn raw_digit_enumeration_agrees() {
        // cells with trivial kernel and no angular constraints: the raw
        // digit-level sum equals the stratified oracle
        for set in [corpus::unit_ball(), corpus::cusp(), corpus::ord_congruence(1, 3)] {
            let x = set.validate().unwrap();
            let cell = &x.cells[0];
            for p in [3u64, 5] {
                for n in 0..5 {
                    let raw =
                        raw_measure_zp_dim1(cell, n, RegionKind::Sphere, p, 7, 0).unwrap();
                    let strat =
                        oracle_cell_measure(cell, n, RegionKind::Sphere, &ctx(p, 1)).unwrap();
                    assert_eq!(raw, strat, "p={} n={}", p, n);
                }
            }
        }
    }
}
