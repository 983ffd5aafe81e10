//! Exact summation of exponential-polynomial integrands over normalized
//! cells, innermost variable first. Each one-variable step applies the
//! geometric/Eulerian closed forms for `sum w^a t^w` over a congruence class
//! between affine bounds, so iterated sums stay inside the ring.

use std::collections::BTreeMap;

use super::cells::{Bound, Cell};
use super::qep::{LSeqTerm, QepFunction};
use super::PresburgerError;
use crate::lring::poly::{q_int, Q};
use crate::lring::LElement;
use num_traits::{One, Zero};

/// Very negative sentinel for "no threshold" (exact for all n).
const NEG_INF: i64 = -(1 << 40);

/// coeff * prod z_i^powers[i] * L^(sum lexps[i] z_i)
#[derive(Debug, Clone)]
pub struct Monomial {
    pub coeff: LElement,
    pub powers: Vec<u32>,
    pub lexps: Vec<i64>,
}

#[derive(Debug, Clone)]
pub struct Integrand {
    pub terms: Vec<Monomial>,
}

impl Integrand {
    pub fn constant(nvars: usize, coeff: LElement) -> Self {
        Integrand {
            terms: vec![Monomial {
                coeff,
                powers: vec![0; nvars],
                lexps: vec![0; nvars],
            }],
        }
    }

    /// L^(sum lexps[i] z_i + c)
    pub fn l_linear(nvars: usize, lexps: Vec<i64>, c: i64) -> Self {
        assert_eq!(lexps.len(), nvars);
        Integrand {
            terms: vec![Monomial {
                coeff: LElement::l_pow(c),
                powers: vec![0; nvars],
                lexps,
            }],
        }
    }
}

/// Multivariate polynomial over the current variables, rational coefficients.
type MPoly = BTreeMap<Vec<u32>, Q>;

fn mp_const(nvars: usize, c: Q) -> MPoly {
    let mut m = MPoly::new();
    if !c.is_zero() {
        m.insert(vec![0; nvars], c);
    }
    m
}

fn mp_add_into(a: &mut MPoly, b: &MPoly) {
    for (k, v) in b {
        let e = a.entry(k.clone()).or_insert_with(Q::zero);
        *e += v;
        if e.is_zero() {
            a.remove(k);
        }
    }
}

fn mp_mul(a: &MPoly, b: &MPoly) -> MPoly {
    let mut out = MPoly::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            let key: Vec<u32> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
            let e = out.entry(key).or_insert_with(Q::zero);
            *e += va * vb;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn mp_scale(a: &MPoly, c: &Q) -> MPoly {
    if c.is_zero() {
        return MPoly::new();
    }
    a.iter().map(|(k, v)| (k.clone(), v * c)).collect()
}

fn mp_pow(a: &MPoly, nvars: usize, k: u32) -> MPoly {
    let mut acc = mp_const(nvars, Q::one());
    for _ in 0..k {
        acc = mp_mul(&acc, a);
    }
    acc
}

/// Rational affine form over the current variables; on cell points its value
/// is an integer whenever used as an L-exponent.
#[derive(Debug, Clone)]
struct AffineQ {
    coeffs: Vec<Q>,
    constant: Q,
}

impl AffineQ {
    fn zero(nvars: usize) -> Self {
        AffineQ {
            coeffs: vec![Q::zero(); nvars],
            constant: Q::zero(),
        }
    }

    fn from_bound(b: &Bound, nvars: usize) -> Self {
        let d = q_int(b.div);
        AffineQ {
            coeffs: (0..nvars)
                .map(|i| Q::from_integer(b.form.coeffs[i].into()) / d.clone())
                .collect(),
            constant: Q::from_integer(b.form.constant.into()) / d,
        }
    }

    fn add(&self, other: &AffineQ) -> AffineQ {
        AffineQ {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            constant: &self.constant + &other.constant,
        }
    }

    fn scale(&self, c: &Q) -> AffineQ {
        AffineQ {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
            constant: &self.constant * c,
        }
    }

    fn plus_const(&self, c: &Q) -> AffineQ {
        AffineQ {
            coeffs: self.coeffs.clone(),
            constant: &self.constant + c,
        }
    }

    fn as_mpoly(&self, nvars: usize) -> MPoly {
        let mut m = mp_const(nvars, self.constant.clone());
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                let mut key = vec![0u32; nvars];
                key[i] = 1;
                let e = m.entry(key).or_insert_with(Q::zero);
                *e += c;
            }
        }
        m.retain(|_, v| !v.is_zero());
        m
    }
}

#[derive(Debug, Clone)]
struct Term {
    scalar: LElement,
    poly: MPoly,
    lexp: AffineQ,
}

/// Sum the integrand over the union of cells. `free` is 0 or 1: with 1, the
/// first variable of every cell is the free parameter and the result is a
/// function of it.
pub fn sum_over(
    cells: &[Cell],
    integrand: &Integrand,
    free: usize,
) -> Result<QepFunction, PresburgerError> {
    assert!(free <= 1);
    let mut total = QepFunction::zero();
    for cell in cells {
        let qep = sum_over_cell(cell, integrand, free)?;
        total = total.add(&qep);
    }
    Ok(total.normalize())
}

/// Convenience for `free = 0`: a single ring element.
pub fn sum_over_closed(cells: &[Cell], integrand: &Integrand) -> Result<LElement, PresburgerError> {
    let q = sum_over(cells, integrand, 0)?;
    debug_assert_eq!(q.period, 1);
    Ok(q.value_at(q.threshold.max(0)))
}

fn sum_over_cell(
    cell: &Cell,
    integrand: &Integrand,
    free: usize,
) -> Result<QepFunction, PresburgerError> {
    let s = cell.dim;
    let mut terms: Vec<Term> = integrand
        .terms
        .iter()
        .map(|m| {
            assert_eq!(m.powers.len(), s);
            let mut key = m.powers.clone();
            let mut poly = MPoly::new();
            poly.insert(std::mem::take(&mut key), Q::one());
            Term {
                scalar: m.coeff.clone(),
                poly,
                lexp: AffineQ {
                    coeffs: m.lexps.iter().map(|&b| q_int(b)).collect(),
                    constant: Q::zero(),
                },
            }
        })
        .collect();
    let mut threshold = NEG_INF;
    let mut drop_above: Option<i64> = None;
    for v in (free..s).rev() {
        terms = sum_one_var(cell, v, terms)?;
    }
    // Assemble the result over the free variable (if any).
    if free == 0 {
        let mut acc = LElement::zero();
        for t in terms {
            let c = t.poly.get(&Vec::new()).cloned().unwrap_or_else(Q::zero);
            if c.is_zero() {
                continue;
            }
            let e = rational_to_int(&t.lexp.constant);
            acc = acc.add(&t.scalar.scale(&c).mul(&LElement::l_pow(e)));
        }
        return Ok(QepFunction::constant(acc));
    }
    // free == 1: n is variable 0 with a constant-bound VarBound.
    let vb = &cell.vars[0];
    let m = vb.modulus;
    let rem = vb.rem.rem_euclid(m);
    if let Some(lo) = &vb.lower {
        threshold = threshold.max(lo.exact_value_at(&[]));
    }
    if let Some(up) = &vb.upper {
        // the piece vanishes for n > upper: it does not contribute eventually
        drop_above = Some(up.exact_value_at(&[]));
    }
    if let Some(d) = drop_above {
        return Ok(QepFunction {
            period: 1,
            threshold: d + 1,
            classes: vec![Vec::new()],
        });
    }
    let mut class_terms: Vec<LSeqTerm> = Vec::new();
    for t in terms {
        // t.poly is univariate in n; t.lexp likewise: value at n = rem + m*w
        let b_per_w = {
            let v = &t.lexp.coeffs[0] * q_int(m);
            rational_to_int(&v)
        };
        let l_at_rem = rational_to_int(&t.lexp.plus_const(&Q::zero()).eval1(rem));
        for (key, coeff) in &t.poly {
            let k = key[0];
            // n^k = (rem + m w)^k
            for i in 0..=k {
                let mut c = coeff * q_int(binom(k, i));
                for _ in 0..(k - i) {
                    c *= q_int(rem);
                }
                for _ in 0..i {
                    c *= q_int(m);
                }
                if c.is_zero() {
                    continue;
                }
                class_terms.push(LSeqTerm {
                    h: t.scalar.scale(&c).mul(&LElement::l_pow(l_at_rem)),
                    a: i,
                    b: b_per_w,
                });
            }
        }
    }
    let mut classes = vec![Vec::new(); m as usize];
    classes[rem as usize] = class_terms;
    Ok(QepFunction {
        period: m,
        threshold: if threshold == NEG_INF { NEG_INF } else { threshold },
        classes,
    }
    .normalize())
}

impl AffineQ {
    fn eval1(&self, x: i64) -> Q {
        debug_assert_eq!(self.coeffs.len(), 1);
        &self.coeffs[0] * q_int(x) + &self.constant
    }
}

fn rational_to_int(q: &Q) -> i64 {
    assert!(
        q.denom().is_one(),
        "exponent not integral on cell: {}",
        q
    );
    use num_traits::ToPrimitive;
    q.numer().to_i64().expect("exponent out of i64 range")
}

fn binom(n: u32, k: u32) -> i64 {
    let mut r: i64 = 1;
    for i in 0..k {
        r = r * (n - i) as i64 / (i + 1) as i64;
    }
    r
}

/// Sum out the last variable `v` (index v = current nvars - 1).
fn sum_one_var(cell: &Cell, v: usize, terms: Vec<Term>) -> Result<Vec<Term>, PresburgerError> {
    let vb = &cell.vars[v];
    let m = vb.modulus;
    let nvars = v; // remaining variable count
    let mut out: Vec<Term> = Vec::new();
    // Bounds as rational affine forms over the remaining variables.
    let lo = vb.lower.as_ref().map(|b| AffineQ::from_bound(b, nvars));
    let up = vb.upper.as_ref().map(|b| AffineQ::from_bound(b, nvars));
    // Ranges to process: (start, direction, count) with count None = infinite.
    // count W: number of steps, w in [0, W].
    enum Range {
        Up(AffineQ, Option<AffineQ>),
        Down(AffineQ, Option<AffineQ>),
    }
    let ranges: Vec<Range> = match (lo, up) {
        (Some(l), Some(u)) => {
            // W = (u - l)/m
            let w = u.add(&l.scale(&-Q::one())).scale(&(Q::one() / q_int(m)));
            vec![Range::Up(l, Some(w))]
        }
        (Some(l), None) => vec![Range::Up(l, None)],
        (None, Some(u)) => vec![Range::Down(u, None)],
        (None, None) => {
            // split Z into the class point >= 0 going up, and its predecessor
            // going down
            let r0 = vb.rem.rem_euclid(m);
            let lo0 = AffineQ {
                coeffs: vec![Q::zero(); nvars],
                constant: q_int(r0),
            };
            let up0 = AffineQ {
                coeffs: vec![Q::zero(); nvars],
                constant: q_int(r0 - m),
            };
            vec![Range::Up(lo0, None), Range::Down(up0, None)]
        }
    };
    for range in &ranges {
        let (start, step, wmax) = match range {
            Range::Up(s, w) => (s, m, w),
            Range::Down(s, w) => (s, -m, w),
        };
        for t in &terms {
            sum_term_over_range(t, v, nvars, start, step, wmax.as_ref(), &mut out)?;
        }
    }
    Ok(out)
}

/// Accumulate `sum_{w=0}^{W} t(z_<, start + step*w)` into `out`, where the
/// last variable of `t` is substituted by `start + step*w`.
fn sum_term_over_range(
    t: &Term,
    v: usize,
    nvars: usize,
    start: &AffineQ,
    step: i64,
    wmax: Option<&AffineQ>,
    out: &mut Vec<Term>,
) -> Result<(), PresburgerError> {
    // Split the polynomial by the degree in variable v.
    let mut by_deg: BTreeMap<u32, MPoly> = BTreeMap::new();
    for (key, coeff) in &t.poly {
        let k = key[v];
        let reduced: Vec<u32> = key[..v].to_vec();
        let e = by_deg.entry(k).or_insert_with(MPoly::new);
        let slot = e.entry(reduced).or_insert_with(Q::zero);
        *slot += coeff;
    }
    // L-exponent: lexp = lexp' + e_v * z_v; substitute z_v = start + step*w.
    let e_v = t.lexp.coeffs[v].clone();
    let lexp_rest = AffineQ {
        coeffs: t.lexp.coeffs[..v].to_vec(),
        constant: t.lexp.constant.clone(),
    };
    let lexp_base = lexp_rest.add(&start.scale(&e_v)); // over remaining vars
    let tau_q = &e_v * q_int(step);
    let tau = rational_to_int(&tau_q); // integer by cell alignment
    let start_poly = start.as_mpoly(nvars);

    // poly part: z_v^k = (start + step w)^k = sum_i C(k,i) start^(k-i) step^i w^i
    // -> coefficient polys P_i over remaining vars, per original degree k.
    let mut w_coeffs: BTreeMap<u32, MPoly> = BTreeMap::new(); // w-degree -> poly
    for (k, base) in &by_deg {
        for i in 0..=*k {
            let mut c = q_int(binom(*k, i));
            for _ in 0..i {
                c *= q_int(step);
            }
            let piece = mp_scale(
                &mp_mul(base, &mp_pow(&start_poly, nvars, k - i)),
                &c,
            );
            let e = w_coeffs.entry(i).or_insert_with(MPoly::new);
            mp_add_into(e, &piece);
        }
    }

    for (i, p_i) in &w_coeffs {
        if p_i.is_empty() {
            continue;
        }
        if t.scalar.is_zero() {
            continue;
        }
        let pieces = closed_form_sum(*i, tau, wmax, nvars, v)?;
        for piece in pieces {
            out.push(Term {
                scalar: t.scalar.mul(&piece.scalar),
                poly: mp_mul(p_i, &piece.poly),
                lexp: lexp_base.add(&piece.lexp),
            });
        }
    }
    Ok(())
}

/// A summand contribution: scalar * poly(z_<) * L^{lexp(z_<)}.
struct Piece {
    scalar: LElement,
    poly: MPoly,
    lexp: AffineQ,
}

/// Closed form for `sum_{w=0}^{W} w^a (L^tau)^w` as pieces over the
/// remaining variables; `W = None` means infinity.
fn closed_form_sum(
    a: u32,
    tau: i64,
    wmax: Option<&AffineQ>,
    nvars: usize,
    var_index: usize,
) -> Result<Vec<Piece>, PresburgerError> {
    match (tau.signum(), wmax) {
        (0, None) => Err(PresburgerError::NonSummable { var: var_index }),
        (1, None) => Err(PresburgerError::NonSummable { var: var_index }),
        (-1, None) => Ok(vec![Piece {
            scalar: eulerian_closed_form(a, tau),
            poly: mp_const(nvars, Q::one()),
            lexp: AffineQ::zero(nvars),
        }]),
        (0, Some(w)) => {
            // Faulhaber polynomial in W
            let coeffs = faulhaber(a);
            let wpoly = w.as_mpoly(nvars);
            let mut poly = MPoly::new();
            for (deg, c) in coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                mp_add_into(&mut poly, &mp_scale(&mp_pow(&wpoly, nvars, deg as u32), c));
            }
            Ok(vec![Piece {
                scalar: LElement::one(),
                poly,
                lexp: AffineQ::zero(nvars),
            }])
        }
        (-1, Some(w)) => {
            // F_a(T) - sum_i C(a,i) (W+1)^(a-i) T^(W+1) F_i(T)
            let mut pieces = vec![Piece {
                scalar: eulerian_closed_form(a, tau),
                poly: mp_const(nvars, Q::one()),
                lexp: AffineQ::zero(nvars),
            }];
            let wp1 = w.plus_const(&Q::one());
            let wp1_poly = wp1.as_mpoly(nvars);
            for i in 0..=a {
                let c = q_int(binom(a, i));
                let poly = mp_scale(&mp_pow(&wp1_poly, nvars, a - i), &(-c));
                if poly.is_empty() {
                    continue;
                }
                pieces.push(Piece {
                    scalar: eulerian_closed_form(i, tau),
                    poly,
                    lexp: wp1.scale(&q_int(tau)),
                });
            }
            Ok(pieces)
        }
        (1, Some(w)) => {
            // reverse the order: sum_{v=0}^{W} (W-v)^a T^(W-v)
            //  = sum_i C(a,i) (-1)^i W^(a-i) T^W [ F_i(R) - sum_j C(i,j)(W+1)^(i-j) R^(W+1) F_j(R) ]
            // with R = T^{-1} (so tau_R = -tau < 0); T^W R^(W+1) = T^{-1}.
            let mut pieces = Vec::new();
            let w_poly = w.as_mpoly(nvars);
            let wp1 = w.plus_const(&Q::one());
            let wp1_poly = wp1.as_mpoly(nvars);
            for i in 0..=a {
                let ci = q_int(binom(a, i)) * if i % 2 == 0 { Q::one() } else { -Q::one() };
                let outer = mp_scale(&mp_pow(&w_poly, nvars, a - i), &ci);
                if outer.is_empty() {
                    continue;
                }
                // T^W F_i(R)
                pieces.push(Piece {
                    scalar: eulerian_closed_form(i, -tau),
                    poly: outer.clone(),
                    lexp: w.scale(&q_int(tau)),
                });
                // - T^{-1} sum_j C(i,j) (W+1)^(i-j) F_j(R)
                for j in 0..=i {
                    let cj = q_int(binom(i, j));
                    let poly = mp_scale(
                        &mp_mul(&outer, &mp_pow(&wp1_poly, nvars, i - j)),
                        &(-cj),
                    );
                    if poly.is_empty() {
                        continue;
                    }
                    pieces.push(Piece {
                        scalar: eulerian_closed_form(j, -tau).mul(&LElement::l_pow(-tau)),
                        poly,
                        lexp: AffineQ::zero(nvars),
                    });
                }
            }
            Ok(pieces)
        }
        _ => unreachable!(),
    }
}

/// F_a(T) = sum_{w>=0} w^a T^w for T = L^tau, tau < 0, as an LElement:
/// F_0 = 1/(1-T); F_a = (sum_j Eulerian(a,j) T^(j+1)) / (1-T)^(a+1).
fn eulerian_closed_form(a: u32, tau: i64) -> LElement {
    assert!(tau < 0);
    let inv = LElement::inv_one_minus_l_negpow((-tau) as u32);
    if a == 0 {
        return inv;
    }
    let e = eulerian_row(a);
    let mut num = LElement::zero();
    for (j, c) in e.iter().enumerate() {
        num = num.add(&LElement::l_pow(tau * (j as i64 + 1)).scale(&q_int(*c)));
    }
    num.mul(&inv.pow(a + 1))
}

/// Eulerian numbers A(a, 0..a-1).
fn eulerian_row(a: u32) -> Vec<i64> {
    let mut row = vec![1i64];
    for n in 2..=a {
        let mut next = vec![0i64; n as usize];
        for k in 0..n as usize {
            let left = if k < row.len() { row[k] } else { 0 };
            let up_left = if k >= 1 { row[k - 1] } else { 0 };
            next[k] = (k as i64 + 1) * left + (n as i64 - k as i64) * up_left;
        }
        row = next;
    }
    row
}

/// Coefficients (low -> high in W) of sum_{w=0}^{W} w^a.
fn faulhaber(a: u32) -> Vec<Q> {
    // telescoping identity: sum_{j=0}^{a} C(a+1, j) S_j(W) = (W+1)^(a+1)
    let mut all: Vec<Vec<Q>> = Vec::new();
    for k in 0..=a {
        let mut rhs = binomial_expansion(k + 1);
        for (j, sj) in all.iter().enumerate() {
            let c = q_int(binom_u64(k as u64 + 1, j as u64));
            for (d, v) in sj.iter().enumerate() {
                rhs[d] -= v * &c;
            }
        }
        let inv = Q::one() / q_int(k as i64 + 1);
        let sk: Vec<Q> = rhs.iter().map(|c| c * &inv).collect();
        all.push(sk);
    }
    all.pop().unwrap()
}

/// Coefficients of (W+1)^n, low -> high.
fn binomial_expansion(n: u32) -> Vec<Q> {
    (0..=n).map(|j| q_int(binom(n, j))).collect()
}

fn binom_u64(n: u64, k: u64) -> i64 {
    let mut r: i64 = 1;
    for i in 0..k {
        r = r * (n - i) as i64 / (i + 1) as i64;
    }
    r
}
