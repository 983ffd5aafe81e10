//! Motivic classes of binomial varieties over the residue field.
//!
//! A binomial system lives on a fixed torus stratum: each variable is flagged
//! zero or nonzero, and the multiplicative equations `xi^M_row = c_row`
//! involve only nonzero variables. Smith normal form of the exponent matrix
//! gives the canonical class `(L-1)^(r' - rank) * prod rho_{d_i}`, where
//! `rho_g` is the symbolic count of g-th roots of unity in the residue field
//! (g when algebraically closed, gcd(g, q-1) over F_q).

pub mod ff;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lring::poly::{q_int, Q};
use crate::lring::LElement;
use crate::zlattice::{smith_normal_form, ZMat};
use ff::{FieldError, FiniteField};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ResidueError {
    #[error("solvability depends on the formal constant {0:?}")]
    UnresolvedConstant(String),
    #[error("root-of-unity constant of order {0} does not exist in F_{1}")]
    MissingRoot(u64, u64),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("equation references a zero-flagged variable")]
    ZeroVariableInEquation,
}

/// How residue-field symbols are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResidueMode {
    /// rho_g -> g, every unit equation solvable.
    AlgebraicallyClosed,
    /// rho_g -> gcd(g, q-1), concrete arithmetic in F_q.
    FiniteQ { q: u64 },
    /// keep rho_g symbols.
    Symbolic,
}

/// A unit constant on the right-hand side of a binomial equation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UnitConst {
    One,
    /// integer residue (embedded via the prime field in finite mode)
    Int(i64),
    /// a primitive `order`-th root of unity raised to `pow`
    Zeta { order: u32, pow: u32 },
    /// formal unit symbol
    Formal(String),
}

impl UnitConst {
    pub fn is_one(&self) -> bool {
        matches!(self, UnitConst::One)
            || matches!(self, UnitConst::Int(1))
            || matches!(self, UnitConst::Zeta { pow: 0, .. })
    }

    pub fn resolve(&self, field: &FiniteField) -> Result<u32, ResidueError> {
        match self {
            UnitConst::One => Ok(field.one()),
            UnitConst::Int(k) => {
                let v = field.int(k.rem_euclid(field.p as i64) as u64);
                if field.is_zero(v) {
                    Err(ResidueError::UnresolvedConstant(format!(
                        "integer {} is zero in F_{}",
                        k, field.q
                    )))
                } else {
                    Ok(v)
                }
            }
            UnitConst::Zeta { order, pow } => {
                let m = field.q - 1;
                if m % (*order as u64) != 0 {
                    return Err(ResidueError::MissingRoot(*order as u64, field.q));
                }
                Ok(field.from_dlog((m / *order as u64) as i64 * *pow as i64))
            }
            UnitConst::Formal(name) => Err(ResidueError::UnresolvedConstant(name.clone())),
        }
    }
}

/// `prod_j constants[j] ^ exps[j]`, tracked formally for SNF-transformed
/// right-hand sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstWord {
    pub factors: Vec<(UnitConst, i64)>,
}

impl ConstWord {
    pub fn one() -> Self {
        ConstWord { factors: vec![] }
    }

    pub fn is_formally_one(&self) -> bool {
        self.factors.iter().all(|(c, e)| c.is_one() || *e == 0)
    }

    pub fn resolve(&self, field: &FiniteField) -> Result<u32, ResidueError> {
        let mut acc = field.one();
        for (c, e) in &self.factors {
            if *e == 0 {
                continue;
            }
            let v = c.resolve(field)?;
            acc = field.mul(acc, field.pow(v, *e));
        }
        Ok(acc)
    }

    /// Does the word involve an unresolved formal symbol (nontrivially)?
    fn has_formal(&self) -> Option<&str> {
        self.factors.iter().find_map(|(c, e)| match c {
            UnitConst::Formal(s) if *e != 0 => Some(s.as_str()),
            _ => None,
        })
    }
}

/// One multiplicative equation `prod xi_i^{exps[i]} = rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinomialEquation {
    pub exps: Vec<i64>,
    pub rhs: UnitConst,
}

/// Binomial system on a torus stratum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinomialSystem {
    /// total number of residue variables; `zero_flags[i]` marks xi_i = 0
    pub zero_flags: Vec<bool>,
    pub equations: Vec<BinomialEquation>,
}

impl BinomialSystem {
    pub fn torus(nvars: usize) -> Self {
        BinomialSystem {
            zero_flags: vec![false; nvars],
            equations: Vec::new(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.zero_flags.len()
    }

    pub fn nonzero_count(&self) -> usize {
        self.zero_flags.iter().filter(|z| !**z).count()
    }

    pub fn validate(&self) -> Result<(), ResidueError> {
        for eq in &self.equations {
            assert_eq!(eq.exps.len(), self.nvars());
            for (i, &e) in eq.exps.iter().enumerate() {
                if e != 0 && self.zero_flags[i] {
                    return Err(ResidueError::ZeroVariableInEquation);
                }
            }
        }
        Ok(())
    }

    /// Exponent matrix restricted to nonzero variables.
    pub fn exponent_matrix(&self) -> ZMat {
        let idx: Vec<usize> = (0..self.nvars()).filter(|&i| !self.zero_flags[i]).collect();
        let rows: Vec<Vec<i64>> = self
            .equations
            .iter()
            .map(|eq| idx.iter().map(|&i| eq.exps[i]).collect())
            .collect();
        if rows.is_empty() {
            ZMat::new(0, idx.len())
        } else {
            ZMat::from_rows(&rows)
        }
    }

    /// Transformed right-hand sides under the row operations U of the SNF:
    /// c'_i = prod_j c_j^{U[i][j]}.
    fn transformed_constants(&self, u: &ZMat) -> Vec<ConstWord> {
        (0..u.rows)
            .map(|i| ConstWord {
                factors: (0..u.cols)
                    .map(|j| (self.equations[j].rhs.clone(), u[(i, j)] as i64))
                    .collect(),
            })
            .collect()
    }
}

/// Canonical class monomial `L^lpow (L-1)^lm1pow prod rho_g^{e_g}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct ClassTerm {
    pub lpow: u32,
    pub lm1pow: u32,
    pub rho: BTreeMap<u32, u32>,
}

/// Formal nonnegative rational combination of class monomials.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResidueClass {
    pub terms: BTreeMap<ClassTerm, Q>,
}

impl ResidueClass {
    pub fn zero() -> Self {
        ResidueClass::default()
    }

    pub fn one() -> Self {
        ResidueClass::term(ClassTerm::default(), Q::one())
    }

    pub fn term(t: ClassTerm, c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(t, c);
        }
        ResidueClass { terms }
    }

    pub fn l() -> Self {
        ResidueClass::term(
            ClassTerm {
                lpow: 1,
                ..Default::default()
            },
            Q::one(),
        )
    }

    pub fn l_minus_one(n: u32) -> Self {
        ResidueClass::term(
            ClassTerm {
                lm1pow: n,
                ..Default::default()
            },
            Q::one(),
        )
    }

    pub fn rho(g: u32) -> Self {
        if g <= 1 {
            return ResidueClass::one();
        }
        let mut rho = BTreeMap::new();
        rho.insert(g, 1);
        ResidueClass::term(
            ClassTerm {
                rho,
                ..Default::default()
            },
            Q::one(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &ResidueClass) -> ResidueClass {
        let mut terms = self.terms.clone();
        for (t, c) in &other.terms {
            let e = terms.entry(t.clone()).or_insert_with(Q::zero);
            *e += c;
            if e.is_zero() {
                terms.remove(t);
            }
        }
        ResidueClass { terms }
    }

    pub fn mul(&self, other: &ResidueClass) -> ResidueClass {
        let mut out = ResidueClass::zero();
        for (t1, c1) in &self.terms {
            for (t2, c2) in &other.terms {
                let mut rho = t1.rho.clone();
                for (g, e) in &t2.rho {
                    *rho.entry(*g).or_insert(0) += e;
                }
                let t = ClassTerm {
                    lpow: t1.lpow + t2.lpow,
                    lm1pow: t1.lm1pow + t2.lm1pow,
                    rho,
                };
                out = out.add(&ResidueClass::term(t, c1 * c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &Q) -> ResidueClass {
        if c.is_zero() {
            return ResidueClass::zero();
        }
        ResidueClass {
            terms: self.terms.iter().map(|(t, v)| (t.clone(), v * c)).collect(),
        }
    }

    /// Substitute L -> q and rho_g -> gcd(g, q-1).
    pub fn evaluate_q(&self, q: u64) -> Q {
        assert!(q >= 2);
        let mut acc = Q::zero();
        for (t, c) in &self.terms {
            let mut v = c.clone();
            for _ in 0..t.lpow {
                v *= q_int(q as i64);
            }
            for _ in 0..t.lm1pow {
                v *= q_int(q as i64 - 1);
            }
            for (g, e) in &t.rho {
                let r = num_integer::gcd(*g as u64, q - 1) as i64;
                for _ in 0..*e {
                    v *= q_int(r);
                }
            }
            acc += v;
        }
        acc
    }

    /// Resolve to an L-polynomial per mode (AlgebraicallyClosed: rho_g -> g;
    /// FiniteQ: full numeric evaluation). Symbolic mode has no L-form.
    pub fn resolve(&self, mode: ResidueMode) -> Option<LElement> {
        match mode {
            ResidueMode::Symbolic => None,
            ResidueMode::FiniteQ { q } => Some(LElement::from_rational(self.evaluate_q(q))),
            ResidueMode::AlgebraicallyClosed => {
                let mut acc = LElement::zero();
                let lm1 = LElement::l().sub(&LElement::one());
                for (t, c) in &self.terms {
                    let mut v = LElement::from_rational(c.clone());
                    v = v.mul(&LElement::l_pow(t.lpow as i64));
                    for _ in 0..t.lm1pow {
                        v = v.mul(&lm1);
                    }
                    for (g, e) in &t.rho {
                        for _ in 0..*e {
                            v = v.scale(&q_int(*g as i64));
                        }
                    }
                    acc = acc.add(&v);
                }
                Some(acc)
            }
        }
    }
}

impl fmt::Display for ResidueClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (t, c) in &self.terms {
            let mut factors: Vec<String> = Vec::new();
            if !c.is_one() || (t.lpow == 0 && t.lm1pow == 0 && t.rho.is_empty()) {
                factors.push(if c.denom().is_one() {
                    c.numer().to_string()
                } else {
                    format!("{}/{}", c.numer(), c.denom())
                });
            }
            if t.lpow > 0 {
                factors.push(if t.lpow == 1 {
                    "L".into()
                } else {
                    format!("L^{}", t.lpow)
                });
            }
            if t.lm1pow > 0 {
                factors.push(if t.lm1pow == 1 {
                    "(L-1)".into()
                } else {
                    format!("(L-1)^{}", t.lm1pow)
                });
            }
            for (g, e) in &t.rho {
                factors.push(if *e == 1 {
                    format!("rho_{}", g)
                } else {
                    format!("rho_{}^{}", g, e)
                });
            }
            parts.push(factors.join(" "));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Solvability of the transformed system per mode.
fn constants_solvable(
    words: &[ConstWord],
    divisors: &[i128],
    zero_rows: usize,
    mode: ResidueMode,
) -> Result<bool, ResidueError> {
    match mode {
        ResidueMode::AlgebraicallyClosed | ResidueMode::Symbolic => {
            // The multiplicative group is divisible, so diagonal rows are
            // always solvable; zero rows require the constant word to be 1.
            for w in words.iter().skip(divisors.len()).take(zero_rows) {
                if w.is_formally_one() {
                    continue;
                }
                if let Some(name) = w.has_formal() {
                    return Err(ResidueError::UnresolvedConstant(name.to_string()));
                }
                if !word_is_one_generically(w) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        ResidueMode::FiniteQ { q } => {
            let field = FiniteField::new(q)?;
            for (i, w) in words.iter().enumerate() {
                let v = w.resolve(&field)?;
                if i < divisors.len() {
                    // x^d = v solvable in F_q* iff v^((q-1)/gcd(d, q-1)) = 1
                    let d = divisors[i] as u64;
                    let g = num_integer::gcd(d, q - 1);
                    let test = field.pow(v, ((q - 1) / g) as i64);
                    if test != field.one() {
                        return Ok(false);
                    }
                } else if v != field.one() {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Sound check that a concrete constant word is 1 in every residue field:
/// integer parts multiply to 1 exactly and root-of-unity parts cancel
/// formally.
fn word_is_one_generically(w: &ConstWord) -> bool {
    let mut int_num = BigRational::one();
    let mut zeta: BTreeMap<u32, i64> = BTreeMap::new();
    for (c, e) in &w.factors {
        match c {
            UnitConst::One => {}
            UnitConst::Int(k) => {
                let base = q_int(*k);
                for _ in 0..e.unsigned_abs() {
                    if *e > 0 {
                        int_num *= base.clone();
                    } else {
                        int_num /= base.clone();
                    }
                }
            }
            UnitConst::Zeta { order, pow } => {
                let entry = zeta.entry(*order).or_insert(0);
                *entry += *e * *pow as i64;
            }
            UnitConst::Formal(_) => return false,
        }
    }
    int_num.is_one()
        && zeta
            .iter()
            .all(|(order, pow)| pow.rem_euclid(*order as i64) == 0)
}

/// The class of the solution set of a binomial system on its torus stratum.
pub fn class_of(system: &BinomialSystem, mode: ResidueMode) -> Result<ResidueClass, ResidueError> {
    system.validate()?;
    let m = system.exponent_matrix();
    let r = m.cols; // nonzero variables
    if m.rows == 0 {
        return Ok(ResidueClass::l_minus_one(r as u32));
    }
    let snf = smith_normal_form(&m);
    let words = system.transformed_constants(&snf.u);
    let zero_rows = m.rows - snf.rank;
    if !constants_solvable(&words, &snf.divisors, zero_rows, mode)? {
        return Ok(ResidueClass::zero());
    }
    let mut class = ResidueClass::l_minus_one((r - snf.rank) as u32);
    for &d in &snf.divisors {
        if d > 1 {
            class = class.mul(&ResidueClass::rho(d as u32));
        }
    }
    Ok(class)
}

/// Exhaustive point count of the stratum over F_q.
pub fn count_bruteforce(system: &BinomialSystem, q: u64) -> Result<u64, ResidueError> {
    system.validate()?;
    let field = FiniteField::new(q)?;
    let idx: Vec<usize> = (0..system.nvars())
        .filter(|&i| !system.zero_flags[i])
        .collect();
    let rhs: Vec<u32> = system
        .equations
        .iter()
        .map(|eq| eq.rhs.resolve(&field))
        .collect::<Result<_, _>>()?;
    if idx.is_empty() {
        let ok = system
            .equations
            .iter()
            .zip(&rhs)
            .all(|(_, &r)| r == field.one());
        return Ok(if ok { 1 } else { 0 });
    }
    let mut count = 0u64;
    let mut assign = vec![1u32; idx.len()];
    loop {
        let ok = system.equations.iter().zip(&rhs).all(|(eq, &r)| {
            let mut acc = field.one();
            for (pos, &i) in idx.iter().enumerate() {
                if eq.exps[i] != 0 {
                    acc = field.mul(acc, field.pow(assign[pos], eq.exps[i]));
                }
            }
            acc == r
        });
        if ok {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == assign.len() {
                return Ok(count);
            }
            assign[i] += 1;
            if (assign[i] as u64) < q {
                break;
            }
            assign[i] = 1;
            i += 1;
        }
    }
}

impl Serialize for ResidueClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct TermRepr<'a> {
            coefficient: String,
            lpow: u32,
            lm1pow: u32,
            rho: &'a BTreeMap<u32, u32>,
        }
        #[derive(Serialize)]
        struct Repr<'a> {
            terms: Vec<TermRepr<'a>>,
        }
        let terms: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(t, c)| TermRepr {
                coefficient: if c.denom().is_one() {
                    c.numer().to_string()
                } else {
                    format!("{}/{}", c.numer(), c.denom())
                },
                lpow: t.lpow,
                lm1pow: t.lm1pow,
                rho: &t.rho,
            })
            .collect();
        Repr { terms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ResidueClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        #[derive(Deserialize)]
        struct TermRepr {
            coefficient: String,
            lpow: u32,
            lm1pow: u32,
            rho: BTreeMap<u32, u32>,
        }
        #[derive(Deserialize)]
        struct Repr {
            terms: Vec<TermRepr>,
        }
        let repr = Repr::deserialize(d)?;
        let mut out = ResidueClass::zero();
        for t in repr.terms {
            let coeff: Q = match t.coefficient.split_once('/') {
                Some((n, dd)) => Q::new(
                    n.parse().map_err(D::Error::custom)?,
                    dd.parse().map_err(D::Error::custom)?,
                ),
                None => Q::from_integer(t.coefficient.parse().map_err(D::Error::custom)?),
            };
            out = out.add(&ResidueClass::term(
                ClassTerm {
                    lpow: t.lpow,
                    lm1pow: t.lm1pow,
                    rho: t.rho,
                },
                coeff,
            ));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq(exps: Vec<i64>, rhs: UnitConst) -> BinomialEquation {
        BinomialEquation { exps, rhs }
    }

    #[test]
    fn mu2_class() {
        // {xi in Gm : xi^2 = 1} -> rho_2
        let s = BinomialSystem {
            zero_flags: vec![false],
            equations: vec![eq(vec![2], UnitConst::One)],
        };
        let c = class_of(&s, ResidueMode::Symbolic).unwrap();
        assert_eq!(c, ResidueClass::rho(2));
        assert_eq!(count_bruteforce(&s, 7).unwrap(), 2);
        assert_eq!(c.evaluate_q(7), q_int(2));
        assert_eq!(c.evaluate_q(4), q_int(1));
    }

    #[test]
    fn cusp_torus_class() {
        // {(xi, eta) in Gm^2 : eta^2 = xi^3} -> L-1; with the origin: L
        let s = BinomialSystem {
            zero_flags: vec![false, false],
            equations: vec![eq(vec![-3, 2], UnitConst::One)],
        };
        let c = class_of(&s, ResidueMode::Symbolic).unwrap();
        assert_eq!(c, ResidueClass::l_minus_one(1));
        let total = c.add(&ResidueClass::one());
        for q in [3u64, 5, 7, 9] {
            assert_eq!(total.evaluate_q(q), q_int(q as i64));
            assert_eq!(count_bruteforce(&s, q).unwrap() as i64, q as i64 - 1);
        }
    }

    #[test]
    fn product_kernel_class() {
        // {(xi, eta) in Gm^2 : (xi eta)^2 = 1} -> rho_2 (L-1)
        let s = BinomialSystem {
            zero_flags: vec![false, false],
            equations: vec![eq(vec![2, 2], UnitConst::One)],
        };
        let c = class_of(&s, ResidueMode::Symbolic).unwrap();
        assert_eq!(c, ResidueClass::rho(2).mul(&ResidueClass::l_minus_one(1)));
        for q in [5u64, 7, 9] {
            assert_eq!(
                c.evaluate_q(q),
                q_int(count_bruteforce(&s, q).unwrap() as i64)
            );
        }
    }

    #[test]
    fn unsolvable_in_finite_mode() {
        // xi^2 = (primitive 6th root) over F_7: not a square
        let s = BinomialSystem {
            zero_flags: vec![false],
            equations: vec![eq(vec![2], UnitConst::Zeta { order: 6, pow: 1 })],
        };
        let c = class_of(&s, ResidueMode::FiniteQ { q: 7 }).unwrap();
        assert!(c.is_zero());
        assert_eq!(count_bruteforce(&s, 7).unwrap(), 0);
    }

    #[test]
    fn formal_constant_rejected_in_finite_mode() {
        let s = BinomialSystem {
            zero_flags: vec![false],
            equations: vec![eq(vec![2], UnitConst::Formal("a".into()))],
        };
        assert!(matches!(
            class_of(&s, ResidueMode::FiniteQ { q: 5 }),
            Err(ResidueError::UnresolvedConstant(_))
        ));
        // algebraically closed: always solvable
        let c = class_of(&s, ResidueMode::AlgebraicallyClosed).unwrap();
        assert_eq!(c, ResidueClass::rho(2));
    }

    #[test]
    fn empty_system_counts_torus() {
        let s = BinomialSystem::torus(2);
        assert_eq!(count_bruteforce(&s, 3).unwrap(), 4);
        assert_eq!(
            class_of(&s, ResidueMode::Symbolic).unwrap(),
            ResidueClass::l_minus_one(2)
        );
    }

    #[test]
    fn class_json_roundtrip() {
        let c = ResidueClass::rho(2)
            .mul(&ResidueClass::l_minus_one(2))
            .add(&ResidueClass::l())
            .scale(&Q::new(3.into(), 2.into()));
        let s = serde_json::to_string(&c).unwrap();
        let back: ResidueClass = serde_json::from_str(&s).unwrap();
        assert_eq!(c, back);
    }
}

#[cfg(test)]
mod invariance_tests {
    use super::*;

    fn eq(exps: Vec<i64>, rhs: UnitConst) -> BinomialEquation {
        BinomialEquation { exps, rhs }
    }

    #[test]
    fn class_invariant_under_row_ops_and_permutation() {
        // {eta^2 = xi^3} written three ways
        let a = BinomialSystem {
            zero_flags: vec![false, false],
            equations: vec![eq(vec![-3, 2], UnitConst::One)],
        };
        // variables permuted
        let b = BinomialSystem {
            zero_flags: vec![false, false],
            equations: vec![eq(vec![2, -3], UnitConst::One)],
        };
        // a redundant row-combination added
        let c = BinomialSystem {
            zero_flags: vec![false, false],
            equations: vec![
                eq(vec![-3, 2], UnitConst::One),
                eq(vec![-6, 4], UnitConst::One),
            ],
        };
        let ca = class_of(&a, ResidueMode::Symbolic).unwrap();
        assert_eq!(ca, class_of(&b, ResidueMode::Symbolic).unwrap());
        assert_eq!(ca, class_of(&c, ResidueMode::Symbolic).unwrap());
    }

    #[test]
    fn multiplicativity_on_disjoint_variables() {
        let s1 = BinomialSystem {
            zero_flags: vec![false],
            equations: vec![eq(vec![2], UnitConst::One)],
        };
        let s2 = BinomialSystem {
            zero_flags: vec![false, false],
            equations: vec![eq(vec![1, 1], UnitConst::One)],
        };
        let product = BinomialSystem {
            zero_flags: vec![false, false, false],
            equations: vec![
                eq(vec![2, 0, 0], UnitConst::One),
                eq(vec![0, 1, 1], UnitConst::One),
            ],
        };
        let c1 = class_of(&s1, ResidueMode::Symbolic).unwrap();
        let c2 = class_of(&s2, ResidueMode::Symbolic).unwrap();
        let cp = class_of(&product, ResidueMode::Symbolic).unwrap();
        assert_eq!(cp, c1.mul(&c2));
        for q in [3u64, 5, 7, 8, 9] {
            assert_eq!(
                count_bruteforce(&product, q).unwrap(),
                count_bruteforce(&s1, q).unwrap() * count_bruteforce(&s2, q).unwrap()
            );
        }
    }

    #[test]
    fn algebraically_closed_collapse() {
        // rho_g -> g turns every corpus class into an honest polynomial in L
        // lying in the positive cone (point counts of varieties)
        for sys in [
            BinomialSystem {
                zero_flags: vec![false, false],
                equations: vec![eq(vec![2, 2], UnitConst::One)],
            },
            BinomialSystem {
                zero_flags: vec![false, false, false],
                equations: vec![eq(vec![2, -4, 6], UnitConst::One)],
            },
        ] {
            let c = class_of(&sys, ResidueMode::Symbolic).unwrap();
            let l = c.resolve(ResidueMode::AlgebraicallyClosed).unwrap();
            assert!(l.cyclo_factors().is_empty(), "no denominators");
            assert!(l.shift() >= 0, "no negative powers of L");
            assert!(l.is_nonneg(), "lies in the positive cone");
            assert!(l.is_integral(), "integer coefficients");
        }
    }
}
