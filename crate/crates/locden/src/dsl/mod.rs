//! The textual set-description language: lexer, recursive-descent parser,
//! pretty-printer, and elaboration into definable sets.
//!
//! ```text
//! set cusp ambient 2 dim 1 {
//!   cell {
//!     param u;
//!     ord u >= 0;
//!     x1 = u^3;
//!     x2 = u^2;
//!   }
//! }
//! ```

mod lexer;
mod parser;
mod printer;

pub use parser::{parse, parse_ord_formula, parse_sum_term};
pub use printer::print_file;

use thiserror::Error;

use crate::geometry::{Coord, DefinableSet, GeometryError, MonomialCell, ScalarConstant};
use crate::presburger::{Affine, Atom, PresburgerSet};
use crate::residue::{BinomialEquation, BinomialSystem, UnitConst};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DslError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unresolved identifier {0:?}")]
    Unresolved(String),
    #[error("{0}")]
    Semantic(String),
}

impl DslError {
    pub(crate) fn at(line: usize, col: usize, msg: impl Into<String>) -> Self {
        DslError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }
}

/// Parsed file: a list of named set descriptions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetFile {
    pub sets: Vec<SetDef>,
}

impl SetFile {
    pub fn find(&self, name: Option<&str>) -> Result<&SetDef, DslError> {
        match name {
            Some(n) => self
                .sets
                .iter()
                .find(|s| s.name == n)
                .ok_or_else(|| DslError::Unresolved(n.to_string())),
            None => self
                .sets
                .first()
                .ok_or_else(|| DslError::Semantic("empty description file".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetDef {
    pub name: String,
    pub ambient: usize,
    pub dim: usize,
    pub cells: Vec<CellDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CellDef {
    pub params: Vec<String>,
    pub units: Vec<String>,
    pub ord: Vec<OrdExpr>,
    pub ac: Vec<AcAtom>,
    /// coordinate index -> expression (None encodes `= 0`)
    pub coords: Vec<(usize, Option<CoordExpr>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrdExpr {
    Or(Box<OrdExpr>, Box<OrdExpr>),
    And(Box<OrdExpr>, Box<OrdExpr>),
    Atom(OrdAtom),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Linear {
    /// (coefficient, variable); variable None is the constant term
    pub terms: Vec<(i64, Option<String>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelOp {
    Ge,
    Le,
    Eq,
    Gt,
    Lt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrdAtom {
    Rel(Linear, RelOp, Linear),
    /// linear % modulus == rem
    Cong(Linear, i64, i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcAtom {
    /// product of ac(param)^e
    pub factors: Vec<(String, i64)>,
    pub rhs: ConstExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstExpr {
    Int(i64),
    Unit(String),
    Zeta { order: u32, pow: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoordExpr {
    pub t_pow: i64,
    pub constant: Option<ConstExpr>,
    /// param^e factors, in order of appearance
    pub factors: Vec<(String, i64)>,
}

fn const_to_unit(c: &ConstExpr) -> UnitConst {
    match c {
        ConstExpr::Int(1) => UnitConst::One,
        ConstExpr::Int(k) => UnitConst::Int(*k),
        ConstExpr::Unit(name) => UnitConst::Formal(name.clone()),
        ConstExpr::Zeta { order, pow } => UnitConst::Zeta {
            order: *order,
            pow: *pow,
        },
    }
}

/// Convert an ord-expression tree into disjunctive normal form over atoms.
fn ord_dnf(expr: &OrdExpr) -> Vec<Vec<OrdAtom>> {
    match expr {
        OrdExpr::Atom(a) => vec![vec![a.clone()]],
        OrdExpr::Or(a, b) => {
            let mut out = ord_dnf(a);
            out.extend(ord_dnf(b));
            out
        }
        OrdExpr::And(a, b) => {
            let left = ord_dnf(a);
            let right = ord_dnf(b);
            let mut out = Vec::new();
            for l in &left {
                for r in &right {
                    let mut conj = l.clone();
                    conj.extend(r.iter().cloned());
                    out.push(conj);
                }
            }
            out
        }
    }
}

fn linear_to_affine(lin: &Linear, params: &[String]) -> Result<Affine, DslError> {
    let mut coeffs = vec![0i64; params.len()];
    let mut constant = 0i64;
    for (c, var) in &lin.terms {
        match var {
            None => constant += c,
            Some(name) => {
                let idx = params
                    .iter()
                    .position(|p| p == name)
                    .ok_or_else(|| DslError::Unresolved(name.clone()))?;
                coeffs[idx] += c;
            }
        }
    }
    Ok(Affine { coeffs, constant })
}

fn ord_atom_to_atoms(atom: &OrdAtom, params: &[String]) -> Result<Vec<Atom>, DslError> {
    match atom {
        OrdAtom::Rel(lhs, op, rhs) => {
            let l = linear_to_affine(lhs, params)?;
            let r = linear_to_affine(rhs, params)?;
            let diff = l.sub(&r);
            Ok(match op {
                RelOp::Ge => vec![Atom::Ge(diff)],
                RelOp::Le => vec![Atom::Ge(diff.neg())],
                RelOp::Gt => vec![Atom::Ge(diff.plus_const(-1))],
                RelOp::Lt => vec![Atom::Ge(diff.neg().plus_const(-1))],
                RelOp::Eq => vec![Atom::Ge(diff.clone()), Atom::Ge(diff.neg())],
            })
        }
        OrdAtom::Cong(lhs, modulus, rem) => {
            if *modulus < 1 {
                return Err(DslError::Semantic(format!(
                    "congruence modulus must be positive, got {}",
                    modulus
                )));
            }
            let form = linear_to_affine(lhs, params)?;
            Ok(vec![Atom::Cong {
                form,
                rem: *rem,
                modulus: *modulus,
            }])
        }
    }
}

/// Elaborate one cell definition.
fn elaborate_cell(def: &CellDef, ambient: usize) -> Result<MonomialCell, DslError> {
    let params = def.params.clone();
    let d = params.len();
    let mut theta = PresburgerSet::everything(d);
    for expr in &def.ord {
        let mut stmt_set = PresburgerSet::empty(d);
        for conj in ord_dnf(expr) {
            let mut atoms = Vec::new();
            for a in conj {
                atoms.extend(ord_atom_to_atoms(&a, &params)?);
            }
            stmt_set.disjuncts.push(atoms);
        }
        theta = theta.intersect(&stmt_set);
    }
    let mut equations = Vec::new();
    for ac in &def.ac {
        let mut exps = vec![0i64; d];
        for (name, e) in &ac.factors {
            let idx = params
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| DslError::Unresolved(name.clone()))?;
            exps[idx] += e;
        }
        equations.push(BinomialEquation {
            exps,
            rhs: const_to_unit(&ac.rhs),
        });
    }
    let angular = BinomialSystem {
        zero_flags: vec![false; d],
        equations,
    };
    let mut coords: Vec<Option<Coord>> = vec![None; ambient];
    for (idx, expr) in &def.coords {
        if *idx >= ambient {
            return Err(DslError::Semantic(format!(
                "coordinate x{} exceeds ambient dimension {}",
                idx + 1,
                ambient
            )));
        }
        if coords[*idx].is_some() {
            return Err(DslError::Semantic(format!(
                "coordinate x{} defined twice",
                idx + 1
            )));
        }
        coords[*idx] = Some(match expr {
            None => Coord::Zero,
            Some(e) => {
                let mut exps = vec![0i64; d];
                for (name, pw) in &e.factors {
                    let i = params
                        .iter()
                        .position(|p| p == name)
                        .ok_or_else(|| DslError::Unresolved(name.clone()))?;
                    exps[i] += pw;
                }
                let ac = match &e.constant {
                    None => UnitConst::One,
                    Some(c) => const_to_unit(c),
                };
                Coord::Monomial {
                    gamma: ScalarConstant { ord: e.t_pow, ac },
                    exps,
                }
            }
        });
    }
    let coords: Vec<Coord> = coords
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            c.ok_or_else(|| DslError::Semantic(format!("coordinate x{} is not defined", i + 1)))
        })
        .collect::<Result<_, _>>()?;
    Ok(MonomialCell::new(ambient, d, coords, theta, angular))
}

/// Elaborate and validate a named set definition.
pub fn elaborate(def: &SetDef) -> Result<DefinableSet, DslError> {
    let cells = def
        .cells
        .iter()
        .map(|c| elaborate_cell(c, def.ambient))
        .collect::<Result<Vec<_>, _>>()?;
    let set = DefinableSet::new(def.ambient, cells)
        .validate()
        .map_err(|e: GeometryError| DslError::Semantic(e.to_string()))?;
    if set.dim() != def.dim {
        return Err(DslError::Semantic(format!(
            "declared dim {} but cells have dimension {}",
            def.dim,
            set.dim()
        )));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::local_density;
    use crate::geometry::measure::MeasureMode;
    use crate::lring::poly::Q;
    use crate::lring::LElement;

    const CUSP: &str =
        "set cusp ambient 2 dim 1 { cell { param u; ord u >= 0; x1 = u^3; x2 = u^2; } }";

    #[test]
    fn parse_and_elaborate_cusp() {
        let file = parse(CUSP).unwrap();
        let def = file.find(Some("cusp")).unwrap();
        let set = elaborate(def).unwrap();
        assert_eq!(set.ambient, 2);
        assert_eq!(set.dim(), 1);
        let r = local_density(&set, MeasureMode::motivic()).unwrap();
        assert_eq!(r.value, LElement::from_rational(Q::new(1.into(), 2.into())));
    }

    #[test]
    fn empty_file() {
        let file = parse("").unwrap();
        assert!(file.sets.is_empty());
    }

    #[test]
    fn rejects_fractional_exponent() {
        let bad = "set s ambient 1 dim 1 { cell { param u; x1 = u^(1/2); } }";
        let err = parse(bad).unwrap_err();
        assert!(matches!(err, DslError::Syntax { .. }), "{:?}", err);
    }

    #[test]
    fn roundtrip_printing() {
        let src = r#"
set demo ambient 2 dim 1 {
  cell {
    param u;
    unit a;
    ord 2*ord(u) - 3 >= 0 and ord(u) % 2 == 1;
    ac ac(u)^2 == a;
    x1 = t^2 * 3 * u^-1;
    x2 = 0;
  }
}
set other ambient 1 dim 1 {
  cell { param v; ord v >= 0 or v <= -4; x1 = v; }
}
"#;
        let file = parse(src).unwrap();
        let printed = print_file(&file);
        let reparsed = parse(&printed).unwrap();
        assert_eq!(file, reparsed, "printed:\n{}", printed);
    }

    #[test]
    fn congruence_and_disjunction_semantics() {
        let src = "set s ambient 1 dim 1 { cell { param u; ord (ord(u) + 1) % 3 == 0 and ord(u) >= -2; x1 = u; } }";
        let set = elaborate(parse(src).unwrap().find(None).unwrap()).unwrap();
        let theta = &set.cells[0].theta;
        for v in -8i64..12 {
            let expect = (v + 1).rem_euclid(3) == 0 && v >= -2;
            assert_eq!(theta.contains(&[v]), expect, "v={}", v);
        }
    }

    #[test]
    fn location_in_errors() {
        let err = parse("set s ambient 2 dim 1 {\n  cell { param u; x1 = ; } }").unwrap_err();
        match err {
            DslError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {:?}", other),
        }
    }
}
