//! Recursive-descent parser for the set-description language, plus the small
//! standalone grammars used by the `sum` command (Presburger formulas over
//! z1..zk and exponential-polynomial terms).

use super::lexer::{lex, Spanned, Tok};
use super::{
    AcAtom, CellDef, ConstExpr, CoordExpr, DslError, Linear, OrdAtom, OrdExpr, RelOp, SetDef,
    SetFile,
};
use crate::lring::poly::Q;
use crate::lring::LElement;
use crate::presburger::{Integrand, Monomial};

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        (self.toks[self.pos].line, self.toks[self.pos].col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> DslError {
        let (l, c) = self.here();
        DslError::at(l, c, msg)
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), DslError> {
        if self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {}, found {:?}", what, self.peek())))
        }
    }

    fn expect_ident(&mut self) -> Result<String, DslError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.err(format!("expected identifier, found {:?}", other))),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), DslError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            other => Err(self.err(format!("expected {:?}, found {:?}", kw, other))),
        }
    }

    fn expect_int(&mut self) -> Result<i64, DslError> {
        match *self.peek() {
            Tok::Int(v) => {
                self.bump();
                Ok(v)
            }
            ref other => Err(self.err(format!("expected integer, found {:?}", other))),
        }
    }

    /// Signed integer literal (a Minus may precede).
    fn expect_signed_int(&mut self) -> Result<i64, DslError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            Ok(-self.expect_int()?)
        } else {
            self.expect_int()
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }
}

pub fn parse(input: &str) -> Result<SetFile, DslError> {
    let mut p = Parser {
        toks: lex(input)?,
        pos: 0,
    };
    let mut sets = Vec::new();
    while *p.peek() != Tok::Eof {
        sets.push(parse_set(&mut p)?);
    }
    Ok(SetFile { sets })
}

fn parse_set(p: &mut Parser) -> Result<SetDef, DslError> {
    p.expect_keyword("set")?;
    let name = p.expect_ident()?;
    p.expect_keyword("ambient")?;
    let ambient = p.expect_int()? as usize;
    p.expect_keyword("dim")?;
    let dim = p.expect_int()? as usize;
    p.expect(&Tok::LBrace, "'{'")?;
    let mut cells = Vec::new();
    while !matches!(p.peek(), Tok::RBrace) {
        cells.push(parse_cell(p)?);
    }
    p.expect(&Tok::RBrace, "'}'")?;
    Ok(SetDef {
        name,
        ambient,
        dim,
        cells,
    })
}

fn parse_cell(p: &mut Parser) -> Result<CellDef, DslError> {
    p.expect_keyword("cell")?;
    p.expect(&Tok::LBrace, "'{'")?;
    let mut def = CellDef::default();
    loop {
        match p.peek().clone() {
            Tok::RBrace => {
                p.bump();
                break;
            }
            Tok::Ident(kw) if kw == "param" => {
                p.bump();
                loop {
                    def.params.push(p.expect_ident()?);
                    if *p.peek() == Tok::Comma {
                        p.bump();
                    } else {
                        break;
                    }
                }
                p.expect(&Tok::Semi, "';'")?;
            }
            Tok::Ident(kw) if kw == "unit" => {
                p.bump();
                loop {
                    def.units.push(p.expect_ident()?);
                    if *p.peek() == Tok::Comma {
                        p.bump();
                    } else {
                        break;
                    }
                }
                p.expect(&Tok::Semi, "';'")?;
            }
            Tok::Ident(kw) if kw == "ord" => {
                p.bump();
                let expr = parse_ord_expr(p)?;
                def.ord.push(expr);
                p.expect(&Tok::Semi, "';'")?;
            }
            Tok::Ident(kw) if kw == "ac" => {
                p.bump();
                def.ac.push(parse_ac_atom(p)?);
                p.expect(&Tok::Semi, "';'")?;
            }
            Tok::Ident(name) => {
                // coordinate definition xK = expr;
                let (l, c) = p.here();
                let idx = coord_index(&name)
                    .ok_or_else(|| DslError::at(l, c, format!("unknown statement {:?}", name)))?;
                p.bump();
                p.expect(&Tok::Eq, "'='")?;
                let expr = parse_coord_expr(p)?;
                def.coords.push((idx, expr));
                p.expect(&Tok::Semi, "';'")?;
            }
            other => return Err(p.err(format!("unexpected token {:?} in cell", other))),
        }
    }
    Ok(def)
}

fn coord_index(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('x')?;
    let k: usize = rest.parse().ok()?;
    if k >= 1 {
        Some(k - 1)
    } else {
        None
    }
}

// ord expressions: or-of-and with parentheses
fn parse_ord_expr(p: &mut Parser) -> Result<OrdExpr, DslError> {
    let mut lhs = parse_ord_and(p)?;
    while p.at_keyword("or") {
        p.bump();
        let rhs = parse_ord_and(p)?;
        lhs = OrdExpr::Or(Box::new(lhs), Box::new(rhs));
    }
    Ok(lhs)
}

fn parse_ord_and(p: &mut Parser) -> Result<OrdExpr, DslError> {
    let mut lhs = parse_ord_atom_or_group(p)?;
    while p.at_keyword("and") {
        p.bump();
        let rhs = parse_ord_atom_or_group(p)?;
        lhs = OrdExpr::And(Box::new(lhs), Box::new(rhs));
    }
    Ok(lhs)
}

/// Parenthesized subexpression vs parenthesized linear: decided by what
/// follows. We parse a linear first; if a relational operator follows, it was
/// an atom; `(expr)` groups only at the boolean level when the linear parse
/// fails... here: lookahead on '(' followed by a boolean continuation is not
/// needed because a parenthesized linear followed by and/or is ill-formed
/// anyway; we try boolean grouping first by scanning for a relop before the
/// matching ')'.
fn parse_ord_atom_or_group(p: &mut Parser) -> Result<OrdExpr, DslError> {
    if *p.peek() == Tok::LParen && group_is_boolean(p) {
        p.bump();
        let inner = parse_ord_expr(p)?;
        p.expect(&Tok::RParen, "')'")?;
        return Ok(inner);
    }
    Ok(OrdExpr::Atom(parse_ord_atom(p)?))
}

/// Does the parenthesized group starting at the current '(' contain a
/// relational operator before its matching ')'? If so it is a boolean group.
fn group_is_boolean(p: &Parser) -> bool {
    let mut depth = 0usize;
    for s in &p.toks[p.pos..] {
        match s.tok {
            Tok::LParen => depth += 1,
            Tok::RParen => {
                depth -= 1;
                if depth == 0 {
                    return false;
                }
            }
            Tok::Ge | Tok::Le | Tok::Gt | Tok::Lt | Tok::EqEq | Tok::Percent => {
                if depth >= 1 {
                    return true;
                }
            }
            Tok::Eof => return false,
            _ => {}
        }
    }
    false
}

fn parse_ord_atom(p: &mut Parser) -> Result<OrdAtom, DslError> {
    let lhs = parse_linear(p)?;
    match p.peek().clone() {
        Tok::Percent => {
            p.bump();
            let modulus = p.expect_int()?;
            p.expect(&Tok::EqEq, "'=='")?;
            let rem = p.expect_signed_int()?;
            Ok(OrdAtom::Cong(lhs, modulus, rem))
        }
        Tok::Ge => {
            p.bump();
            Ok(OrdAtom::Rel(lhs, RelOp::Ge, parse_linear(p)?))
        }
        Tok::Le => {
            p.bump();
            Ok(OrdAtom::Rel(lhs, RelOp::Le, parse_linear(p)?))
        }
        Tok::Gt => {
            p.bump();
            Ok(OrdAtom::Rel(lhs, RelOp::Gt, parse_linear(p)?))
        }
        Tok::Lt => {
            p.bump();
            Ok(OrdAtom::Rel(lhs, RelOp::Lt, parse_linear(p)?))
        }
        Tok::EqEq => {
            p.bump();
            Ok(OrdAtom::Rel(lhs, RelOp::Eq, parse_linear(p)?))
        }
        other => Err(p.err(format!(
            "expected a relational operator or '%', found {:?}",
            other
        ))),
    }
}

/// linear := term (("+"|"-") term)*
/// term := [INT "*"] varref | INT | "(" linear ")"
/// varref := "ord" "(" IDENT ")" | "ord" IDENT | IDENT
fn parse_linear(p: &mut Parser) -> Result<Linear, DslError> {
    let mut terms = Vec::new();
    parse_linear_into(p, 1, &mut terms)?;
    loop {
        match p.peek() {
            Tok::Plus => {
                p.bump();
                parse_linear_into(p, 1, &mut terms)?;
            }
            Tok::Minus => {
                p.bump();
                parse_linear_into(p, -1, &mut terms)?;
            }
            _ => break,
        }
    }
    Ok(Linear { terms })
}

fn parse_linear_into(
    p: &mut Parser,
    sign: i64,
    terms: &mut Vec<(i64, Option<String>)>,
) -> Result<(), DslError> {
    match p.peek().clone() {
        Tok::Minus => {
            p.bump();
            parse_linear_into(p, -sign, terms)
        }
        Tok::LParen => {
            p.bump();
            let inner = parse_linear(p)?;
            p.expect(&Tok::RParen, "')'")?;
            for (c, v) in inner.terms {
                terms.push((sign * c, v));
            }
            Ok(())
        }
        Tok::Int(v) => {
            p.bump();
            if *p.peek() == Tok::Star {
                p.bump();
                let var = parse_varref(p)?;
                terms.push((sign * v, Some(var)));
            } else {
                terms.push((sign * v, None));
            }
            Ok(())
        }
        Tok::Ident(_) => {
            let var = parse_varref(p)?;
            terms.push((sign, Some(var)));
            Ok(())
        }
        other => Err(p.err(format!("expected a linear term, found {:?}", other))),
    }
}

fn parse_varref(p: &mut Parser) -> Result<String, DslError> {
    let name = p.expect_ident()?;
    if name == "ord" {
        if *p.peek() == Tok::LParen {
            p.bump();
            let inner = p.expect_ident()?;
            p.expect(&Tok::RParen, "')'")?;
            Ok(inner)
        } else {
            p.expect_ident()
        }
    } else {
        Ok(name)
    }
}

fn parse_ac_atom(p: &mut Parser) -> Result<AcAtom, DslError> {
    let mut factors = Vec::new();
    loop {
        p.expect_keyword("ac")?;
        p.expect(&Tok::LParen, "'('")?;
        let name = p.expect_ident()?;
        p.expect(&Tok::RParen, "')'")?;
        let e = if *p.peek() == Tok::Caret {
            p.bump();
            p.expect_signed_int()?
        } else {
            1
        };
        factors.push((name, e));
        if *p.peek() == Tok::Star {
            p.bump();
        } else {
            break;
        }
    }
    p.expect(&Tok::EqEq, "'=='")?;
    let rhs = parse_const_expr(p)?;
    Ok(AcAtom { factors, rhs })
}

fn parse_const_expr(p: &mut Parser) -> Result<ConstExpr, DslError> {
    match p.peek().clone() {
        Tok::Int(_) | Tok::Minus => Ok(ConstExpr::Int(p.expect_signed_int()?)),
        Tok::Ident(name) if name == "zeta" => {
            p.bump();
            p.expect(&Tok::LParen, "'('")?;
            let order = p.expect_int()? as u32;
            let pow = if *p.peek() == Tok::Comma {
                p.bump();
                p.expect_int()? as u32
            } else {
                1
            };
            p.expect(&Tok::RParen, "')'")?;
            Ok(ConstExpr::Zeta { order, pow })
        }
        Tok::Ident(name) => {
            p.bump();
            Ok(ConstExpr::Unit(name))
        }
        other => Err(p.err(format!("expected a unit constant, found {:?}", other))),
    }
}

/// `0` | factor ("*" factor)* with factors t^a, integer constants, declared
/// units, zeta(...), and param^e.
fn parse_coord_expr(p: &mut Parser) -> Result<Option<CoordExpr>, DslError> {
    if *p.peek() == Tok::Int(0) {
        p.bump();
        return Ok(None);
    }
    let mut expr = CoordExpr::default();
    loop {
        match p.peek().clone() {
            Tok::Int(_) | Tok::Minus => {
                let v = p.expect_signed_int()?;
                merge_constant(p, &mut expr, ConstExpr::Int(v))?;
            }
            Tok::Ident(name) if name == "t" => {
                p.bump();
                let e = parse_exponent(p)?;
                expr.t_pow += e;
            }
            Tok::Ident(name) if name == "zeta" => {
                let c = parse_const_expr(p)?;
                merge_constant(p, &mut expr, c)?;
            }
            Tok::Ident(name) => {
                p.bump();
                let e = parse_exponent(p)?;
                expr.factors.push((name, e));
            }
            other => return Err(p.err(format!("expected a coordinate factor, found {:?}", other))),
        }
        if *p.peek() == Tok::Star {
            p.bump();
        } else {
            break;
        }
    }
    Ok(Some(expr))
}

fn merge_constant(p: &Parser, expr: &mut CoordExpr, c: ConstExpr) -> Result<(), DslError> {
    match (&mut expr.constant, c) {
        (slot @ None, c) => {
            *slot = Some(c);
            Ok(())
        }
        (Some(ConstExpr::Int(a)), ConstExpr::Int(b)) => {
            *a *= b;
            Ok(())
        }
        _ => Err(p.err("at most one non-integer unit factor per coordinate")),
    }
}

fn parse_exponent(p: &mut Parser) -> Result<i64, DslError> {
    if *p.peek() != Tok::Caret {
        return Ok(1);
    }
    p.bump();
    match p.peek().clone() {
        Tok::Int(_) | Tok::Minus => p.expect_signed_int(),
        Tok::LParen => {
            p.bump();
            let v = p.expect_signed_int()?;
            if *p.peek() != Tok::RParen {
                return Err(p.err("exponents must be integers"));
            }
            p.bump();
            Ok(v)
        }
        other => Err(p.err(format!("expected an integer exponent, found {:?}", other))),
    }
}

/// Standalone Presburger formula over named value-group variables, used by
/// the `sum` command: variables are referenced directly or as `ord(name)`.
pub fn parse_ord_formula(input: &str, vars: &[String]) -> Result<crate::presburger::PresburgerSet, DslError> {
    let mut p = Parser {
        toks: lex(input)?,
        pos: 0,
    };
    let expr = parse_ord_expr(&mut p)?;
    if *p.peek() != Tok::Eof {
        return Err(p.err("trailing input after formula"));
    }
    let dnf = super::ord_dnf(&expr);
    let mut set = crate::presburger::PresburgerSet::empty(vars.len());
    for conj in dnf {
        let mut atoms = Vec::new();
        for a in conj {
            atoms.extend(super::ord_atom_to_atoms(&a, vars)?);
        }
        set.disjuncts.push(atoms);
    }
    Ok(set)
}

/// Term syntax for the `sum` command:
/// `[p[/q]] ("*" factor)*` with factors `zK^a` and `L^(linear)`.
pub fn parse_sum_term(input: &str, vars: &[String]) -> Result<Integrand, DslError> {
    let mut p = Parser {
        toks: lex(input)?,
        pos: 0,
    };
    let mut coeff_num: i64 = 1;
    let coeff_den: i64 = 1;
    let mut powers = vec![0u32; vars.len()];
    let mut lexps = vec![0i64; vars.len()];
    let mut lconst: i64 = 0;
    let mut first = true;
    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Star => {
                p.bump();
                continue;
            }
            Tok::Int(_) | Tok::Minus if first => {
                coeff_num = p.expect_signed_int()?;
            }
            Tok::Ident(name) if name == "L" => {
                p.bump();
                p.expect(&Tok::Caret, "'^'")?;
                // L^k or L^(linear)
                if *p.peek() == Tok::LParen {
                    p.bump();
                    let lin = parse_linear(&mut p)?;
                    p.expect(&Tok::RParen, "')'")?;
                    for (c, v) in lin.terms {
                        match v {
                            None => lconst += c,
                            Some(name) => {
                                let idx = vars
                                    .iter()
                                    .position(|x| *x == name)
                                    .ok_or_else(|| DslError::Unresolved(name.clone()))?;
                                lexps[idx] += c;
                            }
                        }
                    }
                } else {
                    lconst += p.expect_signed_int()?;
                }
            }
            Tok::Ident(name) => {
                p.bump();
                let idx = vars
                    .iter()
                    .position(|x| *x == name)
                    .ok_or_else(|| DslError::Unresolved(name.clone()))?;
                let e = parse_exponent(&mut p)?;
                if e < 0 {
                    return Err(p.err("negative polynomial powers are not allowed"));
                }
                powers[idx] += e as u32;
            }
            other => return Err(p.err(format!("unexpected token {:?} in term", other))),
        }
        first = false;
    }
    let coeff = LElement::from_rational(Q::new(coeff_num.into(), coeff_den.into()))
        .mul(&LElement::l_pow(lconst));
    Ok(Integrand {
        terms: vec![Monomial {
            coeff,
            powers,
            lexps,
        }],
    })
}
