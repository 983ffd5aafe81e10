//! Pretty-printer for set descriptions; `parse(print_file(f)) == f`.

use super::{AcAtom, CellDef, ConstExpr, CoordExpr, Linear, OrdAtom, OrdExpr, RelOp, SetDef, SetFile};

pub fn print_file(file: &SetFile) -> String {
    let mut out = String::new();
    for set in &file.sets {
        print_set(set, &mut out);
        out.push('\n');
    }
    out
}

fn print_set(set: &SetDef, out: &mut String) {
    out.push_str(&format!(
        "set {} ambient {} dim {} {{\n",
        set.name, set.ambient, set.dim
    ));
    for cell in &set.cells {
        print_cell(cell, out);
    }
    out.push_str("}\n");
}

fn print_cell(cell: &CellDef, out: &mut String) {
    out.push_str("  cell {\n");
    if !cell.params.is_empty() {
        out.push_str(&format!("    param {};\n", cell.params.join(", ")));
    }
    if !cell.units.is_empty() {
        out.push_str(&format!("    unit {};\n", cell.units.join(", ")));
    }
    for expr in &cell.ord {
        out.push_str(&format!("    ord {};\n", print_ord(expr, false)));
    }
    for atom in &cell.ac {
        out.push_str(&format!("    ac {};\n", print_ac(atom)));
    }
    for (idx, expr) in &cell.coords {
        let rhs = match expr {
            None => "0".to_string(),
            Some(e) => print_coord(e),
        };
        out.push_str(&format!("    x{} = {};\n", idx + 1, rhs));
    }
    out.push_str("  }\n");
}

fn print_ord(expr: &OrdExpr, parenthesize_or: bool) -> String {
    match expr {
        OrdExpr::Atom(a) => print_ord_atom(a),
        OrdExpr::And(l, r) => format!(
            "{} and {}",
            print_ord(l, true),
            print_ord(r, true)
        ),
        OrdExpr::Or(l, r) => {
            let s = format!("{} or {}", print_ord(l, false), print_ord(r, false));
            if parenthesize_or {
                format!("({})", s)
            } else {
                s
            }
        }
    }
}

fn print_ord_atom(atom: &OrdAtom) -> String {
    match atom {
        OrdAtom::Rel(l, op, r) => {
            let op = match op {
                RelOp::Ge => ">=",
                RelOp::Le => "<=",
                RelOp::Gt => ">",
                RelOp::Lt => "<",
                RelOp::Eq => "==",
            };
            format!("{} {} {}", print_linear(l), op, print_linear(r))
        }
        OrdAtom::Cong(l, m, r) => {
            // the linear operand of % needs protection when it has several
            // terms; the grammar accepts a parenthesized linear there
            let lhs = if l.terms.len() > 1 {
                format!("({})", print_linear(l))
            } else {
                print_linear(l)
            };
            format!("{} % {} == {}", lhs, m, r)
        }
    }
}

fn print_linear(lin: &Linear) -> String {
    if lin.terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (c, var)) in lin.terms.iter().enumerate() {
        let (sign, mag) = if *c < 0 { ("-", -c) } else { ("+", *c) };
        if i == 0 {
            if sign == "-" {
                out.push_str("-");
            }
        } else {
            out.push_str(&format!(" {} ", sign));
        }
        match var {
            None => out.push_str(&mag.to_string()),
            Some(name) => {
                if mag == 1 {
                    out.push_str(&format!("ord({})", name));
                } else {
                    out.push_str(&format!("{}*ord({})", mag, name));
                }
            }
        }
    }
    out
}

fn print_ac(atom: &AcAtom) -> String {
    let factors: Vec<String> = atom
        .factors
        .iter()
        .map(|(name, e)| {
            if *e == 1 {
                format!("ac({})", name)
            } else {
                format!("ac({})^{}", name, e)
            }
        })
        .collect();
    format!("{} == {}", factors.join(" * "), print_const(&atom.rhs))
}

fn print_const(c: &ConstExpr) -> String {
    match c {
        ConstExpr::Int(k) => k.to_string(),
        ConstExpr::Unit(name) => name.clone(),
        ConstExpr::Zeta { order, pow } => {
            if *pow == 1 {
                format!("zeta({})", order)
            } else {
                format!("zeta({}, {})", order, pow)
            }
        }
    }
}

fn print_coord(e: &CoordExpr) -> String {
    let mut factors: Vec<String> = Vec::new();
    if e.t_pow != 0 {
        factors.push(if e.t_pow == 1 {
            "t".to_string()
        } else {
            format!("t^{}", e.t_pow)
        });
    }
    if let Some(c) = &e.constant {
        factors.push(print_const(c));
    }
    for (name, pw) in &e.factors {
        factors.push(if *pw == 1 {
            name.clone()
        } else {
            format!("{}^{}", name, pw)
        });
    }
    if factors.is_empty() {
        "1".to_string()
    } else {
        factors.join(" * ")
    }
}
