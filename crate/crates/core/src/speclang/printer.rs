use std::fmt::Write;

use super::expr::{BoolOp, Expr};
use super::{Owner, Section, SpecDocument, VarDecl};

// Binding strength, loosest first.
const IFF: u8 = 1;
const IMPLIES: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const NOT: u8 = 5;
const CMP: u8 = 6;
const ARITH: u8 = 7;
const ATOM: u8 = 8;

/// Canonical text form. All section headers are always present.
pub fn print_spec(doc: &SpecDocument) -> String {
    let mut out = String::new();
    for section in Section::ALL {
        let _ = writeln!(out, "[{}]", section.header());
        match section {
            Section::EnvVars | Section::SysVars => {
                let owner = if section == Section::EnvVars { Owner::Env } else { Owner::Sys };
                for v in doc.vars.iter().filter(|v| v.owner == owner) {
                    let _ = writeln!(out, "{} : {}", v.name, v.domain);
                }
            }
            _ => {
                let clauses = match section {
                    Section::EnvInit => &doc.env_init,
                    Section::SysInit => &doc.sys_init,
                    Section::EnvTrans => &doc.env_safety,
                    Section::SysTrans => &doc.sys_safety,
                    Section::EnvLiveness => &doc.env_liveness,
                    _ => &doc.sys_liveness,
                };
                for c in clauses {
                    let _ = writeln!(out, "{}", print_expr(c, &doc.vars));
                }
            }
        }
        out.push('\n');
    }
    out
}

pub fn print_expr(e: &Expr, vars: &[VarDecl]) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, vars, 0);
    out
}

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Bool(_) | Expr::Int(_) | Expr::Var { .. } => ATOM,
        Expr::Not(_) => NOT,
        Expr::Bin(BoolOp::Iff, ..) => IFF,
        Expr::Bin(BoolOp::Implies, ..) => IMPLIES,
        Expr::Bin(BoolOp::Or, ..) => OR,
        Expr::Bin(BoolOp::And, ..) => AND,
        Expr::Cmp(..) => CMP,
        Expr::Arith(..) => ARITH,
    }
}

fn write_expr(out: &mut String, e: &Expr, vars: &[VarDecl], min: u8) {
    let paren = level(e) < min;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Var { id, next } => {
            match vars.get(*id) {
                Some(v) => out.push_str(&v.name),
                None => {
                    let _ = write!(out, "v{id}");
                }
            }
            if *next {
                out.push('\'');
            }
        }
        Expr::Not(inner) => {
            out.push('!');
            write_expr(out, inner, vars, NOT);
        }
        Expr::Bin(op, a, b) => {
            let (lmin, rmin) = match op {
                BoolOp::Iff => (IFF, IFF + 1),
                BoolOp::Implies => (IMPLIES + 1, IMPLIES),
                BoolOp::Or => (OR, OR + 1),
                BoolOp::And => (AND, AND + 1),
            };
            write_expr(out, a, vars, lmin);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, b, vars, rmin);
        }
        Expr::Cmp(op, a, b) => {
            write_expr(out, a, vars, ARITH);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, b, vars, ARITH);
        }
        Expr::Arith(op, a, b) => {
            write_expr(out, a, vars, ARITH);
            out.push_str(match op {
                super::ArithOp::Add => " + ",
                super::ArithOp::Sub => " - ",
            });
            write_expr(out, b, vars, ATOM);
        }
    }
    if paren {
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_spec;
    use super::*;

    #[test]
    fn empty_document_prints_all_headers() {
        let text = print_spec(&SpecDocument::default());
        for s in Section::ALL {
            assert!(text.contains(&format!("[{}]\n", s.header())));
        }
        assert_eq!(text.lines().filter(|l| !l.is_empty()).count(), 8);
    }

    #[test]
    fn parentheses_only_where_needed() {
        let doc = parse_spec(
            "[SYS_VARS]\na : bool\nb : bool\nx : 0..9\n[SYS_TRANS]\n((a & b)) | (a -> b)\n(a -> b) -> a\n!(x = 1 | a)\nx' = x - (1 - 1)\n",
        )
        .unwrap();
        let printed: Vec<String> = doc.sys_safety.iter().map(|e| doc.show(e)).collect();
        assert_eq!(
            printed,
            ["a & b | (a -> b)", "(a -> b) -> a", "!(x = 1 | a)", "x' = x - (1 - 1)"]
        );
        assert_eq!(parse_spec(&print_spec(&doc)).unwrap(), doc);
    }
}
