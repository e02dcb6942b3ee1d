use std::fmt::Write;

use crate::ir::fmt_num;

use super::ast::*;

fn bound(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        fmt_num(v)
    }
}

/// Render a condition; `level` is 0 under `or`, 1 under `and`, 2 under `not`.
fn cond_str(c: &Condition, level: u8) -> String {
    let (s, own) = match c {
        Condition::Cmp(x) => return x.to_string(),
        Condition::Or(xs) => (xs.iter().map(|x| cond_str(x, 1)).collect::<Vec<_>>().join(" or "), 0),
        Condition::And(xs) => (xs.iter().map(|x| cond_str(x, 2)).collect::<Vec<_>>().join(" and "), 1),
        Condition::Not(a) => (format!("not {}", cond_str(a, 3)), 2),
    };
    if own < level {
        format!("({s})")
    } else {
        s
    }
}

pub fn condition_to_string(c: &Condition) -> String {
    cond_str(c, 0)
}

fn stmts(out: &mut String, body: &[Statement], indent: usize) {
    for s in body {
        stmt(out, s, indent);
    }
}

fn stmt(out: &mut String, s: &Statement, indent: usize) {
    let pad = "  ".repeat(indent);
    match s {
        Statement::Assign { target, rhs, .. } => {
            let _ = writeln!(out, "{pad}{target} = {rhs};");
        }
        Statement::If(b) => {
            for (j, br) in b.branches.iter().enumerate() {
                let kw = if j == 0 { "if" } else { "else if" };
                let _ = writeln!(out, "{pad}{kw} {} then", condition_to_string(&br.cond));
                if j == 0 && !b.disaggregate.is_empty() {
                    let _ = writeln!(out, "{pad}  disaggregate {};", b.disaggregate.join(", "));
                }
                stmts(out, &br.body, indent + 1);
            }
            if let Some(e) = &b.else_branch {
                let _ = writeln!(out, "{pad}else");
                stmts(out, e, indent + 1);
            }
            let _ = writeln!(out, "{pad}end");
        }
    }
}

/// Canonical source text: declarations, then parameters, then statements.
pub fn pretty_print(p: &IfElseProgram) -> String {
    let mut out = String::new();
    for v in &p.decls {
        if v.lb.is_infinite() && v.ub.is_infinite() {
            let _ = writeln!(out, "var {};", v.name);
        } else {
            let _ = writeln!(out, "var {} in [{}, {}];", v.name, bound(v.lb), bound(v.ub));
        }
    }
    for (n, v) in &p.params {
        let _ = writeln!(out, "param {n} = {};", fmt_num(*v));
    }
    if !p.decls.is_empty() || !p.params.is_empty() {
        out.push('\n');
    }
    stmts(&mut out, &p.statements, 0);
    out
}
