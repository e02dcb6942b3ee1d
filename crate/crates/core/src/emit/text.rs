use std::fmt::Write;

use crate::ir::{fmt_num, Constraint, MinlpModel, Role, VarKind};

/// Infix listing: variables, then one row per line grouped by disjunction,
/// then logic clauses, then global equations.
pub fn emit_algebraic(m: &MinlpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# variables");
    for v in &m.variables {
        let kind = match v.kind {
            VarKind::Binary => "binary".to_string(),
            VarKind::Continuous => format!("in [{}, {}]", fmt_num(v.lb), fmt_num(v.ub)),
        };
        let _ = writeln!(out, "{} {kind}", v.name);
    }
    let role = |c: &Constraint| m.provenance.get(&c.label).map(|p| (p.role, p.disjunction.clone()));
    let mut ids: Vec<String> = Vec::new();
    for c in &m.constraints {
        if let Some((_, Some(k))) = role(c) {
            if !ids.contains(&k) {
                ids.push(k);
            }
        }
    }
    for k in &ids {
        let _ = writeln!(out, "\n# disjunction {k}");
        for c in m.constraints.iter().filter(|c| matches!(role(c), Some((_, Some(d))) if &d == k)) {
            let _ = writeln!(out, "{c}");
        }
    }
    let mut section = |title: &str, keep: &dyn Fn(Option<Role>) -> bool| {
        let rows: Vec<&Constraint> = m.constraints.iter().filter(|c| keep(role(c).map(|r| r.0))).collect();
        if !rows.is_empty() {
            let _ = writeln!(out, "\n# {title}");
            for c in rows {
                let _ = writeln!(out, "{c}");
            }
        }
    };
    section("logic", &|r| r == Some(Role::LogicClause));
    section("globals", &|r| r == Some(Role::Global));
    section("other", &|r| r.is_none());
    out
}
