use std::collections::{BTreeMap, BTreeSet};

use crate::ir::{interval_bounds, Expr, Interval};

use super::ast::*;
use super::diag::{DiagCode, Diagnostic, Severity};

/// Static checks on a parsed program. Never fails; problems come back as diagnostics.
pub fn validate(p: &IfElseProgram) -> Vec<Diagnostic> {
    let mut v = Validator {
        prog: p,
        out: p.warnings.clone(),
        dependent: p.dependent().into_iter().collect(),
        unbounded_seen: BTreeSet::new(),
        pending: BTreeMap::new(),
    };
    let mut assigned = BTreeSet::new();
    v.block(&p.statements, &mut assigned, 0);
    v.out
}

struct Validator<'a> {
    prog: &'a IfElseProgram,
    out: Vec<Diagnostic>,
    dependent: BTreeSet<String>,
    unbounded_seen: BTreeSet<String>,
    /// Top-level assignments not yet read, for dead-store detection.
    pending: BTreeMap<String, Span>,
}

impl Validator<'_> {
    fn read(&mut self, e: &Expr, assigned: &BTreeSet<String>, span: Span, depth: usize) {
        for name in e.vars() {
            if self.prog.param(&name).is_some() {
                continue;
            }
            self.pending.remove(&name);
            if depth > 0 {
                self.touch_in_block(&name, span);
            }
            if self.dependent.contains(&name) && !assigned.contains(&name) {
                let msg = format!("`{name}` is read before it is assigned");
                self.out.push(Diagnostic::new(DiagCode::ReadBeforeAssign, Severity::Error, &name, msg, span));
            }
        }
    }

    fn touch_in_block(&mut self, name: &str, span: Span) {
        let Some(d) = self.prog.decl(name) else { return };
        if !d.is_bounded() && self.unbounded_seen.insert(name.to_string()) {
            let msg = format!("`{name}` has no finite bounds but is used inside a conditional block");
            self.out.push(Diagnostic::new(DiagCode::Unbounded, Severity::Warning, name, msg, span));
        }
    }

    fn block(&mut self, stmts: &[Statement], assigned: &mut BTreeSet<String>, depth: usize) {
        for s in stmts {
            match s {
                Statement::Assign { target, rhs, span } => {
                    self.read(rhs, assigned, *span, depth);
                    if depth == 0 {
                        if let Some(prev) = self.pending.insert(target.clone(), *span) {
                            let msg = format!("value assigned to `{target}` is overwritten before it is read");
                            self.out.push(Diagnostic::new(DiagCode::DeadAssign, Severity::Warning, target, msg, prev));
                        }
                    } else {
                        self.pending.remove(target);
                        self.touch_in_block(target, *span);
                    }
                    assigned.insert(target.clone());
                }
                Statement::If(b) => {
                    for br in &b.branches {
                        br.cond.visit_exprs(&mut |e| {
                            let e = e.clone();
                            self.read(&e, assigned, br.span, depth + 1);
                        });
                    }
                    self.unreachable(b);
                    let mut after = assigned.clone();
                    for body in b.bodies() {
                        let mut local = assigned.clone();
                        self.block(body, &mut local, depth + 1);
                        after.extend(local);
                    }
                    *assigned = after;
                }
            }
        }
    }

    fn always(&self, c: &Condition) -> bool {
        match c {
            Condition::Cmp(x) => {
                let dom: BTreeMap<String, Interval<f64>> = self
                    .prog
                    .decls
                    .iter()
                    .map(|v| (v.name.clone(), Interval::new(v.lb, v.ub)))
                    .chain(self.prog.params.iter().map(|(n, v)| (n.clone(), Interval::point(*v))))
                    .collect();
                let diff = Expr::sub(x.lhs.clone(), x.rhs.clone());
                match interval_bounds(&diff, &dom) {
                    Ok(r) => match x.op {
                        CmpOp::Le => r.hi <= 0.0,
                        CmpOp::Ge => r.lo >= 0.0,
                    },
                    Err(_) => false,
                }
            }
            Condition::And(xs) => xs.iter().all(|x| self.always(x)),
            Condition::Or(xs) => xs.iter().any(|x| self.always(x)),
            Condition::Not(a) => self.always(&a.negated()),
        }
    }

    fn unreachable(&mut self, b: &IfBlock) {
        let Some(j) = b.branches.iter().position(|br| self.always(&br.cond)) else { return };
        let (what, span) = match b.branches.get(j + 1) {
            Some(br) => (format!("branch {}", j + 2), br.span),
            None if b.else_branch.is_some() => ("else branch".to_string(), b.span),
            None => return,
        };
        let msg = format!("{what} can never run because branch {} always applies", j + 1);
        self.out.push(Diagnostic::new(DiagCode::Unreachable, Severity::Warning, &what, msg, span));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;

    fn codes(src: &str) -> Vec<DiagCode> {
        validate(&parse_program(src).unwrap()).into_iter().map(|d| d.code).collect()
    }

    #[test]
    fn bounded_example_is_clean() {
        let src = "var x in [0,1]; var E in [5,15]; var PC in [0,200];\n\
                   param r = 10; param alpha = 10; param beta = 8;\n\
                   E = r*x + 5;\n\
                   if E >= alpha then PC = 100 + E - alpha; else if E <= beta then PC = 100 - (beta - E); else PC = 100; end";
        assert!(codes(src).is_empty());
    }

    #[test]
    fn unbounded_in_block() {
        let d = validate(&parse_program("var x in [0,1]; var E; E = 2*x; if E >= 1 then x = 1; else x = 0; end").unwrap());
        assert!(d.iter().any(|d| d.code == DiagCode::Unbounded && d.subject == "E"));
        assert!(d.iter().any(|d| d.to_string().contains("D_UNBOUNDED(E)")));
    }

    #[test]
    fn dead_assignment() {
        assert_eq!(codes("var x in [0,1]; var y in [0,5]; y = x; y = 2*x;"), vec![DiagCode::DeadAssign]);
        assert!(codes("var x in [0,1]; var y in [0,5]; var z in [0,5]; y = x; z = y; y = 2*x;").is_empty());
    }

    #[test]
    fn read_before_assign() {
        assert_eq!(
            codes("var x in [0,1]; var y in [0,5]; var z in [0,5]; z = y; y = x;"),
            vec![DiagCode::ReadBeforeAssign]
        );
    }

    #[test]
    fn unreachable_else() {
        let c = codes("var x in [0,1]; var y in [0,5]; if x <= 2 then y = 1; else y = 2; end");
        assert_eq!(c, vec![DiagCode::Unreachable]);
    }
}
