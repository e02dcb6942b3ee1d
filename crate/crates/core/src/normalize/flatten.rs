use std::collections::BTreeMap;

use crate::dsl::{IfBlock, IfElseProgram, Statement};

use super::ssa::{definite_writes, Namer};

/// Hoist nested blocks (and any branch-local statements around them) in front
/// of their parent block. Each hoisted branch's final write of a block result
/// goes to a fresh dummy, and the branch itself becomes a copy of that dummy.
pub fn flatten_nested(p: &IfElseProgram) -> IfElseProgram {
    let mut out = p.clone();
    let stmts = std::mem::take(&mut out.statements);
    let mut namer = Namer::new(&mut out.decls);
    out.statements = flatten_stmts(stmts, &mut namer);
    out
}

fn flatten_stmts(stmts: Vec<Statement>, namer: &mut Namer<'_>) -> Vec<Statement> {
    let mut out = Vec::new();
    for s in stmts {
        match s {
            Statement::Assign { .. } => out.push(s),
            Statement::If(mut b) => {
                for body in b.bodies_mut() {
                    *body = flatten_stmts(std::mem::take(body), namer);
                }
                let results = block_results(&b);
                for body in b.bodies_mut() {
                    let needs = body.iter().any(|s| match s {
                        Statement::If(_) => true,
                        Statement::Assign { target, .. } => !results.contains(target),
                    });
                    if needs {
                        let (hoisted, copies) = hoist(std::mem::take(body), &results, namer);
                        out.extend(hoisted);
                        *body = copies;
                    }
                }
                out.push(Statement::If(b));
            }
        }
    }
    out
}

/// Variables every branch of the block assigns, in first-write order.
fn block_results(b: &IfBlock) -> Vec<String> {
    let mut order = Vec::new();
    for body in b.bodies() {
        crate::dsl::collect_writes(body, &mut order);
    }
    order.retain(|v| b.bodies().all(|body| definite_writes(body).contains(v)));
    order
}

fn hoist(
    body: Vec<Statement>,
    results: &[String],
    namer: &mut Namer<'_>,
) -> (Vec<Statement>, Vec<Statement>) {
    let mut last = BTreeMap::new();
    for (i, s) in body.iter().enumerate() {
        for v in s.writes() {
            if results.contains(&v) {
                last.insert(v, i);
            }
        }
    }
    let mut rename: BTreeMap<String, String> = BTreeMap::new();
    let mut hoisted = Vec::new();
    for (i, s) in body.into_iter().enumerate() {
        let finals: BTreeMap<String, String> = last
            .iter()
            .filter(|(_, &at)| at == i)
            .map(|(v, _)| (v.clone(), namer.fresh(v)))
            .collect();
        let s = rename_reads(s, &rename);
        hoisted.push(rename_targets(s, &finals));
        rename.extend(finals);
    }
    let copies = results
        .iter()
        .map(|v| Statement::assign(v.clone(), crate::ir::Expr::var(&rename[v])))
        .collect();
    (hoisted, copies)
}

fn rename_reads(s: Statement, map: &BTreeMap<String, String>) -> Statement {
    if map.is_empty() {
        return s;
    }
    let f = |v: &str| map.get(v).cloned();
    match s {
        Statement::Assign { target, rhs, span } => Statement::Assign { target, rhs: rhs.rename_with(&f), span },
        Statement::If(mut b) => {
            for br in &mut b.branches {
                br.cond = br.cond.rename(&f);
                br.body = br.body.drain(..).map(|x| rename_reads(x, map)).collect();
            }
            if let Some(e) = b.else_branch.as_mut() {
                *e = e.drain(..).map(|x| rename_reads(x, map)).collect();
            }
            Statement::If(b)
        }
    }
}

fn rename_targets(s: Statement, map: &BTreeMap<String, String>) -> Statement {
    match s {
        Statement::Assign { target, rhs, span } => {
            let target = map.get(&target).cloned().unwrap_or(target);
            Statement::Assign { target, rhs, span }
        }
        Statement::If(mut b) => {
            for body in b.bodies_mut() {
                *body = body.drain(..).map(|x| rename_targets(x, map)).collect();
            }
            b.disaggregate = b.disaggregate.iter().map(|v| map.get(v).cloned().unwrap_or(v.clone())).collect();
            Statement::If(b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_program, pretty_print};
    use crate::normalize::{insert_implicit_else, sequentialize};

    fn run(src: &str) -> String {
        let p = parse_program(src).unwrap();
        let p = sequentialize(&insert_implicit_else(&p).unwrap());
        let text = pretty_print(&flatten_nested(&p));
        text.split("\n\n").nth(1).unwrap().to_string()
    }

    #[test]
    fn nested_t_example() {
        let got = run(
            "var x in [0,1]; var p1 in [0,1]; var p2 in [0,2]; var T in [0,10]; param alpha = 0.5; param kappa = 0.3;\n\
             if p1 <= alpha then\n  p2 = 2*x;\n  if p1 >= kappa*p2 then T = exp(x); else T = x + 1; end\n\
             else T = 3*x; end",
        );
        let want = "p2 = 2 * x;\n\
                    if p1 >= kappa * p2 then\n  T__d1 = exp(x);\nelse\n  T__d1 = x + 1;\nend\n\
                    if p1 <= alpha then\n  T = T__d1;\nelse\n  T = 3 * x;\nend\n";
        assert_eq!(got, want);
    }

    #[test]
    fn flat_program_unchanged() {
        let p = parse_program("var x in [0,1]; var p in [0,4]; if x <= 0.5 then p = 1; else p = 2; end").unwrap();
        assert_eq!(flatten_nested(&p), p);
    }

    #[test]
    fn depth_three_uses_two_layers() {
        let got = run(
            "var x in [0,1]; var T in [0,10];\n\
             if x <= 0.8 then\n  if x <= 0.5 then\n    if x <= 0.2 then T = 1; else T = 2; end\n  else T = 3; end\n\
             else T = 4; end",
        );
        assert!(got.contains("T__d1 = 1;"), "{got}");
        assert!(got.contains("T__d2 = T__d1;"), "{got}");
        assert!(got.contains("T = T__d2;"), "{got}");
        assert_eq!(got.matches("if ").count(), 3);
    }
}
