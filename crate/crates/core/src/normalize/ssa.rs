//! Implicit-else insertion and single-assignment renaming.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::dsl::{IfBlock, IfElseProgram, Statement};
use crate::error::{Error, Result};
use crate::ir::{Expr, Origin, Variable};

/// Allocates `v__d<n>` names, skipping any that are already declared.
pub(crate) struct Namer<'a> {
    decls: &'a mut Vec<Variable>,
    counters: HashMap<String, usize>,
}

impl<'a> Namer<'a> {
    pub fn new(decls: &'a mut Vec<Variable>) -> Self {
        Namer { decls, counters: HashMap::new() }
    }

    pub fn fresh(&mut self, base: &str) -> String {
        let n = self.counters.entry(base.to_string()).or_insert(0);
        loop {
            *n += 1;
            let name = format!("{base}__d{n}");
            if !self.decls.iter().any(|v| v.name == name) {
                let (lb, ub) = self
                    .decls
                    .iter()
                    .find(|v| v.name == base)
                    .map(|v| (v.lb, v.ub))
                    .unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
                self.decls.push(Variable::continuous(name.clone(), lb, ub, Origin::Dummy));
                return name;
            }
        }
    }
}

/// Variables read anywhere in the statements (conditions and right-hand sides).
pub(crate) fn reads(stmts: &[Statement]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for s in stmts {
        match s {
            Statement::Assign { rhs, .. } => rhs.visit_vars(&mut |v| {
                out.insert(v.to_string());
            }),
            Statement::If(b) => {
                for br in &b.branches {
                    out.extend(br.cond.reads());
                }
                for body in b.bodies() {
                    out.extend(reads(body));
                }
            }
        }
    }
    out
}

/// Variables written on every path through the statements.
pub(crate) fn definite_writes(stmts: &[Statement]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for s in stmts {
        match s {
            Statement::Assign { target, .. } => {
                out.insert(target.clone());
            }
            Statement::If(b) => {
                if b.else_branch.is_none() {
                    continue;
                }
                let mut acc: Option<BTreeSet<String>> = None;
                for body in b.bodies() {
                    let w = definite_writes(body);
                    acc = Some(match acc {
                        None => w,
                        Some(a) => a.intersection(&w).cloned().collect(),
                    });
                }
                out.extend(acc.unwrap_or_default());
            }
        }
    }
    out
}

fn writes_of(stmts: &[Statement]) -> Vec<String> {
    let mut out = Vec::new();
    crate::dsl::collect_writes(stmts, &mut out);
    out
}

/// Give every if-block an else branch and make each branch assign every variable
/// the block assigns, copying the prior value where a branch is silent.
pub fn insert_implicit_else(p: &IfElseProgram) -> Result<IfElseProgram> {
    let mut out = p.clone();
    let mut touched = BTreeSet::new();
    fill(&mut out.statements, &mut BTreeSet::new(), &BTreeSet::new(), &mut touched)?;
    if !touched.is_empty() {
        rename_ssa(&mut out, Some(&touched));
    }
    Ok(out)
}

fn fill(
    stmts: &mut [Statement],
    defined: &mut BTreeSet<String>,
    later: &BTreeSet<String>,
    touched: &mut BTreeSet<String>,
) -> Result<()> {
    for i in 0..stmts.len() {
        let mut after = later.clone();
        after.extend(reads(&stmts[i + 1..]));
        match &mut stmts[i] {
            Statement::Assign { target, .. } => {
                defined.insert(target.clone());
            }
            Statement::If(b) => {
                fill_block(b, defined, &after, touched)?;
                defined.extend(writes_of(std::slice::from_ref(&stmts[i])));
            }
        }
    }
    Ok(())
}

fn fill_block(
    b: &mut IfBlock,
    defined: &BTreeSet<String>,
    after: &BTreeSet<String>,
    touched: &mut BTreeSet<String>,
) -> Result<()> {
    let n_bodies = b.branches.len() + 1;
    for j in 0..n_bodies {
        let body_later: BTreeSet<String> = after.clone();
        let body = if j < b.branches.len() {
            &mut b.branches[j].body
        } else {
            match b.else_branch.as_mut() {
                Some(e) => e,
                None => continue,
            }
        };
        fill(body, &mut defined.clone(), &body_later, touched)?;
    }
    if b.else_branch.is_none() {
        b.else_branch = Some(Vec::new());
    }
    let written = {
        let mut w = Vec::new();
        for body in b.bodies() {
            for v in writes_of(body) {
                if !w.contains(&v) {
                    w.push(v);
                }
            }
        }
        w
    };
    let cond_reads: BTreeSet<String> = b.branches.iter().flat_map(|br| br.cond.reads()).collect();
    for v in written {
        let definite: Vec<bool> = b.bodies().map(|body| definite_writes(body).contains(&v)).collect();
        if definite.iter().all(|d| *d) {
            continue;
        }
        if defined.contains(&v) {
            for (body, d) in b.bodies_mut().zip(&definite) {
                if !d {
                    body.push(Statement::assign(v.clone(), Expr::var(&v)));
                }
            }
            touched.insert(v);
            continue;
        }
        let writers: Vec<usize> = b
            .bodies()
            .enumerate()
            .filter(|(_, body)| writes_of(body).contains(&v))
            .map(|(j, _)| j)
            .collect();
        let read_elsewhere = cond_reads.contains(&v)
            || after.contains(&v)
            || b.bodies().enumerate().any(|(j, body)| j != writers[0] && reads(body).contains(&v));
        if writers.len() != 1 || read_elsewhere {
            return Err(Error::NoPriorDef(v));
        }
    }
    Ok(())
}

/// Rename so every variable in `only` (all variables when `None`) has a single
/// defining site per scope: the last site keeps the scope's output name and
/// earlier sites get fresh dummies.
pub(crate) fn rename_ssa(p: &mut IfElseProgram, only: Option<&BTreeSet<String>>) {
    let stmts = std::mem::take(&mut p.statements);
    let mut namer = Namer::new(&mut p.decls);
    let mut env = BTreeMap::new();
    p.statements = ssa_body(stmts, &BTreeMap::new(), &mut env, only, &mut namer);
}

fn ssa_body(
    stmts: Vec<Statement>,
    out: &BTreeMap<String, String>,
    env: &mut BTreeMap<String, String>,
    only: Option<&BTreeSet<String>>,
    namer: &mut Namer<'_>,
) -> Vec<Statement> {
    let selected = |v: &str| only.is_none_or(|s| s.contains(v));
    let mut last_site: BTreeMap<String, usize> = BTreeMap::new();
    for (i, s) in stmts.iter().enumerate() {
        for v in s.writes() {
            last_site.insert(v, i);
        }
    }
    let mut res = Vec::with_capacity(stmts.len());
    for (i, s) in stmts.into_iter().enumerate() {
        let site_name = |v: &str, namer: &mut Namer<'_>| -> String {
            if !selected(v) {
                v.to_string()
            } else if last_site.get(v) == Some(&i) {
                out.get(v).cloned().unwrap_or_else(|| v.to_string())
            } else {
                namer.fresh(v)
            }
        };
        match s {
            Statement::Assign { target, rhs, span } => {
                let rhs = rhs.rename(env);
                let name = site_name(&target, namer);
                env.insert(target, name.clone());
                res.push(Statement::Assign { target: name, rhs, span });
            }
            Statement::If(b) => {
                let written = writes_of(&[Statement::If(b.clone())]);
                let names: BTreeMap<String, String> =
                    written.iter().map(|v| (v.clone(), site_name(v, namer))).collect();
                let renamed = |v: &str| env.get(v).cloned();
                let branches = b
                    .branches
                    .into_iter()
                    .map(|br| {
                        let cond = br.cond.rename(&renamed);
                        (cond, br.body, br.span)
                    })
                    .collect::<Vec<_>>();
                let disaggregate = b
                    .disaggregate
                    .iter()
                    .map(|v| names.get(v).or_else(|| env.get(v)).cloned().unwrap_or_else(|| v.clone()))
                    .collect();
                let mut new_branches = Vec::new();
                for (cond, body, span) in branches {
                    let mut local = env.clone();
                    let body = ssa_body(body, &names, &mut local, only, namer);
                    new_branches.push(crate::dsl::Branch { cond, body, span });
                }
                let else_branch = b.else_branch.map(|body| {
                    let mut local = env.clone();
                    ssa_body(body, &names, &mut local, only, namer)
                });
                for (v, n) in &names {
                    env.insert(v.clone(), n.clone());
                }
                res.push(Statement::If(IfBlock { branches: new_branches, else_branch, disaggregate, span: b.span }));
            }
        }
    }
    res
}

/// Rewrite the program into single-assignment form with a dummy chain per variable.
pub fn sequentialize(p: &IfElseProgram) -> IfElseProgram {
    let mut out = p.clone();
    rename_ssa(&mut out, None);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_program, pretty_print};

    fn body_of(src: &str) -> String {
        let text = pretty_print(&parse_program(src).unwrap());
        text.split("\n\n").nth(1).unwrap().to_string()
    }

    #[test]
    fn implicit_else_introduces_dummy() {
        let p = parse_program(
            "var x in [0,1]; var p in [-5,5]; param alpha = 0.5;\n\
             p = x^2; if p <= alpha then p = p + exp(x); end",
        )
        .unwrap();
        let q = insert_implicit_else(&p).unwrap();
        let got = pretty_print(&q);
        let want = body_of(
            "var x in [0,1]; var p in [-5,5]; var p__d1 in [-5,5]; param alpha = 0.5;\n\
             p__d1 = x^2; if p__d1 <= alpha then p = p__d1 + exp(x); else p = p__d1; end",
        );
        assert!(got.ends_with(&want), "{got}");
        assert_eq!(q.decls.last().unwrap().origin, Origin::Dummy);
    }

    #[test]
    fn block_with_else_is_untouched() {
        let p = parse_program(
            "var x in [0,1]; var p in [-5,5]; p = x; if p <= 0.5 then p = 1; else p = 2; end",
        )
        .unwrap();
        assert_eq!(insert_implicit_else(&p).unwrap().statements, p.statements);
    }

    #[test]
    fn missing_prior_definition() {
        let p = parse_program("var x in [0,1]; var p in [-5,5]; if p <= 0.5 then p = 1; end").unwrap();
        assert_eq!(insert_implicit_else(&p).unwrap_err(), Error::NoPriorDef("p".into()));
    }

    #[test]
    fn sequential_chain() {
        let p = parse_program(
            "var x in [0,1]; var r in [0,1]; var p in [0,4];\n\
             param alpha = 0.5; param beta = 2; param gamma = 0.5;\n\
             if r <= alpha then p = 3*x; else p = 4*x; end\n\
             if p >= beta then p = beta; end\n\
             if p <= gamma then p = gamma; end",
        )
        .unwrap();
        let q = sequentialize(&insert_implicit_else(&p).unwrap());
        let text = pretty_print(&q);
        assert!(text.contains("if r <= alpha then\n  p__d1 = 3 * x;\nelse\n  p__d1 = 4 * x;\nend"), "{text}");
        assert!(text.contains("if p__d1 >= beta then\n  p__d2 = beta;\nelse\n  p__d2 = p__d1;\nend"), "{text}");
        assert!(text.contains("if p__d2 <= gamma then\n  p = gamma;\nelse\n  p = p__d2;\nend"), "{text}");
    }

    #[test]
    fn single_block_unchanged_by_sequentialize() {
        let p = parse_program("var x in [0,1]; var p in [0,4]; if x <= 0.5 then p = 1; else p = 2; end").unwrap();
        assert_eq!(sequentialize(&p), p);
    }

    #[test]
    fn branch_local_variable_is_allowed() {
        let p = parse_program(
            "var x in [0,1]; var p1 in [0,1]; var p2 in [0,2]; var T in [0,10];\n\
             if p1 <= 0.5 then p2 = 2*x; if p1 >= p2 then T = 1; else T = 2; end else T = 3; end",
        )
        .unwrap();
        let q = insert_implicit_else(&p).unwrap();
        assert_eq!(q.statements, p.statements.to_vec());
    }
}
