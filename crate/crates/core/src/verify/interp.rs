use std::collections::BTreeMap;

use crate::dsl::{CmpOp, Comparison, Condition, IfBlock, IfElseProgram, Statement};
use crate::error::{Error, Result};
use crate::ir::{eval_expr, FEAS_TOL};

pub type Env = BTreeMap<String, f64>;

/// Cap on the number of executions [`admissible`] will track.
pub const MAX_RUNS: usize = 4096;

fn lookup<'a>(env: &'a Env, params: &'a Env) -> impl Fn(&str) -> Option<f64> + 'a {
    move |v: &str| env.get(v).or_else(|| params.get(v)).copied()
}

/// Closed comparison relaxed by the feasibility tolerance.
pub fn comparison_holds_tol(c: &Comparison, b: &impl Fn(&str) -> Option<f64>) -> Result<bool> {
    let d: f64 = eval_expr(&c.lhs, b)? - eval_expr(&c.rhs, b)?;
    let slack = FEAS_TOL * (1.0 + d.abs());
    Ok(match c.op {
        CmpOp::Le => d <= slack,
        CmpOp::Ge => -d <= slack,
    })
}

pub fn condition_holds_tol(c: &Condition, b: &impl Fn(&str) -> Option<f64>) -> Result<bool> {
    Ok(match c {
        Condition::Cmp(x) => comparison_holds_tol(x, b)?,
        Condition::And(xs) => {
            for x in xs {
                if !condition_holds_tol(x, b)? {
                    return Ok(false);
                }
            }
            true
        }
        Condition::Or(xs) => {
            for x in xs {
                if condition_holds_tol(x, b)? {
                    return Ok(true);
                }
            }
            false
        }
        Condition::Not(a) => condition_holds_tol(&a.negated(), b)?,
    })
}

fn first_match(b: &IfBlock, env: &Env, params: &Env) -> Result<usize> {
    for (j, br) in b.branches.iter().enumerate() {
        if br.cond.holds(&lookup(env, params))? {
            return Ok(j);
        }
    }
    Ok(b.branches.len())
}

fn body(b: &IfBlock, j: usize) -> &[Statement] {
    match b.branches.get(j) {
        Some(br) => &br.body,
        None => b.else_branch.as_deref().unwrap_or(&[]),
    }
}

fn run(stmts: &[Statement], env: &mut Env, params: &Env, trace: &mut Option<&mut Vec<usize>>) -> Result<()> {
    for s in stmts {
        match s {
            Statement::Assign { target, rhs, .. } => {
                let v = eval_expr(rhs, &lookup(env, params))?;
                env.insert(target.clone(), v);
            }
            Statement::If(b) => {
                let j = first_match(b, env, params)?;
                if let Some(t) = trace.as_deref_mut() {
                    t.push(j);
                }
                run(body(b, j), env, params, &mut None)?;
            }
        }
    }
    Ok(())
}

/// Executes the program: statements in order, the first branch whose closed
/// condition holds, else the else branch. Returns inputs plus every assigned
/// variable.
pub fn interpret(p: &IfElseProgram, inputs: &Env) -> Result<Env> {
    interpret_traced(p, inputs).map(|(env, _)| env)
}

/// As [`interpret`], also returning the branch taken by each top-level block
/// (the branch count stands for the else branch).
pub fn interpret_traced(p: &IfElseProgram, inputs: &Env) -> Result<(Env, Vec<usize>)> {
    let params = p.param_binding();
    let mut env = inputs.clone();
    let mut trace = Vec::new();
    run(&p.statements, &mut env, &params, &mut Some(&mut trace))?;
    Ok((env, trace))
}

/// Indices of branches admissible under the closed-complement reading: branch
/// `j` when its condition holds and every earlier condition's complement holds.
fn admissible_branches(b: &IfBlock, env: &Env, params: &Env) -> Result<Vec<usize>> {
    let bind = lookup(env, params);
    let mut out = Vec::new();
    let mut earlier_fail = true;
    for (j, br) in b.branches.iter().enumerate() {
        if earlier_fail && condition_holds_tol(&br.cond, &bind)? {
            out.push(j);
        }
        earlier_fail &= condition_holds_tol(&br.cond.negated(), &bind)?;
    }
    if earlier_fail {
        out.push(b.branches.len());
    }
    Ok(out)
}

fn runs(stmts: &[Statement], envs: Vec<Env>, params: &Env) -> Result<Vec<Env>> {
    let mut envs = envs;
    for s in stmts {
        let mut next = Vec::new();
        for mut env in envs {
            match s {
                Statement::Assign { target, rhs, .. } => {
                    let v = eval_expr(rhs, &lookup(&env, params))?;
                    env.insert(target.clone(), v);
                    next.push(env);
                }
                Statement::If(b) => {
                    let js = admissible_branches(b, &env, params)?;
                    if js.is_empty() {
                        return Err(Error::NoBranch(0));
                    }
                    for j in js {
                        next.extend(runs(body(b, j), vec![env.clone()], params)?);
                    }
                }
            }
        }
        if next.len() > MAX_RUNS {
            return Err(Error::TooLarge(format!("more than {MAX_RUNS} admissible executions")));
        }
        envs = next;
    }
    Ok(envs)
}

/// Every final binding reachable when any admissible branch may be taken.
/// Away from condition boundaries this is exactly `[interpret(p, inputs)]`.
pub fn admissible(p: &IfElseProgram, inputs: &Env) -> Result<Vec<Env>> {
    runs(&p.statements, vec![inputs.clone()], &p.param_binding())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;

    const Q: &str = "var x in [0, 3]; var p in [0, 6]; var q in [0, 7]; param a = 4;
        p = 2*x; if p <= a then q = p + 1; else q = 0; end";

    fn at(x: f64) -> Env {
        Env::from([("x".to_string(), x)])
    }

    #[test]
    fn first_match_semantics() {
        let p = parse_program(Q).unwrap();
        let r = interpret(&p, &at(1.0)).unwrap();
        assert_eq!((r["p"], r["q"]), (2.0, 3.0));
        let r = interpret(&p, &at(3.0)).unwrap();
        assert_eq!((r["p"], r["q"]), (6.0, 0.0));
    }

    #[test]
    fn boundary_admits_both_branches() {
        let p = parse_program(Q).unwrap();
        let runs = admissible(&p, &at(2.0)).unwrap();
        let qs: Vec<f64> = runs.iter().map(|e| e["q"]).collect();
        assert_eq!(qs, vec![5.0, 0.0]);
        assert_eq!(admissible(&p, &at(1.0)).unwrap().len(), 1);
    }

    #[test]
    fn trace_records_else_as_branch_count() {
        let p = parse_program(Q).unwrap();
        assert_eq!(interpret_traced(&p, &at(3.0)).unwrap().1, vec![1]);
    }
}
