//! Source-level program: declarations, parameters, assignments and if-blocks.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::ir::{eval_expr, normalize_constraint, Binding, Constraint, Expr, Relation, Variable};

use super::diag::Diagnostic;

/// Source position. Positions never take part in equality, so programs that
/// differ only in layout compare equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Le,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }

    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Ge => CmpOp::Le,
        }
    }

    pub fn relation(self) -> Relation {
        match self {
            CmpOp::Le => Relation::Le,
            CmpOp::Ge => Relation::Ge,
        }
    }
}

/// Atomic comparison `lhs OP rhs` with closed semantics.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
}

impl Comparison {
    /// Closed complement: `<=` becomes `>=` over the same sides.
    pub fn negated(&self) -> Comparison {
        Comparison { lhs: self.lhs.clone(), op: self.op.flip(), rhs: self.rhs.clone() }
    }

    pub fn to_constraint(&self, label: impl Into<String>) -> Constraint {
        normalize_constraint(label, self.lhs.clone(), self.op.relation(), self.rhs.clone())
    }

    pub fn holds(&self, b: &impl Binding<f64>) -> Result<bool> {
        let (l, r): (f64, f64) = (eval_expr(&self.lhs, b)?, eval_expr(&self.rhs, b)?);
        Ok(match self.op {
            CmpOp::Le => l <= r,
            CmpOp::Ge => l >= r,
        })
    }

    pub fn rename(&self, f: &impl Fn(&str) -> Option<String>) -> Comparison {
        Comparison { lhs: self.lhs.rename_with(f), op: self.op, rhs: self.rhs.rename_with(f) }
    }
}

impl std::fmt::Display for Comparison {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

/// Boolean combination of comparisons.
#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    Cmp(Comparison),
    And(Vec<Condition>),
    Or(Vec<Condition>),
    Not(Box<Condition>),
}

impl Condition {
    pub fn cmp(lhs: Expr, op: CmpOp, rhs: Expr) -> Condition {
        Condition::Cmp(Comparison { lhs, op, rhs })
    }

    /// Negation normal form; `not` is pushed onto the comparisons as closed complements.
    pub fn nnf(&self) -> Condition {
        match self {
            Condition::Cmp(c) => Condition::Cmp(c.clone()),
            Condition::And(xs) => Condition::And(xs.iter().map(Condition::nnf).collect()),
            Condition::Or(xs) => Condition::Or(xs.iter().map(Condition::nnf).collect()),
            Condition::Not(a) => a.negated(),
        }
    }

    /// Closed negation in negation normal form.
    pub fn negated(&self) -> Condition {
        match self {
            Condition::Cmp(c) => Condition::Cmp(c.negated()),
            Condition::And(xs) => Condition::Or(xs.iter().map(Condition::negated).collect()),
            Condition::Or(xs) => Condition::And(xs.iter().map(Condition::negated).collect()),
            Condition::Not(a) => a.nnf(),
        }
    }

    /// Atomic comparisons of the NNF form, left to right.
    pub fn atoms(&self) -> Vec<Comparison> {
        fn go(c: &Condition, out: &mut Vec<Comparison>) {
            match c {
                Condition::Cmp(x) => out.push(x.clone()),
                Condition::And(xs) | Condition::Or(xs) => xs.iter().for_each(|x| go(x, out)),
                Condition::Not(_) => unreachable!("nnf has no negations"),
            }
        }
        let mut out = Vec::new();
        go(&self.nnf(), &mut out);
        out
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.nnf(), Condition::Cmp(_))
    }

    /// Closed evaluation: boundary points satisfy both a comparison and its negation.
    pub fn holds(&self, b: &impl Binding<f64>) -> Result<bool> {
        Ok(match self {
            Condition::Cmp(c) => c.holds(b)?,
            Condition::And(xs) => {
                for x in xs {
                    if !x.holds(b)? {
                        return Ok(false);
                    }
                }
                true
            }
            Condition::Or(xs) => {
                for x in xs {
                    if x.holds(b)? {
                        return Ok(true);
                    }
                }
                false
            }
            Condition::Not(a) => a.negated().holds(b)?,
        })
    }

    pub fn visit_exprs(&self, f: &mut impl FnMut(&Expr)) {
        match self {
            Condition::Cmp(c) => {
                f(&c.lhs);
                f(&c.rhs);
            }
            Condition::And(xs) | Condition::Or(xs) => xs.iter().for_each(|x| x.visit_exprs(f)),
            Condition::Not(a) => a.visit_exprs(f),
        }
    }

    pub fn rename(&self, f: &impl Fn(&str) -> Option<String>) -> Condition {
        match self {
            Condition::Cmp(c) => Condition::Cmp(c.rename(f)),
            Condition::And(xs) => Condition::And(xs.iter().map(|x| x.rename(f)).collect()),
            Condition::Or(xs) => Condition::Or(xs.iter().map(|x| x.rename(f)).collect()),
            Condition::Not(a) => Condition::Not(Box::new(a.rename(f))),
        }
    }

    pub fn reads(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_exprs(&mut |e| e.visit_vars(&mut |v| {
            out.insert(v.to_string());
        }));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub cond: Condition,
    pub body: Vec<Statement>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IfBlock {
    pub branches: Vec<Branch>,
    pub else_branch: Option<Vec<Statement>>,
    /// Variables the user forces into this block's disaggregation set.
    pub disaggregate: Vec<String>,
    pub span: Span,
}

impl IfBlock {
    /// All bodies in order, the else body last.
    pub fn bodies(&self) -> impl Iterator<Item = &Vec<Statement>> {
        self.branches.iter().map(|b| &b.body).chain(self.else_branch.iter())
    }

    pub fn bodies_mut(&mut self) -> impl Iterator<Item = &mut Vec<Statement>> {
        self.branches.iter_mut().map(|b| &mut b.body).chain(self.else_branch.iter_mut())
    }

    pub fn has_nested(&self) -> bool {
        self.bodies().any(|b| b.iter().any(|s| matches!(s, Statement::If(_))))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Assign { target: String, rhs: Expr, span: Span },
    If(IfBlock),
}

impl Statement {
    pub fn assign(target: impl Into<String>, rhs: Expr) -> Statement {
        Statement::Assign { target: target.into(), rhs, span: Span::default() }
    }

    /// Variables written anywhere in the statement, first-write order.
    pub fn writes(&self) -> Vec<String> {
        let mut out = Vec::new();
        collect_writes(std::slice::from_ref(self), &mut out);
        out
    }
}

pub fn collect_writes(stmts: &[Statement], out: &mut Vec<String>) {
    for s in stmts {
        match s {
            Statement::Assign { target, .. } => {
                if !out.contains(target) {
                    out.push(target.clone());
                }
            }
            Statement::If(b) => b.bodies().for_each(|body| collect_writes(body, out)),
        }
    }
}

/// Parsed program. Parameters stay symbolic until lowering.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IfElseProgram {
    pub decls: Vec<Variable>,
    pub params: Vec<(String, f64)>,
    pub statements: Vec<Statement>,
    /// Parser warnings (strict comparisons coerced to closed ones).
    pub warnings: Vec<Diagnostic>,
}

impl IfElseProgram {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn decl(&self, name: &str) -> Option<&Variable> {
        self.decls.iter().find(|v| v.name == name)
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.decl(name).is_some() || self.param(name).is_some()
    }

    /// Variables assigned somewhere (dependent variables).
    pub fn dependent(&self) -> Vec<String> {
        let mut out = Vec::new();
        collect_writes(&self.statements, &mut out);
        out
    }

    /// Declared variables never assigned: the model inputs.
    pub fn inputs(&self) -> Vec<String> {
        let dep: BTreeSet<String> = self.dependent().into_iter().collect();
        self.decls.iter().filter(|v| !dep.contains(&v.name)).map(|v| v.name.clone()).collect()
    }

    /// Number of if-blocks, counting nested ones.
    pub fn block_count(&self) -> usize {
        fn go(stmts: &[Statement]) -> usize {
            stmts
                .iter()
                .map(|s| match s {
                    Statement::Assign { .. } => 0,
                    Statement::If(b) => 1 + b.bodies().map(|x| go(x)).sum::<usize>(),
                })
                .sum()
        }
        go(&self.statements)
    }

    /// Maximum if-nesting depth (0 for straight-line code).
    pub fn depth(&self) -> usize {
        fn go(stmts: &[Statement]) -> usize {
            stmts
                .iter()
                .map(|s| match s {
                    Statement::Assign { .. } => 0,
                    Statement::If(b) => 1 + b.bodies().map(|x| go(x)).max().unwrap_or(0),
                })
                .max()
                .unwrap_or(0)
        }
        go(&self.statements)
    }

    /// Binding of parameter names to their values.
    pub fn param_binding(&self) -> std::collections::BTreeMap<String, f64> {
        self.params.iter().cloned().collect()
    }
}
