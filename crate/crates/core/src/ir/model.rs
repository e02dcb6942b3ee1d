//! Variables, constraints, and the disjunctive / MINLP model containers.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::eval::{eval_expr, Binding};
use super::expr::Expr;
use super::logic::LogicProp;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Continuous,
    Binary,
}

/// Why a variable exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    User,
    Dummy,
    DisaggregatedTrue,
    DisaggregatedFalse,
    HatCopy,
    Indicator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lb: f64,
    pub ub: f64,
    pub kind: VarKind,
    pub origin: Origin,
}

impl Variable {
    pub fn continuous(name: impl Into<String>, lb: f64, ub: f64, origin: Origin) -> Self {
        Variable { name: name.into(), lb, ub, kind: VarKind::Continuous, origin }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Variable { name: name.into(), lb: 0.0, ub: 1.0, kind: VarKind::Binary, origin: Origin::Indicator }
    }

    pub fn is_bounded(&self) -> bool {
        self.lb.is_finite() && self.ub.is_finite()
    }
}

/// Comparison against zero. `Range(lo, hi)` is the two-sided row `lo <= body <= hi`.
#[derive(Debug, Clone, PartialEq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
    Range(Expr, Expr),
}

impl Relation {
    pub fn symbol(&self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Range(..) => "<=",
        }
    }
}

/// `body REL 0`, or `lo <= body <= hi` for range rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub label: String,
    pub body: Expr,
    pub relation: Relation,
}

/// Relative tolerance used for every feasibility check.
pub const FEAS_TOL: f64 = 1e-9;

impl Constraint {
    pub fn new(label: impl Into<String>, body: Expr, relation: Relation) -> Self {
        Constraint { label: label.into(), body, relation }
    }

    /// Amount by which the row is violated at a point (0 when satisfied exactly).
    pub fn violation(&self, b: &impl Binding<f64>) -> Result<f64> {
        let v = eval_expr(&self.body, b)?;
        Ok(match &self.relation {
            Relation::Le => v.max(0.0),
            Relation::Ge => (-v).max(0.0),
            Relation::Eq => v.abs(),
            Relation::Range(lo, hi) => {
                let (lo, hi) = (eval_expr(lo, b)?, eval_expr(hi, b)?);
                (lo - v).max(v - hi).max(0.0)
            }
        })
    }

    /// Satisfied within `FEAS_TOL * (1 + |value|)`.
    pub fn holds(&self, b: &impl Binding<f64>) -> Result<bool> {
        let v: f64 = eval_expr(&self.body, b)?;
        Ok(self.violation(b)? <= FEAS_TOL * (1.0 + v.abs()))
    }

    /// Closed-set check without tolerance, used by the interpreter.
    pub fn holds_exactly(&self, b: &impl Binding<f64>) -> Result<bool> {
        Ok(self.violation(b)? == 0.0)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.relation {
            Relation::Range(lo, hi) => write!(f, "{lo} <= {} <= {hi}", self.body),
            rel => match &self.body {
                Expr::Sub(a, b) => write!(f, "{a} {} {b}", rel.symbol()),
                body => write!(f, "{body} {} 0", rel.symbol()),
            },
        }
    }
}

/// Moves everything to the left: `lhs - rhs REL 0`. `>=` stays `>=`.
pub fn normalize_constraint(
    label: impl Into<String>,
    lhs: Expr,
    relation: Relation,
    rhs: Expr,
) -> Constraint {
    Constraint::new(label, Expr::sub(lhs, rhs), relation)
}

/// Closed complement of an inequality: `<=` and `>=` swap, body untouched.
pub fn negate_comparison(c: &Constraint) -> Result<Constraint> {
    let relation = match c.relation {
        Relation::Le => Relation::Ge,
        Relation::Ge => Relation::Le,
        _ => return Err(Error::NegateEq(c.to_string())),
    };
    Ok(Constraint { label: c.label.clone(), body: c.body.clone(), relation })
}

/// `target = rhs`, the defining equation of a dependent variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub label: String,
    pub target: String,
    pub rhs: Expr,
}

impl Assignment {
    pub fn constraint(&self) -> Constraint {
        normalize_constraint(self.label.clone(), Expr::var(&self.target), Relation::Eq, self.rhs.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisjunctTerm {
    /// Boolean indicator (`Y_*` or `Z_*`).
    pub bool_var: String,
    /// Testing comparisons that hold when the term is selected.
    pub conditions: Vec<Constraint>,
    /// Assignments made by the branch, as equalities.
    pub assignments: Vec<Assignment>,
}

impl DisjunctTerm {
    /// Conditions first, then assignment equalities.
    pub fn constraints(&self) -> Vec<Constraint> {
        self.conditions
            .iter()
            .cloned()
            .chain(self.assignments.iter().map(Assignment::constraint))
            .collect()
    }
}

/// Where a disjunction came from in the normalized program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DisjunctionOrigin {
    /// Branches of the `block`-th top-level if-block.
    Block { block: usize, fused: bool },
    /// One atomic testing condition of a block with compound conditions.
    Atom { block: usize, atom: usize },
    /// A disjunction-of-atoms condition handled as a single disjunction.
    AtomGroup { block: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Disjunction {
    pub id: String,
    pub terms: Vec<DisjunctTerm>,
    /// Exactly one term is selected (otherwise at least one).
    pub exactly_one: bool,
    pub origin: DisjunctionOrigin,
}

/// Evaluation order of globals and disjunctions, following the program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleItem {
    Global(usize),
    Disjunction(usize),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GdpModel {
    pub variables: Vec<Variable>,
    pub globals: Vec<Assignment>,
    pub disjunctions: Vec<Disjunction>,
    pub props: Vec<LogicProp>,
    pub disagg_sets: BTreeMap<String, Vec<String>>,
    pub schedule: Vec<ScheduleItem>,
}

impl GdpModel {
    pub fn global_constraints(&self) -> Vec<Constraint> {
        self.globals.iter().map(Assignment::constraint).collect()
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn disjunction(&self, id: &str) -> Option<&Disjunction> {
        self.disjunctions.iter().find(|d| d.id == id)
    }

    pub fn disagg(&self, id: &str) -> &[String] {
        self.disagg_sets.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Boolean indicator names across all disjunctions, in order.
    pub fn booleans(&self) -> Vec<String> {
        self.disjunctions
            .iter()
            .flat_map(|d| d.terms.iter().map(|t| t.bool_var.clone()))
            .collect()
    }

    /// Structural checks: unique names, bounded disaggregation sets, non-empty
    /// disjunctions, distinct indicators.
    pub fn check(&self) -> Result<()> {
        let mut names = std::collections::BTreeSet::new();
        for v in &self.variables {
            if !names.insert(v.name.as_str()) {
                return Err(Error::Invalid(format!("variable `{}` declared twice", v.name)));
            }
            if v.lb > v.ub {
                return Err(Error::Invalid(format!("variable `{}` has lb > ub", v.name)));
            }
        }
        let mut bools = std::collections::BTreeSet::new();
        for d in &self.disjunctions {
            if d.terms.is_empty() {
                return Err(Error::EmptyDisjunction(d.id.clone()));
            }
            for t in &d.terms {
                if !bools.insert(t.bool_var.as_str()) {
                    return Err(Error::Invalid(format!("indicator `{}` reused", t.bool_var)));
                }
            }
            for v in self.disagg(&d.id) {
                match self.variable(v) {
                    Some(var) if var.is_bounded() => {}
                    _ => return Err(Error::UnboundedDisagg(v.clone())),
                }
            }
        }
        Ok(())
    }
}

/// Role of a generated row within its disjunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Global,
    LogicClause,
    ExactlyOne,
    HatDef,
    BoxTrue,
    BoxFalse,
    Box,
    Link,
    Term,
    BigM,
}

/// Source of a MINLP row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disjunction: Option<String>,
    /// 1-based term index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
    /// Label of the GDP constraint (or proposition index) the row derives from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl Provenance {
    pub fn new(role: Role) -> Self {
        Provenance { role, disjunction: None, term: None, var: None, source: None }
    }

    pub fn in_disjunction(mut self, id: &str) -> Self {
        self.disjunction = Some(id.to_string());
        self
    }

    pub fn term(mut self, j: usize) -> Self {
        self.term = Some(j);
        self
    }

    pub fn var(mut self, v: &str) -> Self {
        self.var = Some(v.to_string());
        self
    }

    pub fn source(mut self, s: &str) -> Self {
        self.source = Some(s.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MinlpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub exactly_one_groups: Vec<Vec<String>>,
    pub provenance: BTreeMap<String, Provenance>,
}

impl MinlpModel {
    pub fn push_var(&mut self, v: Variable) {
        self.variables.push(v);
    }

    pub fn push_row(&mut self, c: Constraint, p: Provenance) {
        self.provenance.insert(c.label.clone(), p);
        self.constraints.push(c);
    }

    /// Canonical ordering: variables by name, rows by label, groups by first member.
    pub fn canonicalize(&mut self) {
        self.variables.sort_by(|a, b| a.name.cmp(&b.name));
        self.constraints.sort_by(|a, b| a.label.cmp(&b.label));
        self.exactly_one_groups.sort();
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn count_origin(&self, o: Origin) -> usize {
        self.variables.iter().filter(|v| v.origin == o).count()
    }

    pub fn count_role(&self, r: Role) -> usize {
        self.provenance.values().filter(|p| p.role == r).count()
    }
}
