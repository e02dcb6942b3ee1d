//! Conjunctive normal form and clause linearization.

use std::fmt;

use crate::error::{Error, Result};
use crate::ir::{normalize_constraint, Constraint, Expr, LogicProp, Relation};

pub const MAX_CLAUSES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub var: String,
    pub positive: bool,
}

impl Literal {
    pub fn pos(v: &str) -> Literal {
        Literal { var: v.to_string(), positive: true }
    }

    pub fn neg(v: &str) -> Literal {
        Literal { var: v.to_string(), positive: false }
    }

    fn negated(&self) -> Literal {
        Literal { var: self.var.clone(), positive: !self.positive }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.var)
        } else {
            write!(f, "~{}", self.var)
        }
    }
}

/// Disjunction of literals, without duplicates, in first-occurrence order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause(pub Vec<Literal>);

impl Clause {
    fn from_lits(lits: impl IntoIterator<Item = Literal>) -> Option<Clause> {
        let mut out: Vec<Literal> = Vec::new();
        for l in lits {
            if out.contains(&l.negated()) {
                return None;
            }
            if !out.contains(&l) {
                out.push(l);
            }
        }
        Some(Clause(out))
    }

    fn subsumes(&self, other: &Clause) -> bool {
        self.0.iter().all(|l| other.0.contains(l))
    }

    pub fn positives(&self) -> impl Iterator<Item = &str> {
        self.0.iter().filter(|l| l.positive).map(|l| l.var.as_str())
    }

    pub fn negatives(&self) -> impl Iterator<Item = &str> {
        self.0.iter().filter(|l| !l.positive).map(|l| l.var.as_str())
    }

    pub fn eval(&self, val: &impl Fn(&str) -> bool) -> bool {
        self.0.iter().any(|l| val(&l.var) == l.positive)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(Literal::to_string).collect();
        write!(f, "{}", parts.join(" | "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClauseSet {
    pub clauses: Vec<Clause>,
}

impl ClauseSet {
    /// Add a clause unless it is subsumed; drop existing clauses it subsumes.
    pub fn push(&mut self, c: Clause) {
        if self.clauses.iter().any(|x| x.subsumes(&c)) {
            return;
        }
        self.clauses.retain(|x| !c.subsumes(x));
        self.clauses.push(c);
    }

    pub fn extend(&mut self, other: ClauseSet) {
        for c in other.clauses {
            self.push(c);
        }
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn eval(&self, val: &impl Fn(&str) -> bool) -> bool {
        self.clauses.iter().all(|c| c.eval(val))
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for l in self.clauses.iter().flat_map(|c| &c.0) {
            if !out.contains(&l.var) {
                out.push(l.var.clone());
            }
        }
        out
    }
}

/// Formula in negation normal form: literals under and/or only.
enum Nnf {
    Lit(Literal),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

fn nnf(p: &LogicProp, positive: bool) -> Nnf {
    match p {
        LogicProp::Var(v) => Nnf::Lit(Literal { var: v.clone(), positive }),
        LogicProp::Not(a) => nnf(a, !positive),
        LogicProp::And(xs) if positive => Nnf::And(xs.iter().map(|x| nnf(x, true)).collect()),
        LogicProp::And(xs) => Nnf::Or(xs.iter().map(|x| nnf(x, false)).collect()),
        LogicProp::Or(xs) if positive => Nnf::Or(xs.iter().map(|x| nnf(x, true)).collect()),
        LogicProp::Or(xs) => Nnf::And(xs.iter().map(|x| nnf(x, false)).collect()),
        LogicProp::Implies(a, b) if positive => Nnf::Or(vec![nnf(a, false), nnf(b, true)]),
        LogicProp::Implies(a, b) => Nnf::And(vec![nnf(a, true), nnf(b, false)]),
    }
}

fn too_large(n: usize) -> Error {
    Error::TooLarge(format!("clause distribution needs {n} clauses, limit is {MAX_CLAUSES}"))
}

/// Clauses as raw literal lists; `None` marks the empty (false) clause set being impossible.
fn cnf(f: &Nnf) -> Result<Vec<Vec<Literal>>> {
    match f {
        Nnf::Lit(l) => Ok(vec![vec![l.clone()]]),
        Nnf::And(xs) => {
            let mut out = Vec::new();
            for x in xs {
                out.extend(cnf(x)?);
                if out.len() > MAX_CLAUSES {
                    return Err(too_large(out.len()));
                }
            }
            Ok(out)
        }
        Nnf::Or(xs) => {
            let mut acc: Vec<Vec<Literal>> = vec![Vec::new()];
            for x in xs {
                let part = cnf(x)?;
                let n = acc.len().saturating_mul(part.len());
                if n > MAX_CLAUSES {
                    return Err(too_large(n));
                }
                let mut next = Vec::with_capacity(n);
                for a in &acc {
                    for b in &part {
                        let mut c = a.clone();
                        c.extend(b.iter().cloned());
                        next.push(c);
                    }
                }
                acc = next;
            }
            Ok(acc)
        }
    }
}

/// Equivalent clause set by negation normal form and distribution. Tautologies
/// and subsumed clauses are dropped.
pub fn to_cnf(p: &LogicProp) -> Result<ClauseSet> {
    let mut out = ClauseSet::default();
    for lits in cnf(&nnf(p, true))? {
        if let Some(c) = Clause::from_lits(lits) {
            out.push(c);
        }
    }
    Ok(out)
}

/// Linear row per clause: `Σ pos ≥ Σ neg − (|neg| − 1)`, labelled `clause_<i>`.
/// `binary` maps a Boolean to its 0/1 variable name.
pub fn clauses_to_linear(cs: &ClauseSet, binary: &impl Fn(&str) -> String) -> Vec<Constraint> {
    cs.clauses
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let pos: Vec<Expr> = c.positives().map(|v| Expr::var(binary(v))).collect();
            let neg: Vec<Expr> = c.negatives().map(|v| Expr::var(binary(v))).collect();
            let k = neg.len();
            let lhs = Expr::sum(pos);
            let rhs = match k {
                0 => Expr::cst(1.0),
                1 => neg.into_iter().next().unwrap(),
                _ => Expr::sub(Expr::sum(neg), Expr::cst((k - 1) as f64)),
            };
            normalize_constraint(format!("clause_{}", i + 1), lhs, Relation::Ge, rhs)
        })
        .collect()
}

/// Exhaustive comparison of the proposition and clause set over all assignments
/// of the proposition's variables.
pub fn truth_table_equiv(p: &LogicProp, cs: &ClauseSet) -> Result<bool> {
    let mut vars = p.vars();
    for v in cs.vars() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    if vars.len() > 24 {
        return Err(Error::TooLarge(format!("{} variables exceed the truth-table limit of 24", vars.len())));
    }
    for bits in 0u32..(1u32 << vars.len()) {
        let val = |name: &str| {
            let i = vars.iter().position(|v| v == name).expect("known variable");
            bits >> i & 1 == 1
        };
        if p.eval(&val) != cs.eval(&val) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> LogicProp {
        LogicProp::var(n)
    }

    fn strs(cs: &ClauseSet) -> Vec<String> {
        cs.clauses.iter().map(Clause::to_string).collect()
    }

    #[test]
    fn conjunction_implies() {
        let p = LogicProp::implies(LogicProp::And(vec![v("Z1"), v("Z2")]), v("Y1"));
        let cs = to_cnf(&p).unwrap();
        assert_eq!(strs(&cs), vec!["~Z1 | ~Z2 | Y1"]);
        let rows = clauses_to_linear(&cs, &|s| s.to_lowercase());
        assert_eq!(rows[0].to_string(), "y1 >= z1 + z2 - 1");
    }

    #[test]
    fn negated_conjunction_implies() {
        let p = LogicProp::implies(LogicProp::not(LogicProp::And(vec![v("Z1"), v("Z2")])), v("Y2"));
        let cs = to_cnf(&p).unwrap();
        assert_eq!(strs(&cs), vec!["Z1 | Y2", "Z2 | Y2"]);
        let rows = clauses_to_linear(&cs, &|s| s.to_lowercase());
        assert_eq!(rows[0].to_string(), "z1 + y2 >= 1");
    }

    #[test]
    fn tautology_vanishes() {
        assert!(to_cnf(&LogicProp::implies(v("Y1"), v("Y1"))).unwrap().is_empty());
        assert!(clauses_to_linear(&ClauseSet::default(), &|s| s.to_string()).is_empty());
    }

    #[test]
    fn distribution_limit() {
        let big = LogicProp::Or((0..13).map(|i| LogicProp::And(vec![v(&format!("a{i}")), v(&format!("b{i}"))])).collect());
        assert!(matches!(to_cnf(&big), Err(Error::TooLarge(_))));
    }

    #[test]
    fn linear_rows_agree_with_clauses() {
        let p = LogicProp::implies(
            LogicProp::not(LogicProp::Or(vec![
                LogicProp::And(vec![v("a"), v("b")]),
                LogicProp::And(vec![v("c"), v("d")]),
            ])),
            v("y"),
        );
        let cs = to_cnf(&p).unwrap();
        assert!(truth_table_equiv(&p, &cs).unwrap());
        let rows = clauses_to_linear(&cs, &|s| s.to_string());
        for bits in 0u32..32 {
            let names = ["a", "b", "c", "d", "y"];
            let val = |n: &str| bits >> names.iter().position(|x| *x == n).unwrap() & 1 == 1;
            let num = |n: &str| Some(if val(n) { 1.0 } else { 0.0 });
            let lin = rows.iter().all(|r| r.holds(&num).unwrap());
            assert_eq!(lin, cs.eval(&val));
        }
    }
}
