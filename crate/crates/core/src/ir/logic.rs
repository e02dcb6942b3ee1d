//! Propositional formulas over Boolean (indicator) variables.

use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogicProp {
    Var(String),
    Not(Box<LogicProp>),
    And(Vec<LogicProp>),
    Or(Vec<LogicProp>),
    Implies(Box<LogicProp>, Box<LogicProp>),
}

impl LogicProp {
    pub fn var(name: impl Into<String>) -> Self {
        LogicProp::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(p: LogicProp) -> Self {
        LogicProp::Not(Box::new(p))
    }

    pub fn implies(a: LogicProp, b: LogicProp) -> Self {
        LogicProp::Implies(Box::new(a), Box::new(b))
    }

    /// Variables in first-occurrence order.
    pub fn vars(&self) -> Vec<String> {
        fn go(p: &LogicProp, seen: &mut BTreeSet<String>, out: &mut Vec<String>) {
            match p {
                LogicProp::Var(v) => {
                    if seen.insert(v.clone()) {
                        out.push(v.clone());
                    }
                }
                LogicProp::Not(a) => go(a, seen, out),
                LogicProp::And(xs) | LogicProp::Or(xs) => xs.iter().for_each(|x| go(x, seen, out)),
                LogicProp::Implies(a, b) => {
                    go(a, seen, out);
                    go(b, seen, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut BTreeSet::new(), &mut out);
        out
    }

    pub fn eval(&self, val: &impl Fn(&str) -> bool) -> bool {
        match self {
            LogicProp::Var(v) => val(v),
            LogicProp::Not(a) => !a.eval(val),
            LogicProp::And(xs) => xs.iter().all(|x| x.eval(val)),
            LogicProp::Or(xs) => xs.iter().any(|x| x.eval(val)),
            LogicProp::Implies(a, b) => !a.eval(val) || b.eval(val),
        }
    }
}

impl fmt::Display for LogicProp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, xs: &[LogicProp], op: &str| {
            write!(f, "(")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")
        };
        match self {
            LogicProp::Var(v) => write!(f, "{v}"),
            LogicProp::Not(a) => write!(f, "not {a}"),
            LogicProp::And(xs) => join(f, xs, "and"),
            LogicProp::Or(xs) => join(f, xs, "or"),
            LogicProp::Implies(a, b) => write!(f, "({a} => {b})"),
        }
    }
}
