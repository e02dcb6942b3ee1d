//! GDP to MINLP backends: true-false (primary), big-M and epsilon hull.

mod bigm;
mod hull;
pub mod names;
mod stats;
mod true_false;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bigm::reformulate_bigm;
pub use hull::reformulate_hull_eps;
pub use stats::{expected_counts, stats, ReformStats};
pub use true_false::reformulate_true_false;

use crate::error::{Error, Result};
use crate::ir::{Constraint, Expr, GdpModel, MinlpModel, Provenance, Relation, Role, Variable};
use crate::normalize::{clauses_to_linear, to_cnf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    TrueFalse,
    BigM,
    HullEps,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::TrueFalse, Method::BigM, Method::HullEps];

    pub fn name(self) -> &'static str {
        match self {
            Method::TrueFalse => "true-false",
            Method::BigM => "bigm",
            Method::HullEps => "hull-eps",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HullVariant {
    #[default]
    LeeGrossmann,
    Sawaya2,
}

impl HullVariant {
    pub fn name(self) -> &'static str {
        match self {
            HullVariant::LeeGrossmann => "lee-grossmann",
            HullVariant::Sawaya2 => "sawaya-2",
        }
    }
}

impl FromStr for HullVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [HullVariant::LeeGrossmann, HullVariant::Sawaya2]
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown hull variant `{s}`")))
    }
}

/// Big-M source: interval enclosures, with per-row overrides keyed by GDP label.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BigMPolicy {
    pub user: BTreeMap<String, f64>,
    /// Used for every row without an override when set.
    pub default: Option<f64>,
}

impl BigMPolicy {
    /// Parses `label=V` pairs, or a bare number applying to every row.
    pub fn parse(items: &[String]) -> Result<Self> {
        let mut p = BigMPolicy::default();
        for item in items.iter().flat_map(|s| s.split(',')).filter(|s| !s.is_empty()) {
            let bad = || Error::Usage(format!("bad --bigm value `{item}`"));
            match item.split_once('=') {
                Some((label, v)) => {
                    let v: f64 = v.trim().parse().map_err(|_| bad())?;
                    p.user.insert(label.trim().to_string(), v);
                }
                None => p.default = Some(item.trim().parse().map_err(|_| bad())?),
            }
        }
        Ok(p)
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.user.get(label).copied().or(self.default)
    }
}

pub const DEFAULT_EPS: f64 = 1e-6;
/// Below this the hull backend warns about numerical trouble.
pub const EPS_WARN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ReformOptions {
    pub method: Method,
    pub eps: f64,
    pub variant: HullVariant,
    pub bigm: BigMPolicy,
}

impl Default for ReformOptions {
    fn default() -> Self {
        ReformOptions { method: Method::TrueFalse, eps: DEFAULT_EPS, variant: HullVariant::default(), bigm: BigMPolicy::default() }
    }
}

impl ReformOptions {
    pub fn method(method: Method) -> Self {
        ReformOptions { method, ..Self::default() }
    }
}

/// Runs the selected backend and the count self-audit.
pub fn reformulate(g: &GdpModel, opts: &ReformOptions) -> Result<(MinlpModel, ReformStats)> {
    match opts.method {
        Method::TrueFalse => reformulate_true_false(g),
        Method::BigM => reformulate_bigm(g, &opts.bigm),
        Method::HullEps => reformulate_hull_eps(g, opts.eps, opts.variant),
    }
}

/// Indicator name of every Boolean.
pub(crate) fn binary_map(g: &GdpModel) -> BTreeMap<String, String> {
    g.disjunctions
        .iter()
        .flat_map(|d| d.terms.iter().enumerate().map(|(j, t)| (t.bool_var.clone(), names::lam(&d.id, j + 1))))
        .collect()
}

/// Rows and variables every backend shares: the GDP variables, indicators,
/// exactly-one rows, linearized logic and global equations.
pub(crate) fn base(g: &GdpModel) -> Result<MinlpModel> {
    let mut m = MinlpModel::default();
    for v in &g.variables {
        m.push_var(v.clone());
    }
    for d in &g.disjunctions {
        if d.terms.is_empty() {
            return Err(Error::EmptyDisjunction(d.id.clone()));
        }
        let lams: Vec<String> = (1..=d.terms.len()).map(|j| names::lam(&d.id, j)).collect();
        for l in &lams {
            m.push_var(Variable::binary(l.clone()));
        }
        let rel = if d.exactly_one { Relation::Eq } else { Relation::Ge };
        let body = Expr::sub(Expr::sum(lams.iter().map(Expr::var)), Expr::cst(1.0));
        m.push_row(Constraint::new(names::row_one(&d.id), body, rel), Provenance::new(Role::ExactlyOne).in_disjunction(&d.id));
        if d.exactly_one {
            m.exactly_one_groups.push(lams);
        }
    }
    let bin = binary_map(g);
    let lookup = |b: &str| bin.get(b).cloned().unwrap_or_else(|| b.to_string());
    let mut n = 0;
    for (i, p) in g.props.iter().enumerate() {
        for mut c in clauses_to_linear(&to_cnf(p)?, &lookup) {
            n += 1;
            c.label = names::row_clause(n);
            m.push_row(c, Provenance::new(Role::LogicClause).source(&format!("p{}", i + 1)));
        }
    }
    for c in g.global_constraints() {
        let p = Provenance::new(Role::Global).source(&c.label);
        m.push_row(c, p);
    }
    Ok(m)
}

pub(crate) fn one_minus(lam: &str) -> Expr {
    Expr::sub(Expr::cst(1.0), Expr::var(lam))
}

pub(crate) fn aux_bounds(v: &Variable) -> (f64, f64) {
    (v.lb.min(0.0), v.ub.max(0.0))
}

/// Splits `h = 0` into `h <= 0` and `h >= 0`; inequalities pass through.
pub(crate) fn split_eq(c: &Constraint) -> Result<Vec<Constraint>> {
    Ok(match c.relation {
        Relation::Eq => vec![
            Constraint::new(format!("{}_le", c.label), c.body.clone(), Relation::Le),
            Constraint::new(format!("{}_ge", c.label), c.body.clone(), Relation::Ge),
        ],
        Relation::Le | Relation::Ge => vec![c.clone()],
        Relation::Range(..) => return Err(Error::Invalid(format!("range row `{}` inside a disjunct", c.label))),
    })
}
