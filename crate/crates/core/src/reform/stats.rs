use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::Method;
use crate::error::{Error, Result};
use crate::ir::{GdpModel, MinlpModel, Origin, Role};

/// Problem growth of one reformulation. `n` is the disaggregation-set size and
/// `m` the term count of each disjunction; `q` is the number of disjunctions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReformStats {
    pub method: Method,
    pub q: usize,
    pub n_per_disjunction: BTreeMap<String, usize>,
    pub m_per_disjunction: BTreeMap<String, usize>,
    pub added_vars: usize,
    pub added_constraints: usize,
}

impl ReformStats {
    pub fn sum_m(&self) -> usize {
        self.m_per_disjunction.values().sum()
    }
}

impl fmt::Display for ReformStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n: Vec<String> = self.n_per_disjunction.iter().map(|(k, n)| format!("{k}:{n}")).collect();
        write!(
            f,
            "method={} q={} sum_m={} n={{{}}} added_vars={} added_constraints={}",
            self.method,
            self.q,
            self.sum_m(),
            n.join(","),
            self.added_vars,
            self.added_constraints
        )
    }
}

/// Closed-form `(added_vars, added_constraints)`.
///
/// true-false: `Σ 3·n·m` and `Σ (n + 3·n·m)`; hull: `Σ n·m` and `Σ (n + n·m)`;
/// big-M: one indicator per term and no extra rows.
pub fn expected_counts(method: Method, g: &GdpModel) -> (usize, usize) {
    let nm = g.disjunctions.iter().map(|d| (g.disagg(&d.id).len(), d.terms.len()));
    match method {
        Method::TrueFalse => nm.fold((0, 0), |(v, c), (n, m)| (v + 3 * n * m, c + n + 3 * n * m)),
        Method::HullEps => nm.fold((0, 0), |(v, c), (n, m)| (v + n * m, c + n + n * m)),
        Method::BigM => (nm.map(|(_, m)| m).sum(), 0),
    }
}

/// Recounts added variables and rows from origins and provenance and checks
/// them against [`expected_counts`].
pub fn stats(m: &MinlpModel, g: &GdpModel, method: Method) -> Result<ReformStats> {
    for c in &m.constraints {
        if !m.provenance.contains_key(&c.label) {
            return Err(Error::ProvenanceMissing(c.label.clone()));
        }
    }
    let added_vars = match method {
        Method::BigM => m.count_origin(Origin::Indicator),
        _ => [Origin::HatCopy, Origin::DisaggregatedTrue, Origin::DisaggregatedFalse]
            .into_iter()
            .map(|o| m.count_origin(o))
            .sum(),
    };
    let added_constraints = [Role::HatDef, Role::BoxTrue, Role::BoxFalse, Role::Box, Role::Link]
        .into_iter()
        .map(|r| m.count_role(r))
        .sum();
    let expected = expected_counts(method, g);
    if (added_vars, added_constraints) != expected {
        return Err(Error::CountMismatch(format!(
            "{method}: counted {added_vars} vars / {added_constraints} rows, formula gives {} / {}",
            expected.0, expected.1
        )));
    }
    Ok(ReformStats {
        method,
        q: g.disjunctions.len(),
        n_per_disjunction: g.disjunctions.iter().map(|d| (d.id.clone(), g.disagg(&d.id).len())).collect(),
        m_per_disjunction: g.disjunctions.iter().map(|d| (d.id.clone(), d.terms.len())).collect(),
        added_vars,
        added_constraints,
    })
}
