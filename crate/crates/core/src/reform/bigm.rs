use std::collections::BTreeMap;

use super::{base, names, one_minus, split_eq, stats, BigMPolicy, Method, ReformStats};
use crate::error::{Error, Result};
use crate::ir::{interval_bounds, Constraint, Expr, GdpModel, Interval, MinlpModel, Provenance, Relation, Role};

/// Big-M relaxation: `h <= M(1 - lam)` and `h >= -M(1 - lam)`, equalities split.
/// Without an override, `M` is the relevant endpoint of the interval enclosure
/// of `h` over the variable box, floored at 0.
pub fn reformulate_bigm(g: &GdpModel, policy: &BigMPolicy) -> Result<(MinlpModel, ReformStats)> {
    let mut m = base(g)?;
    let dom: BTreeMap<String, Interval<f64>> =
        g.variables.iter().map(|v| (v.name.clone(), Interval::new(v.lb, v.ub))).collect();
    for d in &g.disjunctions {
        for (j, t) in d.terms.iter().enumerate() {
            let lam = names::lam(&d.id, j + 1);
            for src in t.constraints() {
                let user = policy.get(&src.label);
                for c in split_eq(&src)? {
                    let big = match user {
                        Some(v) => v,
                        None => auto_m(&c, &dom)?,
                    };
                    let body = match c.relation {
                        Relation::Le => Expr::sub(c.body.clone(), Expr::scaled(big, one_minus(&lam))),
                        _ => Expr::sub(c.body.clone(), Expr::scaled(-big, one_minus(&lam))),
                    };
                    m.push_row(
                        Constraint::new(c.label.clone(), body, c.relation.clone()),
                        Provenance::new(Role::BigM).in_disjunction(&d.id).term(j + 1).source(&src.label),
                    );
                }
            }
        }
    }
    let s = stats(&m, g, Method::BigM)?;
    Ok((m, s))
}

fn auto_m(c: &Constraint, dom: &BTreeMap<String, Interval<f64>>) -> Result<f64> {
    let r = interval_bounds(&c.body, dom).map_err(|_| Error::MUnbounded(c.label.clone()))?;
    let end = match c.relation {
        Relation::Le => r.hi,
        _ => -r.lo,
    };
    if end.is_finite() {
        Ok(end.max(0.0))
    } else {
        Err(Error::MUnbounded(c.label.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{DisjunctTerm, Disjunction, DisjunctionOrigin, Origin, Variable};

    fn model(body: Expr, lb: f64, ub: f64) -> GdpModel {
        let term = |j: usize, rel: Relation| DisjunctTerm {
            bool_var: format!("Y{j}"),
            conditions: vec![Constraint::new(format!("k1_t{j}_c1"), body.clone(), rel)],
            assignments: vec![],
        };
        GdpModel {
            variables: vec![Variable::continuous("x", lb, ub, Origin::User)],
            disjunctions: vec![Disjunction {
                id: "k1".into(),
                terms: vec![term(1, Relation::Le), term(2, Relation::Ge)],
                exactly_one: true,
                origin: DisjunctionOrigin::Block { block: 1, fused: true },
            }],
            disagg_sets: BTreeMap::from([("k1".to_string(), vec!["x".to_string()])]),
            ..GdpModel::default()
        }
    }

    fn row(m: &MinlpModel, label: &str) -> String {
        m.constraints.iter().find(|c| c.label == label).unwrap().to_string()
    }

    #[test]
    fn interval_endpoint_gives_m() {
        let g = model(Expr::sub(Expr::var("x"), Expr::cst(5.0)), 0.0, 10.0);
        let (m, s) = reformulate_bigm(&g, &BigMPolicy::default()).unwrap();
        assert_eq!(row(&m, "k1_t1_c1"), "x - 5 <= 5 * (1 - lam_1_k1)");
        assert_eq!(row(&m, "k1_t2_c1"), "x - 5 >= (-5) * (1 - lam_2_k1)");
        assert_eq!((s.added_vars, s.added_constraints), (2, 0));
    }

    #[test]
    fn user_m_is_used_verbatim() {
        let g = model(Expr::sub(Expr::var("x"), Expr::cst(5.0)), 0.0, 10.0);
        let p = BigMPolicy::parse(&["k1_t1_c1=100".to_string()]).unwrap();
        let (m, _) = reformulate_bigm(&g, &p).unwrap();
        assert_eq!(row(&m, "k1_t1_c1"), "x - 5 <= 100 * (1 - lam_1_k1)");
    }

    #[test]
    fn infinite_enclosure_without_override_fails() {
        let g = model(Expr::sub(Expr::div(Expr::cst(1.0), Expr::var("x")), Expr::cst(1.0)), -1.0, 1.0);
        assert!(matches!(reformulate_bigm(&g, &BigMPolicy::default()), Err(Error::MUnbounded(_))));
        let p = BigMPolicy::parse(&["50".to_string()]).unwrap();
        assert!(reformulate_bigm(&g, &p).is_ok());
    }
}
