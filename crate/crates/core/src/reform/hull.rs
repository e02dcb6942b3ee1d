use std::collections::{BTreeMap, BTreeSet};

use super::{aux_bounds, base, names, split_eq, stats, HullVariant, Method, ReformStats};
use crate::error::{Error, Result};
use crate::ir::{
    affine_split, eval_expr, Constraint, Expr, GdpModel, MinlpModel, Origin, Provenance, Relation, Role, Variable,
};

/// Epsilon-approximated convex hull. `x = Σ nu`, `lam·lb <= nu <= lam·ub`;
/// rows affine in the disaggregated variables use the exact perspective, the
/// rest `(lam + eps) h(nu / (lam + eps))`, plus `eps h(0)(lam - 1)` for sawaya-2.
pub fn reformulate_hull_eps(g: &GdpModel, eps: f64, variant: HullVariant) -> Result<(MinlpModel, ReformStats)> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::EpsNonpositive(eps));
    }
    let mut m = base(g)?;
    for d in &g.disjunctions {
        let k = d.id.as_str();
        let disagg = g.disagg(k);
        let set: BTreeSet<&str> = disagg.iter().map(String::as_str).collect();
        for (j, t) in d.terms.iter().enumerate() {
            let j = j + 1;
            let lam = names::lam(k, j);
            for v in disagg {
                let x = g.variable(v).filter(|x| x.is_bounded()).ok_or_else(|| Error::UnboundedDisagg(v.clone()))?;
                let (lo, hi) = aux_bounds(x);
                let nu = names::nu(v, j, k);
                m.push_var(Variable::continuous(&nu, lo, hi, Origin::DisaggregatedTrue));
                m.push_row(
                    Constraint::new(
                        names::row_box(k, v, j),
                        Expr::var(&nu),
                        Relation::Range(Expr::scaled(x.lb, Expr::var(&lam)), Expr::scaled(x.ub, Expr::var(&lam))),
                    ),
                    Provenance::new(Role::Box).in_disjunction(k).term(j).var(v),
                );
            }
            let nus: BTreeMap<String, String> = disagg.iter().map(|v| (v.clone(), names::nu(v, j, k))).collect();
            for src in t.constraints() {
                for c in split_eq(&src)? {
                    let body = perspective(&c, &set, &nus, &lam, eps, variant)?;
                    m.push_row(
                        Constraint::new(c.label.clone(), body, c.relation.clone()),
                        Provenance::new(Role::Term).in_disjunction(k).term(j).source(&src.label),
                    );
                }
            }
        }
        for v in disagg {
            let body = Expr::sub(Expr::var(v), Expr::sum((1..=d.terms.len()).map(|j| Expr::var(names::nu(v, j, k)))));
            m.push_row(
                Constraint::new(names::row_link(k, v), body, Relation::Eq),
                Provenance::new(Role::Link).in_disjunction(k).var(v),
            );
        }
    }
    let s = stats(&m, g, Method::HullEps)?;
    Ok((m, s))
}

/// Value of a variable-free expression.
fn folded(e: &Expr) -> Option<f64> {
    if !e.vars().is_empty() {
        return None;
    }
    eval_expr(e, &|_: &str| None::<f64>).ok()
}

fn perspective(
    c: &Constraint,
    set: &BTreeSet<&str>,
    nus: &BTreeMap<String, String>,
    lam: &str,
    eps: f64,
    variant: HullVariant,
) -> Result<Expr> {
    if let Some((coefs, rest)) = affine_split(&c.body, &|v| set.contains(v)) {
        let mut parts: Vec<Expr> = coefs
            .into_iter()
            .map(|(v, a)| {
                let nu = Expr::var(&nus[&v]);
                match folded(&a) {
                    Some(a) => Expr::scaled(a, nu),
                    None => Expr::mul(a, nu),
                }
            })
            .collect();
        parts.push(match folded(&rest) {
            Some(r) => Expr::scaled(r, Expr::var(lam)),
            None => Expr::mul(Expr::var(lam), rest),
        });
        return Ok(Expr::sum(parts));
    }
    let shifted = Expr::add(Expr::var(lam), Expr::cst(eps));
    let inner = c.body.substitute(&|v| nus.get(v).map(|n| Expr::div(Expr::var(n), shifted.clone())));
    let main = Expr::mul(shifted, inner);
    match variant {
        HullVariant::LeeGrossmann => Ok(main),
        HullVariant::Sawaya2 => {
            let shared: Vec<String> = c.body.vars().into_iter().filter(|v| !set.contains(v.as_str())).collect();
            if !shared.is_empty() {
                return Err(Error::Domain(format!(
                    "sawaya-2 needs `{}` to depend on disaggregated variables only, found {}",
                    c.label,
                    shared.join(", ")
                )));
            }
            let zero = |_: &str| Some(0.0);
            let h0: f64 = eval_expr(&c.body, &zero)
                .map_err(|e| Error::Domain(format!("h(0) of `{}` is undefined: {e}", c.label)))?;
            Ok(Expr::add(main, Expr::scaled(eps * h0, Expr::sub(Expr::var(lam), Expr::cst(1.0)))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{DisjunctTerm, Disjunction, DisjunctionOrigin};

    /// `h(x) = 5 - x <= 0` against `x <= 1`, x in [0, 10].
    fn model() -> GdpModel {
        let h = Expr::sub(Expr::cst(5.0), Expr::pow(Expr::var("x"), 1.5));
        let terms = vec![
            DisjunctTerm {
                bool_var: "Y1".into(),
                conditions: vec![Constraint::new("k1_t1_c1", h, Relation::Le)],
                assignments: vec![],
            },
            DisjunctTerm {
                bool_var: "Y2".into(),
                conditions: vec![Constraint::new("k1_t2_c1", Expr::sub(Expr::var("x"), Expr::cst(1.0)), Relation::Le)],
                assignments: vec![],
            },
        ];
        GdpModel {
            variables: vec![Variable::continuous("x", 0.0, 10.0, Origin::User)],
            disjunctions: vec![Disjunction {
                id: "k1".into(),
                terms,
                exactly_one: true,
                origin: DisjunctionOrigin::Block { block: 1, fused: true },
            }],
            disagg_sets: BTreeMap::from([("k1".to_string(), vec!["x".to_string()])]),
            ..GdpModel::default()
        }
    }

    fn value_at_zero(m: &MinlpModel, label: &str) -> f64 {
        let c = m.constraints.iter().find(|c| c.label == label).unwrap();
        let at = BTreeMap::from([("nu_x_1_k1".to_string(), 0.0), ("lam_1_k1".to_string(), 0.0)]);
        eval_expr(&c.body, &at).unwrap()
    }

    #[test]
    fn lee_grossmann_leaves_eps_h0() {
        let (m, s) = reformulate_hull_eps(&model(), 1e-6, HullVariant::LeeGrossmann).unwrap();
        assert!((value_at_zero(&m, "k1_t1_c1") - 5e-6).abs() < 1e-15);
        assert_eq!((s.added_vars, s.added_constraints), (2, 3));
    }

    #[test]
    fn sawaya_correction_restores_feasibility() {
        let (m, _) = reformulate_hull_eps(&model(), 1e-6, HullVariant::Sawaya2).unwrap();
        assert!(value_at_zero(&m, "k1_t1_c1").abs() < 1e-15);
    }

    #[test]
    fn affine_rows_use_exact_perspective() {
        let (m, _) = reformulate_hull_eps(&model(), 1e-6, HullVariant::LeeGrossmann).unwrap();
        let c = m.constraints.iter().find(|c| c.label == "k1_t2_c1").unwrap();
        assert_eq!(c.to_string(), "nu_x_2_k1 + (-1) * lam_2_k1 <= 0");
    }

    #[test]
    fn eps_must_be_positive() {
        assert_eq!(reformulate_hull_eps(&model(), 0.0, HullVariant::LeeGrossmann).unwrap_err(), Error::EpsNonpositive(0.0));
    }
}
