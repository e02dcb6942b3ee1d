use std::collections::BTreeMap;

use super::{aux_bounds, base, names, one_minus, stats, Method, ReformStats};
use crate::error::{Error, Result};
use crate::ir::{Constraint, Expr, GdpModel, MinlpModel, Origin, Provenance, Relation, Role, Variable};

/// True-false reformulation. Each disaggregated variable gets, per term, a copy
/// `xhat = nu_t + nu_f` with `nu_t` boxed by `lam` and `nu_f` by `1 - lam`; the
/// term's rows are restated over the copies and `x = Σ nu_t`.
pub fn reformulate_true_false(g: &GdpModel) -> Result<(MinlpModel, ReformStats)> {
    let mut m = base(g)?;
    for d in &g.disjunctions {
        let k = d.id.as_str();
        let disagg = g.disagg(k);
        let vars = disagg
            .iter()
            .map(|v| g.variable(v).filter(|x| x.is_bounded()).ok_or_else(|| Error::UnboundedDisagg(v.clone())))
            .collect::<Result<Vec<&Variable>>>()?;
        for (j, t) in d.terms.iter().enumerate() {
            let j = j + 1;
            let lam = names::lam(k, j);
            for x in &vars {
                let v = x.name.as_str();
                let (lo, hi) = aux_bounds(x);
                let (h, nt, nf) = (names::xhat(v, j, k), names::nu_t(v, j, k), names::nu_f(v, j, k));
                m.push_var(Variable::continuous(&h, x.lb, x.ub, Origin::HatCopy));
                m.push_var(Variable::continuous(&nt, lo, hi, Origin::DisaggregatedTrue));
                m.push_var(Variable::continuous(&nf, lo, hi, Origin::DisaggregatedFalse));
                let prov = |r: Role| Provenance::new(r).in_disjunction(k).term(j).var(v);
                m.push_row(
                    Constraint::new(
                        names::row_hat(k, v, j),
                        Expr::sub(Expr::var(&h), Expr::add(Expr::var(&nt), Expr::var(&nf))),
                        Relation::Eq,
                    ),
                    prov(Role::HatDef),
                );
                m.push_row(
                    Constraint::new(
                        names::row_box_t(k, v, j),
                        Expr::var(&nt),
                        Relation::Range(Expr::scaled(x.lb, Expr::var(&lam)), Expr::scaled(x.ub, Expr::var(&lam))),
                    ),
                    prov(Role::BoxTrue),
                );
                m.push_row(
                    Constraint::new(
                        names::row_box_f(k, v, j),
                        Expr::var(&nf),
                        Relation::Range(Expr::scaled(x.lb, one_minus(&lam)), Expr::scaled(x.ub, one_minus(&lam))),
                    ),
                    prov(Role::BoxFalse),
                );
            }
            let hats: BTreeMap<String, String> = disagg.iter().map(|v| (v.clone(), names::xhat(v, j, k))).collect();
            for c in t.constraints() {
                let row = Constraint::new(c.label.clone(), c.body.rename(&hats), c.relation.clone());
                m.push_row(row, Provenance::new(Role::Term).in_disjunction(k).term(j).source(&c.label));
            }
        }
        for v in disagg {
            let body = Expr::sub(
                Expr::var(v),
                Expr::sum((1..=d.terms.len()).map(|j| Expr::var(names::nu_t(v, j, k)))),
            );
            m.push_row(
                Constraint::new(names::row_link(k, v), body, Relation::Eq),
                Provenance::new(Role::Link).in_disjunction(k).var(v),
            );
        }
    }
    let s = stats(&m, g, Method::TrueFalse)?;
    Ok((m, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{equal_modulo_renaming, Assignment, DisjunctTerm, Disjunction, DisjunctionOrigin};

    /// Single variable, three terms `x = 1`, `x = 2`, `x = 3`.
    fn three_term() -> GdpModel {
        let terms = (1..=3)
            .map(|j| DisjunctTerm {
                bool_var: format!("Y{j}"),
                conditions: vec![Constraint::new(
                    format!("k1_t{j}_c1"),
                    Expr::sub(Expr::var("x"), Expr::cst(j as f64)),
                    Relation::Eq,
                )],
                assignments: vec![],
            })
            .collect();
        GdpModel {
            variables: vec![Variable::continuous("x", 0.0, 4.0, Origin::User)],
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

    fn row<'a>(m: &'a MinlpModel, label: &str) -> &'a Constraint {
        m.constraints.iter().find(|c| c.label == label).unwrap()
    }

    #[test]
    fn three_term_rows() {
        let (m, s) = reformulate_true_false(&three_term()).unwrap();
        assert_eq!(row(&m, "k1_link_x").to_string(), "x = nu_t_x_1_k1 + nu_t_x_2_k1 + nu_t_x_3_k1");
        assert_eq!(row(&m, "k1_hat_x_2").to_string(), "xhat_x_2_k1 = nu_t_x_2_k1 + nu_f_x_2_k1");
        assert_eq!(row(&m, "k1_boxt_x_1").to_string(), "0 <= nu_t_x_1_k1 <= 4 * lam_1_k1");
        assert_eq!(row(&m, "k1_boxf_x_3").to_string(), "0 <= nu_f_x_3_k1 <= 4 * (1 - lam_3_k1)");
        assert_eq!(row(&m, "k1_t3_c1").to_string(), "xhat_x_3_k1 = 3");
        assert_eq!(row(&m, "k1_one").to_string(), "lam_1_k1 + lam_2_k1 + lam_3_k1 = 1");
        assert_eq!((s.added_vars, s.added_constraints), (9, 10));
    }

    #[test]
    fn single_term_fixes_the_copy() {
        let mut g = three_term();
        g.disjunctions[0].terms.truncate(1);
        let (m, s) = reformulate_true_false(&g).unwrap();
        assert_eq!(row(&m, "k1_one").to_string(), "lam_1_k1 = 1");
        assert_eq!(row(&m, "k1_link_x").to_string(), "x = nu_t_x_1_k1");
        assert_eq!((s.added_vars, s.added_constraints), (3, 4));
    }

    #[test]
    fn term_rows_are_renamed_copies() {
        let mut g = three_term();
        g.variables.push(Variable::continuous("z", -1.0, 1.0, Origin::User));
        g.variables.push(Variable::continuous("p", -5.0, 5.0, Origin::User));
        g.disagg_sets.get_mut("k1").unwrap().push("p".into());
        g.disjunctions[0].terms[0].assignments.push(Assignment {
            label: "k1_t1_a1".into(),
            target: "p".into(),
            rhs: Expr::add(Expr::pow(Expr::var("z"), 2.0), Expr::call(crate::ir::Func::Exp, Expr::var("x"))),
        });
        let src = g.disjunctions[0].terms[0].assignments[0].constraint();
        let (m, _) = reformulate_true_false(&g).unwrap();
        let out = row(&m, "k1_t1_a1");
        assert_eq!(out.to_string(), "xhat_p_1_k1 = z^2 + exp(xhat_x_1_k1)");
        assert!(equal_modulo_renaming(&out.body, &src.body));
        assert_eq!(m.count_role(Role::BigM), 0);
    }

    #[test]
    fn unbounded_disaggregation_is_rejected() {
        let mut g = three_term();
        g.variables[0].ub = f64::INFINITY;
        assert!(matches!(reformulate_true_false(&g), Err(Error::UnboundedDisagg(v)) if v == "x"));
    }
}
