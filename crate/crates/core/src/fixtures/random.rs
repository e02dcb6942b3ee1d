use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ir::{
    Assignment, Constraint, DisjunctTerm, Disjunction, DisjunctionOrigin, Expr, GdpModel, Origin, Relation,
    ScheduleItem, Variable,
};

/// Deterministic random model with `q` disjunctions. The first disjunction has
/// exactly `max_m` terms and `max_n` disaggregated variables; the others draw
/// both uniformly from `1..=max`.
///
/// Disjunction `k` tests a selector `s_k in [0, 1]` against `m` closed
/// sub-intervals, and each term defines its outputs `d_k_i in [-10, 10]` as
/// linear or quadratic functions of a shared input `u in [-1, 1]`. The
/// selector counts as the first disaggregated variable.
pub fn generate_random_gdp(seed: u64, dims: (usize, usize, usize)) -> GdpModel {
    let (q, max_m, max_n) = dims;
    let (max_m, max_n) = (max_m.max(1), max_n.max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = GdpModel::default();
    g.variables.push(Variable::continuous("u", -1.0, 1.0, Origin::User));
    for k in 1..=q {
        let (m, n) = if k == 1 { (max_m, max_n) } else { (rng.gen_range(1..=max_m), rng.gen_range(1..=max_n)) };
        let id = format!("k{k}");
        let sel = format!("s_{k}");
        g.variables.push(Variable::continuous(&sel, 0.0, 1.0, Origin::User));
        let outs: Vec<String> = (1..n).map(|i| format!("d_{k}_{i}")).collect();
        for o in &outs {
            g.variables.push(Variable::continuous(o, -10.0, 10.0, Origin::User));
        }
        let terms = (1..=m)
            .map(|j| {
                let lo = (j - 1) as f64 / m as f64;
                let hi = j as f64 / m as f64;
                let s = || Expr::var(&sel);
                let conditions = vec![
                    Constraint::new(format!("k{k}_t{j}_c1"), Expr::sub(s(), Expr::cst(lo)), Relation::Ge),
                    Constraint::new(format!("k{k}_t{j}_c2"), Expr::sub(s(), Expr::cst(hi)), Relation::Le),
                ];
                let assignments = outs
                    .iter()
                    .enumerate()
                    .map(|(i, o)| {
                        let a = coef(&mut rng);
                        let b = coef(&mut rng);
                        let u = if rng.gen_bool(0.5) { Expr::var("u") } else { Expr::pow(Expr::var("u"), 2.0) };
                        Assignment {
                            label: format!("k{k}_t{j}_a{}", i + 1),
                            target: o.clone(),
                            rhs: Expr::add(Expr::mul(Expr::cst(a), u), Expr::cst(b)),
                        }
                    })
                    .collect();
                DisjunctTerm { bool_var: format!("Y_{k}_{j}"), conditions, assignments }
            })
            .collect();
        let mut disagg = vec![sel.clone()];
        disagg.extend(outs);
        g.disagg_sets.insert(id.clone(), disagg);
        g.schedule.push(ScheduleItem::Disjunction(k - 1));
        g.disjunctions.push(Disjunction {
            id,
            terms,
            exactly_one: true,
            origin: DisjunctionOrigin::Block { block: k, fused: m > 2 },
        });
    }
    g
}

/// Multiple of 0.25 in `[-2, 2]`.
fn coef(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-8..=8) as f64 / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;
    use crate::reform::{expected_counts, reformulate, Method, ReformOptions};

    fn sizes(g: &GdpModel) -> BTreeMap<String, (usize, usize)> {
        g.disjunctions.iter().map(|d| (d.id.clone(), (d.terms.len(), g.disagg(&d.id).len()))).collect()
    }

    #[test]
    fn seed_zero_shape() {
        let g = generate_random_gdp(0, (1, 3, 2));
        assert_eq!(g.disjunctions.len(), 1);
        assert_eq!(sizes(&g)["k1"], (3, 2));
        g.check().unwrap();
    }

    #[test]
    fn same_seed_same_model() {
        assert_eq!(generate_random_gdp(1, (4, 4, 4)), generate_random_gdp(1, (4, 4, 4)));
        assert_ne!(generate_random_gdp(1, (4, 4, 4)), generate_random_gdp(2, (4, 4, 4)));
    }

    #[test]
    fn counts_match_the_formulas() {
        for seed in 0..20 {
            let g = generate_random_gdp(seed, (3, 4, 4));
            for m in Method::ALL {
                let (_, s) = reformulate(&g, &ReformOptions::method(m)).unwrap();
                assert_eq!((s.added_vars, s.added_constraints), expected_counts(m, &g));
            }
        }
    }
}
