#![allow(dead_code)]

use std::collections::BTreeSet;

use gdpc::fixtures::Fixture;
use gdpc::ir::{eval_expr, Constraint, Expr, GdpModel, Relation, Role};
use gdpc::reform::{HullVariant, Method, ReformOptions};
use gdpc::verify::{interpret_traced, verify, EquivalenceReport, Failure};
use gdpc::Compilation;

pub fn hull(variant: HullVariant) -> ReformOptions {
    ReformOptions { variant, ..ReformOptions::method(Method::HullEps) }
}

pub fn report(f: &Fixture, opts: &ReformOptions) -> (Compilation, EquivalenceReport) {
    let c = f.compile(opts).unwrap_or_else(|e| panic!("{}: {e}", f.name));
    let grid = f.grid(c.source()).unwrap();
    let r = verify(&c, &grid).unwrap_or_else(|e| panic!("{}: {e}", f.name));
    (c, r)
}

/// GDP row (condition or assignment equality) with the given label.
pub fn gdp_row(g: &GdpModel, label: &str) -> Option<Constraint> {
    g.disjunctions
        .iter()
        .flat_map(|d| d.terms.iter().flat_map(|t| t.constraints()))
        .chain(g.global_constraints())
        .find(|c| c.label == label)
}

/// Whether a MINLP row is one half of a split source equality.
pub fn is_split(row: &str) -> bool {
    row.ends_with("_le") || row.ends_with("_ge")
}

/// The `h` of the source row of MINLP row `row`, written as `h(x) <= 0`.
/// Halves of split equalities carry a `_le` / `_ge` suffix.
pub fn h_of(c: &Compilation, row: &str) -> Expr {
    let g = &c.normalized.gdp;
    let source = c.minlp.provenance[row].source.clone().expect("row with a source");
    let src = gdp_row(g, &source).unwrap_or_else(|| panic!("no GDP row `{source}`"));
    let side = if row.ends_with("_le") {
        Relation::Le
    } else if row.ends_with("_ge") {
        Relation::Ge
    } else {
        src.relation.clone()
    };
    match side {
        Relation::Le => src.body,
        Relation::Ge => Expr::neg(src.body),
        r => panic!("`{row}` has relation {r:?}"),
    }
}

/// `h(0)` of the row blamed by a hull failure: disaggregated variables of its
/// disjunction at zero, everything else at the normalized interpreter's values.
pub fn failure_h0(c: &Compilation, f: &Failure) -> f64 {
    let label = f.row.as_ref().expect("row failure");
    let p = &c.minlp.provenance[label];
    let k = p.disjunction.as_ref().expect("disjunction row");
    let (mut env, _) = interpret_traced(c.normalized.program(), &f.inputs).unwrap();
    for v in c.normalized.gdp.disagg(k) {
        env.insert(v.clone(), 0.0);
    }
    eval_expr(&h_of(c, label), &env).unwrap()
}

/// Whether the failing row belongs to a term the selection leaves inactive.
pub fn failure_term_inactive(c: &Compilation, f: &Failure) -> bool {
    let p = &c.minlp.provenance[f.row.as_ref().unwrap()];
    let k = p.disjunction.as_ref().unwrap();
    let idx = c.normalized.gdp.disjunctions.iter().position(|d| &d.id == k).unwrap();
    f.selection.as_ref().unwrap()[idx] != p.term.unwrap()
}

/// Nonlinear true-false rows that are not a renamed copy of a source row.
pub fn structural_copy_violations(c: &Compilation) -> Vec<String> {
    let g = &c.normalized.gdp;
    let disagg: BTreeSet<&String> = g.disagg_sets.values().flatten().collect();
    let mut bad = Vec::new();
    for row in &c.minlp.constraints {
        if row.body.is_affine() {
            continue;
        }
        let p = &c.minlp.provenance[&row.label];
        let src = match (p.role, &p.source) {
            (Role::Term | Role::Global, Some(s)) => gdp_row(g, s),
            _ => None,
        };
        let Some(src) = src else {
            bad.push(format!("{}: nonlinear row without a source", row.label));
            continue;
        };
        if !gdpc::ir::equal_modulo_renaming(&row.body, &src.body) || row.relation != src.relation {
            bad.push(format!("{}: `{row}` is not a renaming of `{src}`", row.label));
            continue;
        }
        // only disaggregated variables may be renamed, and only onto their own copies
        let (k, j) = (p.disjunction.clone().unwrap_or_default(), p.term.unwrap_or(0));
        for (a, b) in row.body.vars().iter().zip(src.body.vars().iter()) {
            let ok = a == b || (disagg.contains(b) && *a == format!("xhat_{b}_{j}_{k}"));
            if !ok {
                bad.push(format!("{}: `{b}` renamed to `{a}`", row.label));
            }
        }
    }
    bad
}
