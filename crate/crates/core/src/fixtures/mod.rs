//! Worked examples shipped with the crate, their golden files, and random model
//! generators for property tests.
//!
//! Layout: `fixtures/<name>.gdp` holds the program and
//! `fixtures/<name>.expected.json` the golden normalized program, disjunction
//! structure, stats, grid and true-false listing. Set `GDPC_BLESS=1` to rewrite
//! goldens from the current pipeline.

mod random;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde_json::{json, Value};

pub use random::generate_random_gdp;

use crate::dsl::{parse_program, pretty_print, IfElseProgram};
use crate::emit::emit_algebraic;
use crate::error::{Error, Result};
use crate::ir::{
    interval_bounds, Assignment, Constraint, DisjunctTerm, Disjunction, DisjunctionOrigin, Expr, GdpModel,
    Interval, Origin, Relation, Variable,
};
use crate::pipeline::{compile_program, Compilation};
use crate::reform::{Method, ReformOptions};
use crate::verify::GridSpec;

/// Minimum grid size used when a fixture has no explicit per-dimension count.
pub const MIN_GRID_POINTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fixture {
    pub name: &'static str,
    pub source: &'static str,
    /// One of the worked examples of the method (as opposed to a stress case).
    pub worked_example: bool,
    /// Fixed samples per input; otherwise the smallest uniform grid with
    /// [`MIN_GRID_POINTS`] points.
    pub per_dim: Option<usize>,
    /// Inactive copies are expected to leave variable boxes somewhere on the grid.
    pub clip_warnings: bool,
}

macro_rules! fixture {
    ($name:literal, $worked:expr, $per_dim:expr, $clip:expr) => {
        Fixture {
            name: $name,
            source: include_str!(concat!("../../fixtures/", $name, ".gdp")),
            worked_example: $worked,
            per_dim: $per_dim,
            clip_warnings: $clip,
        }
    };
}

pub const FIXTURES: [Fixture; 13] = [
    fixture!("epc", true, None, false),
    fixture!("implicit_else", true, None, false),
    fixture!("sequential3", true, None, false),
    fixture!("multi2", true, None, false),
    fixture!("multi4", true, None, false),
    fixture!("nested", true, None, false),
    fixture!("property_chain", true, Some(5), false),
    fixture!("simple2", false, None, false),
    fixture!("nested_or", false, None, false),
    fixture!("clamp4", false, None, false),
    fixture!("depth3", false, None, false),
    fixture!("pathology", false, None, false),
    fixture!("clip", false, None, true),
];

pub fn all() -> &'static [Fixture] {
    &FIXTURES
}

pub fn get(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}

/// The seven worked examples.
pub fn worked_examples() -> impl Iterator<Item = &'static Fixture> {
    FIXTURES.iter().filter(|f| f.worked_example)
}

/// Property model with a grouped two-atom test, a three-way correction chain
/// and a clamp, using placeholder polynomials.
pub fn property_chain_fixture() -> &'static Fixture {
    get("property_chain").expect("property_chain is registered")
}

/// Whether a golden mismatch was rewritten.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoldenCheck {
    Match,
    Blessed,
    Mismatch { expected: String, actual: String },
}

impl Fixture {
    pub fn program(&self) -> Result<IfElseProgram> {
        parse_program(self.source)
    }

    pub fn compile(&self, opts: &ReformOptions) -> Result<Compilation> {
        compile_program(&self.program()?, opts)
    }

    pub fn grid(&self, p: &IfElseProgram) -> Result<GridSpec> {
        match self.per_dim {
            Some(n) => GridSpec::per_dim(p, n),
            None => GridSpec::at_least(p, MIN_GRID_POINTS),
        }
    }

    pub fn golden_path(&self) -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{}.expected.json", self.name))
    }

    /// Golden document built from the current pipeline.
    pub fn golden(&self) -> Result<String> {
        let tf = self.compile(&ReformOptions::method(Method::TrueFalse))?;
        let g = &tf.normalized.gdp;
        let disjunctions: Vec<Value> = g
            .disjunctions
            .iter()
            .map(|d| {
                let terms: Vec<Value> = d
                    .terms
                    .iter()
                    .map(|t| {
                        json!({
                            "indicator": t.bool_var,
                            "conditions": t.conditions.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                            "assignments": t.assignments.iter().map(|a| a.constraint().to_string()).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                json!({ "id": d.id, "disaggregate": g.disagg(&d.id), "terms": terms })
            })
            .collect();
        let mut stats = BTreeMap::new();
        for m in Method::ALL {
            let c = if m == Method::TrueFalse { tf.clone() } else { self.compile(&ReformOptions::method(m))? };
            stats.insert(m.name(), c.stats.to_string());
        }
        let doc = json!({
            "name": self.name,
            "normalized": pretty_print(tf.normalized.program()),
            "gdp": {
                "globals": g.global_constraints().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "disjunctions": disjunctions,
                "logic": g.props.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            },
            "stats": stats,
            "grid": self.grid(tf.source())?,
            "true_false": emit_algebraic(&tf.minlp),
        });
        let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Json(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Compares against the stored golden; with `GDPC_BLESS` set, rewrites it.
    pub fn check_golden(&self) -> Result<GoldenCheck> {
        let actual = self.golden()?;
        let path = self.golden_path();
        let expected = std::fs::read_to_string(&path).unwrap_or_default();
        if expected == actual {
            return Ok(GoldenCheck::Match);
        }
        if std::env::var_os("GDPC_BLESS").is_some() {
            std::fs::write(&path, &actual).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            return Ok(GoldenCheck::Blessed);
        }
        Ok(GoldenCheck::Mismatch { expected, actual })
    }
}

/// Single variable `x in [0, 4]` and one disjunction of three convex tests
/// `(x - c)^2 - 0.25 <= 0` for `c = 1, 2, 3`.
pub fn three_term_gdp() -> GdpModel {
    let terms = (1..=3)
        .map(|j| DisjunctTerm {
            bool_var: format!("Y_1_{j}"),
            conditions: vec![Constraint::new(
                format!("k1_t{j}_c1"),
                Expr::sub(Expr::pow(Expr::sub(Expr::var("x"), Expr::cst(j as f64)), 2.0), Expr::cst(0.25)),
                Relation::Le,
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
        schedule: vec![crate::ir::ScheduleItem::Disjunction(0)],
        ..GdpModel::default()
    }
}

/// Assignments whose right-hand side can leave the target's box, judged by
/// interval enclosure over the declared boxes.
pub fn escaping_assignments(g: &GdpModel) -> Result<Vec<String>> {
    let boxes: BTreeMap<String, Interval<f64>> =
        g.variables.iter().map(|v| (v.name.clone(), Interval::new(v.lb, v.ub))).collect();
    let all = g
        .globals
        .iter()
        .chain(g.disjunctions.iter().flat_map(|d| d.terms.iter().flat_map(|t| t.assignments.iter())));
    let mut out = Vec::new();
    for a in all {
        let Assignment { label, target, rhs } = a;
        let r = interval_bounds(rhs, &boxes)?;
        let t = boxes.get(target).copied().unwrap_or_else(Interval::entire);
        if r.lo < t.lo || r.hi > t.hi {
            out.push(label.clone());
        }
    }
    Ok(out)
}
