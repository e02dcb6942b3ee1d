//! Rewrites an if-else program into flat single-assignment form and lowers it
//! to disjunctions. Pass order: validate, implicit else, sequentialize,
//! flatten, split conditions, build disjunctions.

mod cnf;
mod flatten;
mod lower;
mod split;
mod ssa;

use std::fmt::Write;

pub use cnf::{clauses_to_linear, to_cnf, truth_table_equiv, Clause, ClauseSet, Literal, MAX_CLAUSES};
pub use flatten::flatten_nested;
pub use lower::build_disjunctions;
pub use split::{branch_indicator, split_conditions, AtomSplit, BlockSplit, SplitProgram};
pub use ssa::{insert_implicit_else, sequentialize};

use crate::dsl::{pretty_print, validate, Diagnostic, IfElseProgram, Severity};
use crate::error::{Error, Result};
use crate::ir::{GdpModel, ScheduleItem};

/// Names accepted by `--dump-pass`.
pub const PASSES: [&str; 6] = ["parse", "implicit-else", "sequentialize", "flatten", "split", "gdp"];

/// Every intermediate program of the pipeline plus the lowered model.
#[derive(Debug, Clone)]
pub struct Normalized {
    pub source: IfElseProgram,
    pub diagnostics: Vec<Diagnostic>,
    pub implicit_else: IfElseProgram,
    pub sequential: IfElseProgram,
    pub flat: IfElseProgram,
    pub split: SplitProgram,
    pub gdp: GdpModel,
}

impl Normalized {
    /// Final flat program (no nesting, explicit elses, single assignment).
    pub fn program(&self) -> &IfElseProgram {
        &self.split.program
    }

    pub fn dump(&self, pass: &str) -> Option<String> {
        Some(match pass {
            "parse" => pretty_print(&self.source),
            "implicit-else" => pretty_print(&self.implicit_else),
            "sequentialize" => pretty_print(&self.sequential),
            "flatten" => pretty_print(&self.flat),
            "split" => self.split.describe(),
            "gdp" => describe_gdp(&self.gdp),
            _ => return None,
        })
    }
}

pub fn normalize(p: &IfElseProgram) -> Result<Normalized> {
    let diagnostics = validate(p);
    let implicit_else = insert_implicit_else(p)?;
    let sequential = sequentialize(&implicit_else);
    let flat = flatten_nested(&sequential);
    let split = split_conditions(&flat);
    let gdp = build_disjunctions(&split)?;
    if let Some(d) = diagnostics.iter().find(|d| d.severity == Severity::Error) {
        return Err(Error::Invalid(d.to_string()));
    }
    Ok(Normalized { source: p.clone(), diagnostics, implicit_else, sequential, flat, split, gdp })
}

/// Readable listing of a disjunctive model in evaluation order.
pub fn describe_gdp(g: &GdpModel) -> String {
    let mut out = String::new();
    for item in &g.schedule {
        match item {
            ScheduleItem::Global(i) => {
                let a = &g.globals[*i];
                let _ = writeln!(out, "{}: {} = {}", a.label, a.target, a.rhs);
            }
            ScheduleItem::Disjunction(i) => {
                let d = &g.disjunctions[*i];
                let _ = writeln!(out, "{}: disaggregate {{{}}}", d.id, g.disagg(&d.id).join(", "));
                for t in &d.terms {
                    let rows: Vec<String> = t.constraints().iter().map(|c| c.to_string()).collect();
                    let _ = writeln!(out, "  [{}] {}", t.bool_var, rows.join("; "));
                }
            }
        }
    }
    for p in &g.props {
        let _ = writeln!(out, "logic: {p}");
    }
    out
}
