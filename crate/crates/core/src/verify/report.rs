use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    /// Grid point index.
    pub point: usize,
    pub inputs: BTreeMap<String, f64>,
    /// Offending MINLP row, when one is to blame.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<String>,
    /// Term selection per disjunction (1-based), when relevant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<Vec<usize>>,
    /// Amount by which the row or bound is missed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<f64>,
    pub reason: String,
}

/// An inactive copy whose own equality pushes a value outside the variable box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClipWarning {
    pub point: usize,
    pub disjunction: String,
    pub term: usize,
    pub constraint: String,
    pub value: f64,
    pub lb: f64,
    pub ub: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ForwardReport {
    pub points_checked: usize,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct BackwardReport {
    /// Binary assignments that satisfy the exactly-one rows and clauses.
    pub assignments_checked: usize,
    /// Assignments rejected by the exactly-one rows or clauses.
    pub assignments_pruned: usize,
    /// Feasible (assignment, grid point) pairs found.
    pub feasible_points: usize,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EquivalenceReport {
    pub forward: ForwardReport,
    pub backward: BackwardReport,
    pub bound_clip_warnings: Vec<ClipWarning>,
}

impl EquivalenceReport {
    pub fn equivalent(&self) -> bool {
        self.forward.failures.is_empty() && self.backward.failures.is_empty()
    }
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "forward: {} failures, backward: {} failures ({} points, {} assignments, {} feasible points)",
            self.forward.failures.len(),
            self.backward.failures.len(),
            self.forward.points_checked,
            self.backward.assignments_checked,
            self.backward.feasible_points
        )?;
        for (dir, fs) in [("forward", &self.forward.failures), ("backward", &self.backward.failures)] {
            for x in fs.iter().take(10) {
                writeln!(f, "  {dir} #{} {:?}: {}", x.point, x.inputs, x.reason)?;
            }
        }
        if !self.bound_clip_warnings.is_empty() {
            writeln!(f, "bound clip warnings: {}", self.bound_clip_warnings.len())?;
            for w in self.bound_clip_warnings.iter().take(10) {
                writeln!(
                    f,
                    "  #{} {} term {} `{}` gives {} outside [{}, {}]",
                    w.point, w.disjunction, w.term, w.constraint, w.value, w.lb, w.ub
                )?;
            }
        }
        write!(f, "verdict: {}", if self.equivalent() { "equivalent on grid" } else { "NOT equivalent" })
    }
}
