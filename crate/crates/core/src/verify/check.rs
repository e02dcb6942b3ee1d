use std::collections::BTreeSet;

use super::grid::GridSpec;
use super::interp::{admissible, interpret, interpret_traced, Env};
use super::report::{BackwardReport, ClipWarning, EquivalenceReport, Failure, ForwardReport};
use crate::dsl::{Comparison, IfElseProgram};
use crate::error::{Error, Result};
use crate::ir::{
    eval_expr, Constraint, DisjunctTerm, Disjunction, DisjunctionOrigin, GdpModel, MinlpModel, Role, ScheduleItem,
    Variable, FEAS_TOL,
};
use crate::normalize::BlockSplit;
use crate::pipeline::Compilation;
use crate::reform::{names, Method};

/// Hard cap on `2^(number of indicators)` for backward enumeration.
pub const MAX_ASSIGNMENTS: u128 = 1 << 16;
const MAX_CANDIDATES: f64 = 4096.0;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= FEAS_TOL * (1.0 + b.abs())
}

fn clamp(v: f64, x: &Variable) -> f64 {
    v.max(x.lb).min(x.ub)
}

/// Result of completing one point of the original variables to the MINLP.
struct Completed {
    point: Env,
    /// `(disjunction, term)` copies whose equalities leave the box.
    clipped: BTreeSet<(String, usize)>,
    clips: Vec<(String, usize, String, f64, f64, f64)>,
    /// Inactive copies with no feasible value at all.
    infeasible: Vec<String>,
}

enum Copy {
    Solved(Env),
    Clipped(Env, String, f64),
    Infeasible,
}

pub(crate) struct Verifier<'a> {
    method: Method,
    source: &'a IfElseProgram,
    flat: &'a IfElseProgram,
    gdp: &'a GdpModel,
    minlp: &'a MinlpModel,
    splits: &'a [BlockSplit],
    params: Env,
}

impl<'a> Verifier<'a> {
    pub(crate) fn new(c: &'a Compilation) -> Result<Self> {
        let gdp = &c.normalized.gdp;
        for row in &c.minlp.constraints {
            let p = c.minlp.provenance.get(&row.label).ok_or_else(|| Error::ProvenanceMissing(row.label.clone()))?;
            if let Some(k) = &p.disjunction {
                if gdp.disjunction(k).is_none() {
                    return Err(Error::ProvenanceMissing(format!("{} names unknown disjunction {k}", row.label)));
                }
            }
        }
        Ok(Verifier {
            method: c.options.method,
            source: &c.normalized.source,
            flat: c.normalized.program(),
            gdp,
            minlp: &c.minlp,
            splits: &c.normalized.split.blocks,
            params: c.normalized.program().param_binding(),
        })
    }

    fn binding<'b>(&'b self, env: &'b Env) -> impl Fn(&str) -> Option<f64> + 'b {
        move |v: &str| env.get(v).or_else(|| self.params.get(v)).copied()
    }

    fn atoms(&self, block: usize) -> &[Comparison] {
        match &self.splits[block - 1] {
            BlockSplit::Split(a) => &a.atoms,
            BlockSplit::Fused => &[],
        }
    }

    /// Term selected in each disjunction by an interpreter run (0-based).
    fn selection(&self, env: &Env, trace: &[usize]) -> Result<Vec<usize>> {
        let b = self.binding(env);
        self.gdp
            .disjunctions
            .iter()
            .map(|d| {
                Ok(match d.origin {
                    DisjunctionOrigin::Block { block, .. } => trace[block - 1],
                    DisjunctionOrigin::Atom { block, atom } => usize::from(!self.atoms(block)[atom - 1].holds(&b)?),
                    DisjunctionOrigin::AtomGroup { block } => {
                        let atoms = self.atoms(block);
                        let mut pick = atoms.len();
                        for (i, a) in atoms.iter().enumerate() {
                            if a.holds(&b)? {
                                pick = i;
                                break;
                            }
                        }
                        pick
                    }
                })
            })
            .collect()
    }

    /// Values of the original model variables implied by a term selection:
    /// globals and active assignments evaluated in schedule order.
    fn chain(&self, inputs: &Env, sel: &[usize]) -> Result<Env> {
        let mut env = inputs.clone();
        for item in &self.gdp.schedule {
            match item {
                ScheduleItem::Global(i) => {
                    let a = &self.gdp.globals[*i];
                    let v = eval_expr(&a.rhs, &self.binding(&env))?;
                    env.insert(a.target.clone(), v);
                }
                ScheduleItem::Disjunction(i) => {
                    for a in &self.gdp.disjunctions[*i].terms[sel[*i]].assignments {
                        let v = eval_expr(&a.rhs, &self.binding(&env))?;
                        env.insert(a.target.clone(), v);
                    }
                }
            }
        }
        Ok(env)
    }

    /// Value for a copy of `d`'s term `t` that the selection leaves inactive.
    fn solve_copy(&self, d: &Disjunction, t: &DisjunctTerm, point: &Env) -> Copy {
        let disagg = self.gdp.disagg(&d.id);
        let targets: BTreeSet<&str> = t.assignments.iter().map(|a| a.target.as_str()).collect();
        let free: Vec<&Variable> = disagg
            .iter()
            .filter(|v| !targets.contains(v.as_str()))
            .filter_map(|v| self.gdp.variable(v))
            .collect();
        let per = if free.is_empty() { 1 } else { (MAX_CANDIDATES.powf(1.0 / free.len() as f64) as usize).clamp(2, 37) };
        let cands: Vec<Vec<f64>> = free
            .iter()
            .map(|x| {
                let mut c = vec![clamp(point.get(&x.name).copied().unwrap_or(0.0), x), x.lb, x.ub, clamp(0.0, x)];
                let u = per.saturating_sub(4).max(1);
                c.extend((0..u).map(|i| x.lb + (x.ub - x.lb) * (i as f64 + 0.5) / u as f64));
                let mut seen = Vec::new();
                for v in c {
                    if !seen.contains(&v) {
                        seen.push(v);
                    }
                }
                seen.truncate(per);
                seen
            })
            .collect();
        let mut idx = vec![0usize; free.len()];
        let mut clipped: Option<Copy> = None;
        loop {
            let mut local: Env = free.iter().zip(&idx).zip(&cands).map(|((x, &i), c)| (x.name.clone(), c[i])).collect();
            if let Some(outcome) = self.try_copy(disagg, t, point, &mut local) {
                match outcome {
                    Copy::Solved(_) => return outcome,
                    c @ Copy::Clipped(..) if clipped.is_none() => clipped = Some(c),
                    _ => {}
                }
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return clipped.unwrap_or(Copy::Infeasible);
                }
                idx[k] += 1;
                if idx[k] < cands[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    fn try_copy(&self, disagg: &[String], t: &DisjunctTerm, point: &Env, local: &mut Env) -> Option<Copy> {
        let mut clip: Option<(String, f64)> = None;
        for a in &t.assignments {
            let v = {
                let b = |n: &str| {
                    if disagg.iter().any(|d| d == n) {
                        local.get(n).or_else(|| point.get(n)).copied()
                    } else {
                        point.get(n).or_else(|| self.params.get(n)).copied()
                    }
                };
                eval_expr::<f64>(&a.rhs, &b).ok()?
            };
            if let Some(x) = self.gdp.variable(&a.target) {
                let tol = FEAS_TOL * (1.0 + v.abs());
                if (v < x.lb - tol || v > x.ub + tol) && clip.is_none() {
                    clip = Some((a.label.clone(), v));
                }
            }
            local.insert(a.target.clone(), v);
        }
        let b = |n: &str| {
            if disagg.iter().any(|d| d == n) {
                local.get(n).copied()
            } else {
                point.get(n).or_else(|| self.params.get(n)).copied()
            }
        };
        for c in &t.conditions {
            if !c.holds(&b).ok()? {
                return None;
            }
        }
        Some(match clip {
            None => Copy::Solved(local.clone()),
            Some((label, v)) => {
                for n in disagg {
                    if let (Some(x), Some(val)) = (self.gdp.variable(n), local.get_mut(n)) {
                        *val = clamp(*val, x);
                    }
                }
                Copy::Clipped(local.clone(), label, v)
            }
        })
    }

    fn complete(&self, vals: &Env, sel: &[usize]) -> Completed {
        let mut point = Env::new();
        for v in &self.gdp.variables {
            point.insert(v.name.clone(), vals.get(&v.name).copied().unwrap_or_else(|| clamp(0.0, v)));
        }
        let mut out = Completed { point: Env::new(), clipped: BTreeSet::new(), clips: vec![], infeasible: vec![] };
        for (d, &s) in self.gdp.disjunctions.iter().zip(sel) {
            let k = d.id.as_str();
            for (j, t) in d.terms.iter().enumerate() {
                let on = j == s;
                let jj = j + 1;
                point.insert(names::lam(k, jj), if on { 1.0 } else { 0.0 });
                let disagg = self.gdp.disagg(k);
                match self.method {
                    Method::BigM => {}
                    Method::HullEps => {
                        for v in disagg {
                            let x = if on { point[v] } else { 0.0 };
                            point.insert(names::nu(v, jj, k), x);
                        }
                    }
                    Method::TrueFalse => {
                        let hats: Env = if on {
                            disagg.iter().map(|v| (v.clone(), point[v])).collect()
                        } else {
                            match self.solve_copy(d, t, &point) {
                                Copy::Solved(h) => h,
                                Copy::Clipped(h, label, value) => {
                                    let target = t.assignments.iter().find(|a| a.label == label).map(|a| &a.target);
                                    let (lb, ub) = target
                                        .and_then(|n| self.gdp.variable(n))
                                        .map_or((f64::NAN, f64::NAN), |x| (x.lb, x.ub));
                                    out.clipped.insert((k.to_string(), jj));
                                    out.clips.push((k.to_string(), jj, label, value, lb, ub));
                                    h
                                }
                                Copy::Infeasible => {
                                    out.infeasible.push(format!("inactive copy of {k} term {jj} has no feasible value"));
                                    disagg.iter().map(|v| (v.clone(), point[v])).collect()
                                }
                            }
                        };
                        for v in disagg {
                            let h = hats.get(v).copied().unwrap_or(point[v]);
                            point.insert(names::xhat(v, jj, k), h);
                            point.insert(names::nu_t(v, jj, k), if on { h } else { 0.0 });
                            point.insert(names::nu_f(v, jj, k), if on { 0.0 } else { h });
                        }
                    }
                }
            }
        }
        out.point = point;
        out
    }

    /// Rows and bounds violated at a completed point, skipping rows of clipped copies.
    fn violations(&self, c: &Completed) -> Vec<(Option<String>, Option<f64>, String)> {
        let mut out = Vec::new();
        for v in &self.minlp.variables {
            match c.point.get(&v.name) {
                None => out.push((None, None, format!("no value for `{}`", v.name))),
                Some(&x) => {
                    let tol = FEAS_TOL * (1.0 + x.abs());
                    if x < v.lb - tol || x > v.ub + tol {
                        let d = (v.lb - x).max(x - v.ub);
                        out.push((None, Some(d), format!("`{}` = {x} outside [{}, {}]", v.name, v.lb, v.ub)));
                    }
                }
            }
        }
        for row in &self.minlp.constraints {
            let p = &self.minlp.provenance[&row.label];
            if p.role == Role::Term {
                if let (Some(k), Some(j)) = (&p.disjunction, p.term) {
                    if c.clipped.contains(&(k.clone(), j)) {
                        continue;
                    }
                }
            }
            match row.holds(&c.point) {
                Ok(true) => {}
                Ok(false) => {
                    let v = row.violation(&c.point).unwrap_or(f64::NAN);
                    out.push((Some(row.label.clone()), Some(v), format!("row `{}` violated by {v:e}: {row}", row.label)));
                }
                Err(e) => out.push((Some(row.label.clone()), None, format!("row `{}`: {e}", row.label))),
            }
        }
        out
    }

    pub(crate) fn forward(&self, grid: &GridSpec, clips: &mut Vec<ClipWarning>) -> ForwardReport {
        let mut rep = ForwardReport::default();
        for (i, inputs) in grid.points().enumerate() {
            rep.points_checked += 1;
            let fail = |row: Option<String>, sel: Option<Vec<usize>>, reason: String| Failure {
                point: i,
                inputs: inputs.clone(),
                row,
                selection: sel,
                violation: None,
                reason,
            };
            let src = match interpret(self.source, &inputs) {
                Ok(e) => e,
                Err(e) => {
                    rep.failures.push(fail(None, None, format!("interpreter: {e}")));
                    continue;
                }
            };
            let (env, trace) = match interpret_traced(self.flat, &inputs) {
                Ok(r) => r,
                Err(e) => {
                    rep.failures.push(fail(None, None, format!("normalized interpreter: {e}")));
                    continue;
                }
            };
            for (v, x) in &src {
                if self.source.decl(v).is_some() && !env.get(v).is_some_and(|y| close(*y, *x)) {
                    rep.failures.push(fail(None, None, format!("normalized program disagrees on `{v}`")));
                }
            }
            let sel = match self.selection(&env, &trace) {
                Ok(s) => s,
                Err(e) => {
                    rep.failures.push(fail(None, None, format!("selection: {e}")));
                    continue;
                }
            };
            let done = self.complete(&env, &sel);
            let one_based: Vec<usize> = sel.iter().map(|j| j + 1).collect();
            for (k, j, label, value, lb, ub) in &done.clips {
                clips.push(ClipWarning {
                    point: i,
                    disjunction: k.clone(),
                    term: *j,
                    constraint: label.clone(),
                    value: *value,
                    lb: *lb,
                    ub: *ub,
                });
            }
            for r in &done.infeasible {
                rep.failures.push(fail(None, Some(one_based.clone()), r.clone()));
            }
            for (row, v, reason) in self.violations(&done) {
                rep.failures.push(Failure { violation: v, ..fail(row, Some(one_based.clone()), reason) });
            }
        }
        rep
    }

    fn selections(&self) -> Result<(Vec<Vec<usize>>, usize)> {
        let bins: usize = self.gdp.disjunctions.iter().map(|d| d.terms.len()).sum();
        let raw = if bins >= 127 { u128::MAX } else { 1u128 << bins };
        if raw > MAX_ASSIGNMENTS {
            return Err(Error::TooManyBinaries(raw));
        }
        let sizes: Vec<usize> = self.gdp.disjunctions.iter().map(|d| d.terms.len()).collect();
        let logic: Vec<&Constraint> = self
            .minlp
            .constraints
            .iter()
            .filter(|c| matches!(self.minlp.provenance[&c.label].role, Role::LogicClause | Role::ExactlyOne))
            .collect();
        let mut kept = Vec::new();
        let mut pruned = 0;
        let mut sel = vec![0usize; sizes.len()];
        loop {
            let mut lam = Env::new();
            for (d, &s) in self.gdp.disjunctions.iter().zip(&sel) {
                for j in 0..d.terms.len() {
                    lam.insert(names::lam(&d.id, j + 1), if j == s { 1.0 } else { 0.0 });
                }
            }
            if logic.iter().all(|c| c.holds(&lam).unwrap_or(false)) {
                kept.push(sel.clone());
            } else {
                pruned += 1;
            }
            let mut k = 0;
            loop {
                if k == sel.len() {
                    return Ok((kept, pruned));
                }
                sel[k] += 1;
                if sel[k] < sizes[k] {
                    break;
                }
                sel[k] = 0;
                k += 1;
            }
        }
    }

    pub(crate) fn backward(&self, grid: &GridSpec) -> Result<BackwardReport> {
        let (sels, pruned) = self.selections()?;
        let mut rep = BackwardReport { assignments_checked: sels.len(), assignments_pruned: pruned, ..Default::default() };
        let decl: Vec<&str> = self.source.decls.iter().map(|v| v.name.as_str()).collect();
        for (i, inputs) in grid.points().enumerate() {
            let runs = match admissible(self.source, &inputs) {
                Ok(r) => r,
                Err(e) => {
                    rep.failures.push(Failure { point: i, inputs, row: None, selection: None, violation: None, reason: e.to_string() });
                    continue;
                }
            };
            for sel in &sels {
                let Ok(vals) = self.chain(&inputs, sel) else { continue };
                let active_ok = self.gdp.disjunctions.iter().zip(sel).all(|(d, &s)| {
                    d.terms[s].conditions.iter().all(|c| c.holds(&self.binding(&vals)).unwrap_or(false))
                });
                if !active_ok {
                    continue;
                }
                let done = self.complete(&vals, sel);
                if !done.infeasible.is_empty() || !done.clipped.is_empty() || !self.violations(&done).is_empty() {
                    continue;
                }
                rep.feasible_points += 1;
                let matches = runs.iter().any(|run| {
                    run.iter().filter(|(v, _)| decl.contains(&v.as_str())).all(|(v, x)| close(vals[v], *x))
                });
                if !matches {
                    let proj: Vec<String> = decl.iter().map(|v| format!("{v}={}", vals[*v])).collect();
                    rep.failures.push(Failure {
                        point: i,
                        inputs: inputs.clone(),
                        row: None,
                        selection: Some(sel.iter().map(|j| j + 1).collect()),
                        violation: None,
                        reason: format!("feasible point projects to {} which no admissible run produces", proj.join(", ")),
                    });
                }
            }
        }
        Ok(rep)
    }
}

/// Forward check: every interpreter run on the grid extends to a feasible
/// MINLP point.
pub fn check_forward(c: &Compilation, grid: &GridSpec) -> Result<(ForwardReport, Vec<ClipWarning>)> {
    let v = Verifier::new(c)?;
    let mut clips = Vec::new();
    let rep = v.forward(grid, &mut clips);
    Ok((rep, clips))
}

/// Backward check: every feasible completion of every admissible binary
/// assignment projects onto an interpreter run.
pub fn check_backward(c: &Compilation, grid: &GridSpec) -> Result<BackwardReport> {
    Verifier::new(c)?.backward(grid)
}

pub fn verify(c: &Compilation, grid: &GridSpec) -> Result<EquivalenceReport> {
    let (forward, bound_clip_warnings) = check_forward(c, grid)?;
    let backward = check_backward(c, grid)?;
    Ok(EquivalenceReport { forward, backward, bound_clip_warnings })
}
