use std::collections::BTreeMap;

use crate::dsl::{CmpOp, Comparison, IfBlock, IfElseProgram, Statement};
use crate::error::Result;
use crate::ir::{
    affine_split, eval_expr, interval_bounds, Assignment, Constraint, DisjunctTerm, Disjunction,
    DisjunctionOrigin, Expr, GdpModel, Interval, ScheduleItem,
};

use super::split::{branch_indicator, AtomSplit, BlockSplit, SplitProgram};

struct Lowering<'a> {
    prog: &'a IfElseProgram,
    dom: BTreeMap<String, Interval<f64>>,
    gdp: GdpModel,
}

/// Turn the normalized program into disjunctions, global equations and logic links.
pub fn build_disjunctions(sp: &SplitProgram) -> Result<GdpModel> {
    let prog = &sp.program;
    let dom = prog.decls.iter().map(|v| (v.name.clone(), Interval::new(v.lb, v.ub))).collect();
    let mut l = Lowering { prog, dom, gdp: GdpModel { variables: prog.decls.clone(), ..GdpModel::default() } };
    let mut blocks = sp.blocks.iter();
    let mut block_no = 0;
    for s in &prog.statements {
        match s {
            Statement::Assign { target, rhs, .. } => {
                let label = format!("g{}", l.gdp.globals.len() + 1);
                let rhs = l.subst(rhs);
                l.gdp.schedule.push(ScheduleItem::Global(l.gdp.globals.len()));
                l.gdp.globals.push(Assignment { label, target: target.clone(), rhs });
            }
            Statement::If(b) => {
                block_no += 1;
                match blocks.next().expect("one split per block") {
                    BlockSplit::Fused => l.fused(b, block_no),
                    BlockSplit::Split(a) => l.split(b, block_no, a),
                }
            }
        }
    }
    l.gdp.check()?;
    Ok(l.gdp)
}

impl Lowering<'_> {
    fn subst(&self, e: &Expr) -> Expr {
        e.substitute(&|v| self.prog.param(v).map(Expr::cst))
    }

    fn is_param(&self, v: &str) -> bool {
        self.prog.param(v).is_some()
    }

    fn constraint(&self, c: &Comparison, label: String) -> Constraint {
        let mut k = c.to_constraint(label);
        k.body = self.subst(&k.body);
        k
    }

    /// Variables a comparison tests: those on its left side, or all of them when
    /// the left side is constant.
    fn subjects(&self, c: &Comparison) -> Vec<String> {
        let lhs: Vec<String> = c.lhs.vars().into_iter().filter(|v| !self.is_param(v)).collect();
        if !lhs.is_empty() {
            return lhs;
        }
        c.rhs.vars().into_iter().filter(|v| !self.is_param(v)).collect()
    }

    fn subjects_of(&self, atoms: &[Comparison]) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in atoms {
            for v in self.subjects(c) {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// `d <= 0` form of a comparison.
    fn oriented(&self, c: &Comparison) -> Expr {
        let (l, r) = (self.subst(&c.lhs), self.subst(&c.rhs));
        match c.op {
            CmpOp::Le => Expr::sub(l, r),
            CmpOp::Ge => Expr::sub(r, l),
        }
    }

    /// Sound check that `a` implies `b` on the variable box.
    fn implies(&self, a: &Comparison, b: &Comparison) -> bool {
        let diff = Expr::sub(self.oriented(b), self.oriented(a));
        let hi = match affine_split(&diff, &|_| true) {
            Some((coefs, rest)) => {
                let none = BTreeMap::<String, f64>::new();
                let mut acc = Interval::point(match eval_expr::<f64>(&rest, &none) {
                    Ok(v) => v,
                    Err(_) => return false,
                });
                for (v, c) in coefs {
                    let Ok(c) = eval_expr::<f64>(&c, &none) else { return false };
                    if c != 0.0 {
                        let Some(d) = self.dom.get(&v) else { return false };
                        acc = acc + Interval::point(c) * *d;
                    }
                }
                acc.hi
            }
            None => match interval_bounds(&diff, &self.dom) {
                Ok(r) => r.hi,
                Err(_) => return false,
            },
        };
        hi <= 0.0
    }

    fn term(&self, k: usize, j: usize, bool_var: String, conds: &[Comparison], body: &[Statement]) -> DisjunctTerm {
        let conditions =
            conds.iter().enumerate().map(|(i, c)| self.constraint(c, format!("k{k}_t{j}_c{}", i + 1))).collect();
        let assignments = body
            .iter()
            .enumerate()
            .map(|(i, s)| match s {
                Statement::Assign { target, rhs, .. } => Assignment {
                    label: format!("k{k}_t{j}_a{}", i + 1),
                    target: target.clone(),
                    rhs: self.subst(rhs),
                },
                Statement::If(_) => unreachable!("blocks are flat after normalization"),
            })
            .collect();
        DisjunctTerm { bool_var, conditions, assignments }
    }

    fn push(&mut self, terms: Vec<DisjunctTerm>, origin: DisjunctionOrigin, disagg: Vec<String>) {
        let id = format!("k{}", self.gdp.disjunctions.len() + 1);
        self.gdp.disagg_sets.insert(id.clone(), disagg);
        self.gdp.schedule.push(ScheduleItem::Disjunction(self.gdp.disjunctions.len()));
        self.gdp.disjunctions.push(Disjunction { id, terms, exactly_one: true, origin });
    }

    fn next_k(&self) -> usize {
        self.gdp.disjunctions.len() + 1
    }

    fn block_disagg(&self, b: &IfBlock, tested: &[Comparison]) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut add = |v: String| {
            if !out.contains(&v) {
                out.push(v);
            }
        };
        for c in tested {
            self.subjects(c).into_iter().for_each(&mut add);
        }
        for body in b.bodies() {
            for s in body {
                s.writes().into_iter().for_each(&mut add);
            }
        }
        b.disaggregate.iter().cloned().for_each(add);
        out
    }

    fn fused(&mut self, b: &IfBlock, block: usize) {
        let k = self.next_k();
        let atoms: Vec<Comparison> = b.branches.iter().map(|br| br.cond.atoms().remove(0)).collect();
        let mut terms = Vec::new();
        for (j, br) in b.branches.iter().enumerate() {
            let mut conds = vec![atoms[j].clone()];
            for earlier in &atoms[..j] {
                let neg = earlier.negated();
                if !self.implies(&atoms[j], &neg) {
                    conds.push(neg);
                }
            }
            terms.push(self.term(k, j + 1, branch_indicator(block, j + 1), &conds, &br.body));
        }
        let n = b.branches.len();
        let negs: Vec<Comparison> = atoms.iter().map(Comparison::negated).collect();
        let else_body = b.else_branch.as_deref().unwrap_or(&[]);
        terms.push(self.term(k, n + 1, branch_indicator(block, n + 1), &negs, else_body));
        let disagg = self.block_disagg(b, &atoms);
        self.push(terms, DisjunctionOrigin::Block { block, fused: true }, disagg);
    }

    fn split(&mut self, b: &IfBlock, block: usize, a: &AtomSplit) {
        if a.grouped {
            let k = self.next_k();
            let mut terms: Vec<DisjunctTerm> = a
                .atoms
                .iter()
                .zip(&a.z)
                .enumerate()
                .map(|(i, (c, z))| self.term(k, i + 1, z.clone(), std::slice::from_ref(c), &[]))
                .collect();
            let negs: Vec<Comparison> = a.atoms.iter().map(Comparison::negated).collect();
            terms.push(self.term(k, a.atoms.len() + 1, a.complement[0].clone(), &negs, &[]));
            let disagg = self.subjects_of(&a.atoms);
            self.push(terms, DisjunctionOrigin::AtomGroup { block }, disagg);
        } else {
            for (i, c) in a.atoms.iter().enumerate() {
                let k = self.next_k();
                let terms = vec![
                    self.term(k, 1, a.z[i].clone(), std::slice::from_ref(c), &[]),
                    self.term(k, 2, a.complement[i].clone(), &[c.negated()], &[]),
                ];
                let disagg = self.subjects_of(std::slice::from_ref(c));
                self.push(terms, DisjunctionOrigin::Atom { block, atom: i + 1 }, disagg);
            }
        }
        let k = self.next_k();
        let mut terms = Vec::new();
        for (j, body) in b.bodies().enumerate() {
            terms.push(self.term(k, j + 1, branch_indicator(block, j + 1), &[], body));
        }
        let disagg = self.block_disagg(b, &[]);
        self.push(terms, DisjunctionOrigin::Block { block, fused: false }, disagg);
        self.gdp.props.extend(a.links.iter().cloned());
    }
}
