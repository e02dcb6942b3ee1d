use std::fmt::Write;

use crate::dsl::{Comparison, Condition, IfBlock, IfElseProgram, Statement};
use crate::ir::LogicProp;

/// How one top-level block's testing conditions are encoded.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockSplit {
    /// Every condition is a single comparison and sits inside the block's own terms.
    Fused,
    Split(AtomSplit),
}

/// Compound conditions broken into atomic comparisons, each with its own indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomSplit {
    /// Distinct atomic comparisons, in order of first appearance.
    pub atoms: Vec<Comparison>,
    /// Indicator of each atom (`Z_<b>_<i>`).
    pub z: Vec<String>,
    /// Complement indicators: one per atom (`Zn_<b>_<i>`), or a single
    /// shared one (`Zn_<b>`) when `grouped`.
    pub complement: Vec<String>,
    /// The only condition is a disjunction of atoms, encoded as one disjunction
    /// over the atoms plus a term for "none of them".
    pub grouped: bool,
    /// Links from indicator formulas to the block's branch indicators.
    pub links: Vec<LogicProp>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitProgram {
    pub program: IfElseProgram,
    /// One entry per top-level block, in program order.
    pub blocks: Vec<BlockSplit>,
}

impl SplitProgram {
    /// Program text followed by the indicator definitions and links as comments.
    pub fn describe(&self) -> String {
        let mut out = crate::dsl::pretty_print(&self.program);
        for (b, s) in self.blocks.iter().enumerate() {
            if let BlockSplit::Split(a) = s {
                let _ = writeln!(out, "# block {}", b + 1);
                for (z, c) in a.z.iter().zip(&a.atoms) {
                    let _ = writeln!(out, "#   {z}: {c}");
                }
                for l in &a.links {
                    let _ = writeln!(out, "#   {l}");
                }
            }
        }
        out
    }
}

pub fn branch_indicator(block: usize, j: usize) -> String {
    format!("Y_{block}_{j}")
}

/// Decide per block whether its conditions stay fused or get indicator variables.
pub fn split_conditions(p: &IfElseProgram) -> SplitProgram {
    let mut blocks = Vec::new();
    for s in &p.statements {
        if let Statement::If(b) = s {
            blocks.push(split_block(b, blocks.len() + 1));
        }
    }
    SplitProgram { program: p.clone(), blocks }
}

fn split_block(b: &IfBlock, block: usize) -> BlockSplit {
    if b.branches.iter().all(|br| br.cond.is_atomic()) {
        return BlockSplit::Fused;
    }
    let mut atoms: Vec<Comparison> = Vec::new();
    for br in &b.branches {
        for a in br.cond.atoms() {
            if !atoms.contains(&a) {
                atoms.push(a);
            }
        }
    }
    let z: Vec<String> = (1..=atoms.len()).map(|i| format!("Z_{block}_{i}")).collect();
    let grouped = b.branches.len() == 1 && matches!(b.branches[0].cond.nnf(), Condition::Or(ref xs) if xs.iter().all(|x| matches!(x, Condition::Cmp(_))));
    let complement = if grouped {
        vec![format!("Zn_{block}")]
    } else {
        (1..=atoms.len()).map(|i| format!("Zn_{block}_{i}")).collect()
    };
    let formula = |c: &Condition| to_formula(&c.nnf(), &atoms, &z);
    let conds: Vec<LogicProp> = b.branches.iter().map(|br| formula(&br.cond)).collect();
    let mut links = Vec::new();
    for j in 0..=conds.len() {
        let mut parts: Vec<LogicProp> = conds[..j].iter().map(|c| LogicProp::not(c.clone())).collect();
        if let Some(c) = conds.get(j) {
            parts.push(c.clone());
        }
        let ante = if parts.len() == 1 { parts.pop().unwrap() } else { LogicProp::And(parts) };
        links.push(LogicProp::implies(ante, LogicProp::var(branch_indicator(block, j + 1))));
    }
    BlockSplit::Split(AtomSplit { atoms, z, complement, grouped, links })
}

fn to_formula(c: &Condition, atoms: &[Comparison], z: &[String]) -> LogicProp {
    match c {
        Condition::Cmp(a) => {
            let i = atoms.iter().position(|x| x == a).expect("atom collected");
            LogicProp::var(&z[i])
        }
        Condition::And(xs) => LogicProp::And(xs.iter().map(|x| to_formula(x, atoms, z)).collect()),
        Condition::Or(xs) => LogicProp::Or(xs.iter().map(|x| to_formula(x, atoms, z)).collect()),
        Condition::Not(_) => unreachable!("conditions are in negation normal form"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;

    fn split(src: &str) -> BlockSplit {
        split_conditions(&parse_program(src).unwrap()).blocks.remove(0)
    }

    #[test]
    fn atomic_conditions_stay_fused() {
        let s = split("var E in [0,10]; var PC in [0,5]; if E >= 6 then PC = 1; else PC = 2; end");
        assert_eq!(s, BlockSplit::Fused);
    }

    #[test]
    fn conjunction_gets_two_indicators() {
        let s = split("var E in [0,10]; var PC in [0,5]; if E >= 2 and E <= 6 then PC = 1; else PC = 2; end");
        let BlockSplit::Split(a) = s else { panic!() };
        assert_eq!(a.z, vec!["Z_1_1", "Z_1_2"]);
        assert_eq!(a.complement, vec!["Zn_1_1", "Zn_1_2"]);
        assert!(!a.grouped);
        assert_eq!(a.links[0].to_string(), "((Z_1_1 and Z_1_2) => Y_1_1)");
        assert_eq!(a.links[1].to_string(), "(not (Z_1_1 and Z_1_2) => Y_1_2)");
    }

    #[test]
    fn pure_disjunction_is_grouped() {
        let s = split("var a in [0,10]; var b in [0,10]; var P in [0,5]; if a >= 2 or b <= 6 then P = 1; else P = 2; end");
        let BlockSplit::Split(a) = s else { panic!() };
        assert!(a.grouped);
        assert_eq!(a.complement, vec!["Zn_1"]);
    }
}
