//! Source text to MINLP in one call.

use crate::dsl::{parse_program, IfElseProgram};
use crate::error::Result;
use crate::ir::MinlpModel;
use crate::normalize::{normalize, Normalized};
use crate::reform::{reformulate, ReformOptions, ReformStats};

#[derive(Debug, Clone)]
pub struct Compilation {
    pub normalized: Normalized,
    pub options: ReformOptions,
    pub minlp: MinlpModel,
    pub stats: ReformStats,
}

impl Compilation {
    pub fn source(&self) -> &IfElseProgram {
        &self.normalized.source
    }
}

pub fn compile_program(p: &IfElseProgram, opts: &ReformOptions) -> Result<Compilation> {
    let normalized = normalize(p)?;
    let (minlp, stats) = reformulate(&normalized.gdp, opts)?;
    Ok(Compilation { normalized, options: opts.clone(), minlp, stats })
}

pub fn compile(text: &str, opts: &ReformOptions) -> Result<Compilation> {
    compile_program(&parse_program(text)?, opts)
}
