use std::fmt;

use super::ast::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagCode {
    /// Unbounded variable used inside a conditional block.
    Unbounded,
    /// Dependent variable read before any assignment.
    ReadBeforeAssign,
    /// Branch that can never fire because an earlier condition always holds.
    Unreachable,
    /// Assignment overwritten before being read.
    DeadAssign,
    /// `<` or `>` coerced to `<=` or `>=`.
    StrictCoerced,
}

impl DiagCode {
    pub fn code(self) -> &'static str {
        match self {
            DiagCode::Unbounded => "D_UNBOUNDED",
            DiagCode::ReadBeforeAssign => "D_READ_BEFORE_ASSIGN",
            DiagCode::Unreachable => "D_UNREACHABLE",
            DiagCode::DeadAssign => "D_DEAD_ASSIGN",
            DiagCode::StrictCoerced => "D_STRICT_COERCED",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub code: DiagCode,
    pub severity: Severity,
    /// Variable or construct the diagnostic is about.
    pub subject: String,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn new(code: DiagCode, severity: Severity, subject: &str, message: String, span: Span) -> Self {
        Diagnostic { code, severity, subject: subject.to_string(), message, span }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(
            f,
            "{sev}: {}({}) at {}:{}: {}",
            self.code.code(),
            self.subject,
            self.span.line,
            self.span.col,
            self.message
        )
    }
}
