//! Source language: lexer, parser, pretty printer and static checks.

mod ast;
mod diag;
mod lexer;
mod parser;
mod pretty;
mod validate;

pub use ast::*;
pub use diag::{DiagCode, Diagnostic, Severity};
pub use lexer::{tokenize, Tok, Token};
pub use parser::{parse_program, referenced};
pub use pretty::{condition_to_string, pretty_print};
pub use validate::validate;
