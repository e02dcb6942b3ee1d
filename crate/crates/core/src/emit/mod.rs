//! Serialization of MINLP models: canonical JSON and algebraic text.

mod json;
mod text;

pub use json::{emit_json, expr_from_prefix, expr_to_prefix, parse_json, SCHEMA_VERSION};
pub use text::emit_algebraic;
