//! Shared data model: expressions, constraints, GDP and MINLP containers.

pub mod eval;
pub mod expr;
pub mod interval;
pub mod logic;
pub mod model;

pub use eval::{eval_expr, Binding};
pub use expr::{affine_split, equal_modulo_renaming, fmt_num, Expr, Func};
pub use interval::{interval_bounds, Interval};
pub use logic::LogicProp;
pub use model::*;
