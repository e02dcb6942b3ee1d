//! Compiler from imperative if-else models to mixed-integer nonlinear programs.

pub mod cli;
pub mod dsl;
pub mod emit;
pub mod error;
pub mod fixtures;
pub mod ir;
pub mod normalize;
pub mod pipeline;
pub mod reform;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use pipeline::{compile, compile_program, Compilation};
pub use reform::{Method, ReformOptions};
pub use scalar::Scalar;

pub type Interval64 = ir::Interval<f64>;
pub type Interval32 = ir::Interval<f32>;
