//! Point evaluation of expressions.

use std::collections::{BTreeMap, HashMap};

use super::expr::{Expr, Func};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Source of variable values for [`eval_expr`].
pub trait Binding<T> {
    fn value(&self, name: &str) -> Option<T>;
}

impl<T: Copy> Binding<T> for HashMap<String, T> {
    fn value(&self, name: &str) -> Option<T> {
        self.get(name).copied()
    }
}

impl<T: Copy> Binding<T> for BTreeMap<String, T> {
    fn value(&self, name: &str) -> Option<T> {
        self.get(name).copied()
    }
}

impl<T, F: Fn(&str) -> Option<T>> Binding<T> for F {
    fn value(&self, name: &str) -> Option<T> {
        self(name)
    }
}

pub(crate) fn is_integral(e: f64) -> bool {
    e.fract() == 0.0 && e.abs() <= i32::MAX as f64
}

/// Evaluates `e` at a point. Division by zero and out-of-domain calls are errors.
pub fn eval_expr<T: Scalar>(e: &Expr, b: &impl Binding<T>) -> Result<T> {
    Ok(match e {
        Expr::Const(c) => T::lit(*c),
        Expr::Var(v) => b
            .value(v)
            .ok_or_else(|| Error::Domain(format!("variable `{v}` is unbound")))?,
        Expr::Neg(a) => -eval_expr(a, b)?,
        Expr::Add(x, y) => eval_expr(x, b)? + eval_expr(y, b)?,
        Expr::Sub(x, y) => eval_expr(x, b)? - eval_expr(y, b)?,
        Expr::Mul(x, y) => eval_expr(x, b)? * eval_expr(y, b)?,
        Expr::Div(x, y) => {
            let d = eval_expr(y, b)?;
            if d == T::zero() {
                return Err(Error::Domain(format!("division by zero in `{e}`")));
            }
            eval_expr(x, b)? / d
        }
        Expr::Pow(a, p) => {
            let base = eval_expr(a, b)?;
            if base == T::zero() && *p < 0.0 {
                return Err(Error::Domain(format!("zero raised to negative power in `{e}`")));
            }
            if is_integral(*p) {
                base.powi(*p as i32)
            } else if base < T::zero() {
                return Err(Error::Domain(format!("negative base with fractional exponent in `{e}`")));
            } else {
                base.powf(T::lit(*p))
            }
        }
        Expr::Call(f, a) => {
            let x = eval_expr(a, b)?;
            match f {
                Func::Exp => x.exp(),
                Func::Log if x <= T::zero() => {
                    return Err(Error::Domain(format!("log of nonpositive value in `{e}`")))
                }
                Func::Log => x.ln(),
                Func::Sqrt if x < T::zero() => {
                    return Err(Error::Domain(format!("sqrt of negative value in `{e}`")))
                }
                Func::Sqrt => x.sqrt(),
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Abs => x.abs(),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn linear_expression() {
        // r*x + alpha with r=2, x=3, alpha=5
        let e = Expr::add(Expr::mul(Expr::var("r"), Expr::var("x")), Expr::var("alpha"));
        let v: f64 = eval_expr(&e, &at(&[("r", 2.0), ("x", 3.0), ("alpha", 5.0)])).unwrap();
        assert_eq!(v, 11.0);
    }

    #[test]
    fn zeroth_power_is_one() {
        let e = Expr::pow(Expr::var("x"), 0.0);
        assert_eq!(eval_expr::<f64>(&e, &at(&[("x", 7.0)])).unwrap(), 1.0);
    }

    #[test]
    fn log_at_zero_is_domain_error() {
        let e = Expr::call(Func::Log, Expr::var("x"));
        assert!(matches!(eval_expr::<f64>(&e, &at(&[("x", 0.0)])), Err(Error::Domain(_))));
    }

    #[test]
    fn evaluates_in_single_precision() {
        let e = Expr::mul(Expr::var("x"), Expr::cst(0.5));
        let b = |n: &str| (n == "x").then_some(3.0f32);
        assert_eq!(eval_expr::<f32>(&e, &b).unwrap(), 1.5f32);
    }
}
