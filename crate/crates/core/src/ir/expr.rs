//! Algebraic expression trees.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Elementary functions admitted in expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Abs,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Exp, Func::Log, Func::Sqrt, Func::Sin, Func::Cos, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree. `Pow` exponents are constants so interval evaluation stays total.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn cst(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, e: f64) -> Expr {
        Expr::Pow(Box::new(a), e)
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    /// Left-folded sum; an empty sum is the constant 0.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut it = terms.into_iter();
        match it.next() {
            None => Expr::Const(0.0),
            Some(first) => it.fold(first, Expr::add),
        }
    }

    /// `c * e` with the trivial factors 0 and 1 folded away.
    pub fn scaled(c: f64, e: Expr) -> Expr {
        if c == 0.0 {
            Expr::Const(0.0)
        } else if c == 1.0 {
            e
        } else {
            Expr::mul(Expr::Const(c), e)
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Variable names in first-occurrence order.
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        self.visit_vars(&mut |v| {
            if seen.insert(v.to_string()) {
                out.push(v.to_string());
            }
        });
        out
    }

    pub fn mentions(&self, name: &str) -> bool {
        let mut hit = false;
        self.visit_vars(&mut |v| hit |= v == name);
        hit
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(&str)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => f(v),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.visit_vars(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    /// Replaces every variable for which `f` returns `Some`.
    pub fn substitute(&self, f: &impl Fn(&str) -> Option<Expr>) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(v) => f(v).unwrap_or_else(|| Expr::Var(v.clone())),
            Expr::Neg(a) => Expr::neg(a.substitute(f)),
            Expr::Add(a, b) => Expr::add(a.substitute(f), b.substitute(f)),
            Expr::Sub(a, b) => Expr::sub(a.substitute(f), b.substitute(f)),
            Expr::Mul(a, b) => Expr::mul(a.substitute(f), b.substitute(f)),
            Expr::Div(a, b) => Expr::div(a.substitute(f), b.substitute(f)),
            Expr::Pow(a, e) => Expr::pow(a.substitute(f), *e),
            Expr::Call(g, a) => Expr::call(*g, a.substitute(f)),
        }
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> Expr {
        self.substitute(&|v| map.get(v).map(|n| Expr::Var(n.clone())))
    }

    pub fn rename_with(&self, f: &impl Fn(&str) -> Option<String>) -> Expr {
        self.substitute(&|v| f(v).map(Expr::Var))
    }

    /// True when the expression is affine in every variable (linear rows).
    pub fn is_affine(&self) -> bool {
        affine_split(self, &|_| true).is_some()
    }

    /// Number of nodes; used to bound generated trees in tests.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => 1 + a.size(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if *c < 0.0 => 0,
            Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.write_prec(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Const(c) => write!(f, "{}", fmt_num(*c)),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                // `-(2)` keeps a negated literal distinct from a negative literal.
                if matches!(**a, Expr::Const(_)) {
                    write!(f, "-(")?;
                    a.write_prec(f, 0)?;
                    write!(f, ")")
                } else {
                    write!(f, "-")?;
                    a.write_prec(f, 4)
                }
            }
            Expr::Add(a, b) => {
                a.write_prec(f, 1)?;
                write!(f, " + ")?;
                b.write_prec(f, 2)
            }
            Expr::Sub(a, b) => {
                a.write_prec(f, 1)?;
                write!(f, " - ")?;
                b.write_prec(f, 2)
            }
            Expr::Mul(a, b) => {
                a.write_prec(f, 2)?;
                write!(f, " * ")?;
                b.write_prec(f, 3)
            }
            Expr::Div(a, b) => {
                a.write_prec(f, 2)?;
                write!(f, " / ")?;
                b.write_prec(f, 3)
            }
            Expr::Pow(a, e) => {
                a.write_prec(f, 5)?;
                if *e < 0.0 {
                    write!(f, "^({})", fmt_num(*e))
                } else {
                    write!(f, "^{}", fmt_num(*e))
                }
            }
            Expr::Call(g, a) => {
                write!(f, "{}(", g.name())?;
                a.write_prec(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    format!("{v}")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

/// Affine decomposition `e = Σ coef_v · v + rest` over the variables selected by
/// `pick`. Coefficients and `rest` are free of picked variables but may mention
/// others. Returns `None` when `e` is not affine in the picked variables.
pub fn affine_split(
    e: &Expr,
    pick: &impl Fn(&str) -> bool,
) -> Option<(BTreeMap<String, Expr>, Expr)> {
    fn free(e: &Expr, pick: &impl Fn(&str) -> bool) -> bool {
        let mut ok = true;
        e.visit_vars(&mut |v| ok &= !pick(v));
        ok
    }
    fn scale(
        (coefs, rest): (BTreeMap<String, Expr>, Expr),
        k: &Expr,
        div: bool,
    ) -> (BTreeMap<String, Expr>, Expr) {
        let op = |x: Expr| {
            if div {
                Expr::div(x, k.clone())
            } else {
                Expr::mul(k.clone(), x)
            }
        };
        (coefs.into_iter().map(|(v, c)| (v, op(c))).collect(), op(rest))
    }
    if free(e, pick) {
        return Some((BTreeMap::new(), e.clone()));
    }
    match e {
        Expr::Var(v) => Some((
            BTreeMap::from([(v.clone(), Expr::Const(1.0))]),
            Expr::Const(0.0),
        )),
        Expr::Neg(a) => {
            let (c, r) = affine_split(a, pick)?;
            Some((c.into_iter().map(|(v, x)| (v, Expr::neg(x))).collect(), Expr::neg(r)))
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let minus = matches!(e, Expr::Sub(..));
            let (mut ca, ra) = affine_split(a, pick)?;
            let (cb, rb) = affine_split(b, pick)?;
            for (v, x) in cb {
                let x = if minus { Expr::neg(x) } else { x };
                let merged = match ca.remove(&v) {
                    Some(prev) => Expr::add(prev, x),
                    None => x,
                };
                ca.insert(v, merged);
            }
            let rest = if minus { Expr::sub(ra, rb) } else { Expr::add(ra, rb) };
            Some((ca, rest))
        }
        Expr::Mul(a, b) => {
            if free(a, pick) {
                Some(scale(affine_split(b, pick)?, a, false))
            } else if free(b, pick) {
                Some(scale(affine_split(a, pick)?, b, false))
            } else {
                None
            }
        }
        Expr::Div(a, b) if free(b, pick) => Some(scale(affine_split(a, pick)?, b, true)),
        Expr::Pow(a, p) if *p == 1.0 => affine_split(a, pick),
        _ => None,
    }
}

/// Structural equality up to a consistent, injective renaming of variables.
pub fn equal_modulo_renaming(a: &Expr, b: &Expr) -> bool {
    fn go(
        a: &Expr,
        b: &Expr,
        fwd: &mut BTreeMap<String, String>,
        bwd: &mut BTreeMap<String, String>,
    ) -> bool {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => x.to_bits() == y.to_bits(),
            (Expr::Var(x), Expr::Var(y)) => {
                let f = fwd.entry(x.clone()).or_insert_with(|| y.clone()).clone();
                let g = bwd.entry(y.clone()).or_insert_with(|| x.clone()).clone();
                &f == y && &g == x
            }
            (Expr::Neg(x), Expr::Neg(y)) => go(x, y, fwd, bwd),
            (Expr::Pow(x, p), Expr::Pow(y, q)) => p.to_bits() == q.to_bits() && go(x, y, fwd, bwd),
            (Expr::Call(f, x), Expr::Call(g, y)) => f == g && go(x, y, fwd, bwd),
            (Expr::Add(a1, a2), Expr::Add(b1, b2))
            | (Expr::Sub(a1, a2), Expr::Sub(b1, b2))
            | (Expr::Mul(a1, a2), Expr::Mul(b1, b2))
            | (Expr::Div(a1, a2), Expr::Div(b1, b2)) => go(a1, b1, fwd, bwd) && go(a2, b2, fwd, bwd),
            _ => false,
        }
    }
    go(a, b, &mut BTreeMap::new(), &mut BTreeMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_respects_associativity() {
        let e = Expr::sub(Expr::var("a"), Expr::sub(Expr::var("b"), Expr::var("c")));
        assert_eq!(e.to_string(), "a - (b - c)");
        let e = Expr::pow(Expr::add(Expr::var("x"), Expr::cst(1.0)), 2.0);
        assert_eq!(e.to_string(), "(x + 1)^2");
        let e = Expr::mul(Expr::cst(-2.0), Expr::var("x"));
        assert_eq!(e.to_string(), "(-2) * x");
        assert_eq!(Expr::neg(Expr::cst(2.0)).to_string(), "-(2)");
    }

    #[test]
    fn affine_split_keeps_shared_coefficients() {
        // 3*E - x*PC + x^2 over {E, PC}
        let e = Expr::add(
            Expr::sub(
                Expr::mul(Expr::cst(3.0), Expr::var("E")),
                Expr::mul(Expr::var("x"), Expr::var("PC")),
            ),
            Expr::pow(Expr::var("x"), 2.0),
        );
        let (coefs, rest) = affine_split(&e, &|v| v == "E" || v == "PC").unwrap();
        assert_eq!(coefs.len(), 2);
        assert_eq!(rest.vars(), vec!["x".to_string()]);
        assert!(affine_split(&Expr::pow(Expr::var("E"), 2.0), &|v| v == "E").is_none());
    }

    #[test]
    fn renaming_must_be_consistent() {
        let a = Expr::add(Expr::var("x"), Expr::var("x"));
        let b = Expr::add(Expr::var("y"), Expr::var("y"));
        let c = Expr::add(Expr::var("y"), Expr::var("z"));
        assert!(equal_modulo_renaming(&a, &b));
        assert!(!equal_modulo_renaming(&a, &c));
        assert!(!equal_modulo_renaming(&c, &a));
    }
}
