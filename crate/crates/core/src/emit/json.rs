use std::fmt::Write;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::ir::{Constraint, Expr, Func, MinlpModel, Origin, Provenance, Relation, VarKind, Variable};

pub const SCHEMA_VERSION: &str = "1";

fn num(out: &mut String, v: f64) {
    if v.is_finite() {
        let _ = write!(out, "{v:.16e}");
    } else {
        out.push_str("null");
    }
}

fn string(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("string serialization"));
}

fn op(e: &Expr) -> &'static str {
    match e {
        Expr::Add(..) => "+",
        Expr::Sub(..) => "-",
        Expr::Mul(..) => "*",
        Expr::Div(..) => "/",
        Expr::Neg(_) => "neg",
        Expr::Pow(..) => "^",
        Expr::Call(f, _) => f.name(),
        Expr::Const(_) | Expr::Var(_) => unreachable!(),
    }
}

/// Flat prefix tokens: numbers are constants, strings are operators,
/// function names or variables. Operator arity is fixed.
pub fn expr_to_prefix(e: &Expr) -> Vec<Value> {
    fn go(e: &Expr, out: &mut Vec<Value>) {
        match e {
            Expr::Const(c) => out.push(Value::from(*c)),
            Expr::Var(v) => out.push(Value::from(v.as_str())),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                out.push(Value::from(op(e)));
                go(a, out);
                go(b, out);
            }
            Expr::Neg(a) | Expr::Call(_, a) => {
                out.push(Value::from(op(e)));
                go(a, out);
            }
            Expr::Pow(a, p) => {
                out.push(Value::from("^"));
                go(a, out);
                out.push(Value::from(*p));
            }
        }
    }
    let mut out = Vec::new();
    go(e, &mut out);
    out
}

pub fn expr_from_prefix(tokens: &[Value]) -> Result<Expr> {
    fn go(it: &mut std::slice::Iter<'_, Value>) -> Result<Expr> {
        let bad = |m: &str| Error::Json(format!("expression: {m}"));
        let t = it.next().ok_or_else(|| bad("truncated"))?;
        if let Some(c) = t.as_f64() {
            return Ok(Expr::cst(c));
        }
        let s = t.as_str().ok_or_else(|| bad("token is neither number nor string"))?;
        Ok(match s {
            "+" => Expr::add(go(it)?, go(it)?),
            "-" => Expr::sub(go(it)?, go(it)?),
            "*" => Expr::mul(go(it)?, go(it)?),
            "/" => Expr::div(go(it)?, go(it)?),
            "neg" => Expr::neg(go(it)?),
            "^" => {
                let a = go(it)?;
                let p = it.next().and_then(Value::as_f64).ok_or_else(|| bad("`^` needs a numeric exponent"))?;
                Expr::pow(a, p)
            }
            name => match Func::from_name(name) {
                Some(f) => Expr::call(f, go(it)?),
                None => Expr::var(name),
            },
        })
    }
    let mut it = tokens.iter();
    let e = go(&mut it)?;
    if it.next().is_some() {
        return Err(Error::Json("expression: trailing tokens".into()));
    }
    Ok(e)
}

fn prefix(out: &mut String, e: &Expr) {
    out.push('[');
    for (i, t) in expr_to_prefix(e).iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        match t {
            Value::String(s) => string(out, s),
            v => num(out, v.as_f64().unwrap_or(f64::NAN)),
        }
    }
    out.push(']');
}

fn enum_name<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

/// Canonical compact JSON: variables by name, rows by label, groups sorted,
/// floats with 17 significant digits, infinite bounds as `null`.
pub fn emit_json(m: &MinlpModel) -> String {
    let mut m = m.clone();
    m.canonicalize();
    let mut out = String::new();
    out.push_str("{\"schema_version\":");
    string(&mut out, SCHEMA_VERSION);
    out.push_str(",\"variables\":[");
    for (i, v) in m.variables.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("{\"name\":");
        string(&mut out, &v.name);
        out.push_str(",\"lb\":");
        num(&mut out, v.lb);
        out.push_str(",\"ub\":");
        num(&mut out, v.ub);
        out.push_str(",\"kind\":");
        string(&mut out, &enum_name(&v.kind));
        out.push_str(",\"origin\":");
        string(&mut out, &enum_name(&v.origin));
        out.push('}');
    }
    out.push_str("],\"constraints\":[");
    for (i, c) in m.constraints.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("{\"label\":");
        string(&mut out, &c.label);
        out.push_str(",\"body\":");
        prefix(&mut out, &c.body);
        out.push_str(",\"relation\":");
        match &c.relation {
            Relation::Le => string(&mut out, "le"),
            Relation::Eq => string(&mut out, "eq"),
            Relation::Ge => string(&mut out, "ge"),
            Relation::Range(lo, hi) => {
                string(&mut out, "range");
                out.push_str(",\"lo\":");
                prefix(&mut out, lo);
                out.push_str(",\"hi\":");
                prefix(&mut out, hi);
            }
        }
        if let Some(p) = m.provenance.get(&c.label) {
            out.push_str(",\"provenance\":");
            out.push_str(&serde_json::to_string(p).expect("provenance serialization"));
        }
        out.push('}');
    }
    out.push_str("],\"exactly_one_groups\":[");
    for (i, g) in m.exactly_one_groups.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&serde_json::to_string(g).expect("group serialization"));
    }
    out.push_str("]}");
    out
}

fn field<'a>(v: &'a Value, k: &str) -> Result<&'a Value> {
    v.get(k).ok_or_else(|| Error::Json(format!("missing field `{k}`")))
}

fn text<'a>(v: &'a Value, k: &str) -> Result<&'a str> {
    field(v, k)?.as_str().ok_or_else(|| Error::Json(format!("`{k}` must be a string")))
}

fn bound(v: &Value, k: &str, inf: f64) -> Result<f64> {
    match field(v, k)? {
        Value::Null => Ok(inf),
        x => x.as_f64().ok_or_else(|| Error::Json(format!("`{k}` must be a number or null"))),
    }
}

fn tokens<'a>(v: &'a Value, k: &str) -> Result<&'a [Value]> {
    field(v, k)?.as_array().map(Vec::as_slice).ok_or_else(|| Error::Json(format!("`{k}` must be an array")))
}

fn from_name<T: serde::de::DeserializeOwned>(s: &str) -> Result<T> {
    serde_json::from_value(Value::from(s)).map_err(|e| Error::Json(e.to_string()))
}

/// Inverse of [`emit_json`].
pub fn parse_json(s: &str) -> Result<MinlpModel> {
    let doc: Value = serde_json::from_str(s).map_err(|e| Error::Json(e.to_string()))?;
    let version = text(&doc, "schema_version")?;
    if version != SCHEMA_VERSION {
        return Err(Error::Json(format!("unsupported schema_version `{version}`")));
    }
    let mut m = MinlpModel::default();
    for v in tokens(&doc, "variables")? {
        m.variables.push(Variable {
            name: text(v, "name")?.to_string(),
            lb: bound(v, "lb", f64::NEG_INFINITY)?,
            ub: bound(v, "ub", f64::INFINITY)?,
            kind: from_name::<VarKind>(text(v, "kind")?)?,
            origin: from_name::<Origin>(text(v, "origin")?)?,
        });
    }
    for c in tokens(&doc, "constraints")? {
        let relation = match text(c, "relation")? {
            "le" => Relation::Le,
            "eq" => Relation::Eq,
            "ge" => Relation::Ge,
            "range" => Relation::Range(expr_from_prefix(tokens(c, "lo")?)?, expr_from_prefix(tokens(c, "hi")?)?),
            r => return Err(Error::Json(format!("unknown relation `{r}`"))),
        };
        let row = Constraint::new(text(c, "label")?, expr_from_prefix(tokens(c, "body")?)?, relation);
        if let Some(p) = c.get("provenance") {
            let p: Provenance = serde_json::from_value(p.clone()).map_err(|e| Error::Json(e.to_string()))?;
            m.provenance.insert(row.label.clone(), p);
        }
        m.constraints.push(row);
    }
    for g in tokens(&doc, "exactly_one_groups")? {
        m.exactly_one_groups.push(serde_json::from_value(g.clone()).map_err(|e| Error::Json(e.to_string()))?);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_model() {
        assert_eq!(
            emit_json(&MinlpModel::default()),
            r#"{"schema_version":"1","variables":[],"constraints":[],"exactly_one_groups":[]}"#
        );
    }

    #[test]
    fn prefix_round_trip() {
        let e = Expr::sub(
            Expr::mul(Expr::cst(0.1), Expr::pow(Expr::var("x"), 2.0)),
            Expr::neg(Expr::call(Func::Log, Expr::div(Expr::var("y"), Expr::cst(3.0)))),
        );
        let t = expr_to_prefix(&e);
        assert_eq!(t[0], Value::from("-"));
        assert_eq!(expr_from_prefix(&t).unwrap(), e);
        assert!(expr_from_prefix(&t[..3]).is_err());
    }

    #[test]
    fn infinite_bounds_are_null() {
        let mut m = MinlpModel::default();
        m.push_var(Variable::continuous("E", f64::NEG_INFINITY, 3.0, Origin::User));
        let s = emit_json(&m);
        assert!(s.contains(r#""lb":null,"ub":3.0000000000000000e0"#), "{s}");
        assert_eq!(parse_json(&s).unwrap().variables, m.variables);
    }
}
