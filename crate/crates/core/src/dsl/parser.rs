use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::ir::{eval_expr, Expr, Func, Origin, Variable};

use super::ast::*;
use super::diag::{DiagCode, Diagnostic, Severity};
use super::lexer::{tokenize, Tok, Token};

/// Parse `.gdp` source text.
pub fn parse_program(text: &str) -> Result<IfElseProgram> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, prog: IfElseProgram::default(), disagg: Vec::new() };
    p.program()?;
    Ok(p.prog)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    prog: IfElseProgram,
    disagg: Vec<Vec<String>>,
}

fn err_pos(e: &Error) -> (usize, usize) {
    match e {
        Error::Syntax { line, col, .. }
        | Error::Undeclared { line, col, .. }
        | Error::Redeclared { line, col, .. } => (*line, *col),
        _ => (0, 0),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T> {
        let s = self.span();
        Err(Error::Syntax { line: s.line, col: s.col, msg: msg.into() })
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            let found = self.peek().describe();
            self.fail(format!("expected {}, found {found}", t.describe()))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => self.fail(format!("expected identifier, found {}", t.describe())),
        }
    }

    fn program(&mut self) -> Result<()> {
        loop {
            match self.peek() {
                Tok::Eof => return Ok(()),
                Tok::Var => self.decl()?,
                Tok::Param => self.param()?,
                Tok::Disaggregate => return self.fail("'disaggregate' is only allowed inside an if-block"),
                _ => {
                    let s = self.stmt()?;
                    self.prog.statements.push(s);
                }
            }
        }
    }

    fn check_fresh(&self, name: &str, span: Span) -> Result<()> {
        if self.prog.is_declared(name) || Func::from_name(name).is_some() {
            return Err(Error::Redeclared { name: name.to_string(), line: span.line, col: span.col });
        }
        Ok(())
    }

    fn signed_num(&mut self, allow_inf: bool) -> Result<f64> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let v = match self.peek().clone() {
            Tok::Num(v) => v,
            Tok::Inf if allow_inf => f64::INFINITY,
            t => return self.fail(format!("expected number, found {}", t.describe())),
        };
        self.bump();
        Ok(if neg { -v } else { v })
    }

    fn decl(&mut self) -> Result<()> {
        self.expect(Tok::Var)?;
        let span = self.span();
        let name = self.ident()?;
        self.check_fresh(&name, span)?;
        let (lb, ub) = if *self.peek() == Tok::In {
            self.bump();
            self.expect(Tok::LBracket)?;
            let lb = self.signed_num(true)?;
            self.expect(Tok::Comma)?;
            let ub = self.signed_num(true)?;
            self.expect(Tok::RBracket)?;
            (lb, ub)
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        };
        if lb > ub || lb == f64::INFINITY || ub == f64::NEG_INFINITY {
            return Err(Error::Syntax {
                line: span.line,
                col: span.col,
                msg: format!("empty domain [{lb}, {ub}] for `{name}`"),
            });
        }
        self.expect(Tok::Semi)?;
        self.prog.decls.push(Variable::continuous(name, lb, ub, Origin::User));
        Ok(())
    }

    fn param(&mut self) -> Result<()> {
        self.expect(Tok::Param)?;
        let span = self.span();
        let name = self.ident()?;
        self.check_fresh(&name, span)?;
        self.expect(Tok::Assign)?;
        let v = self.signed_num(false)?;
        self.expect(Tok::Semi)?;
        self.prog.params.push((name, v));
        Ok(())
    }

    fn stmt(&mut self) -> Result<Statement> {
        match self.peek().clone() {
            Tok::If => self.if_block().map(Statement::If),
            Tok::Ident(name) => {
                let span = self.span();
                self.bump();
                if self.prog.param(&name).is_some() {
                    return Err(Error::Syntax {
                        line: span.line,
                        col: span.col,
                        msg: format!("cannot assign to parameter `{name}`"),
                    });
                }
                if self.prog.decl(&name).is_none() {
                    return Err(Error::Undeclared { name, line: span.line, col: span.col });
                }
                self.expect(Tok::Assign)?;
                let rhs = self.expr()?;
                self.expect(Tok::Semi)?;
                Ok(Statement::Assign { target: name, rhs, span })
            }
            t => self.fail(format!("expected statement, found {}", t.describe())),
        }
    }

    fn body(&mut self) -> Result<Vec<Statement>> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                Tok::Else | Tok::End => return Ok(out),
                Tok::Disaggregate => {
                    self.bump();
                    loop {
                        let span = self.span();
                        let v = self.ident()?;
                        if self.prog.decl(&v).is_none() {
                            return Err(Error::Undeclared { name: v, line: span.line, col: span.col });
                        }
                        let cur = self.disagg.last_mut().expect("inside block");
                        if !cur.contains(&v) {
                            cur.push(v);
                        }
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.expect(Tok::Semi)?;
                }
                _ => out.push(self.stmt()?),
            }
        }
    }

    fn if_block(&mut self) -> Result<IfBlock> {
        let span = self.span();
        self.expect(Tok::If)?;
        self.disagg.push(Vec::new());
        let mut branches = Vec::new();
        let mut else_branch = None;
        let mut bspan = span;
        loop {
            let cond = self.condition()?;
            self.expect(Tok::Then)?;
            let body = self.body()?;
            branches.push(Branch { cond, body, span: bspan });
            if *self.peek() == Tok::Else {
                self.bump();
                if *self.peek() == Tok::If {
                    bspan = self.span();
                    self.bump();
                    continue;
                }
                else_branch = Some(self.body()?);
            }
            break;
        }
        self.expect(Tok::End)?;
        let disaggregate = self.disagg.pop().unwrap_or_default();
        Ok(IfBlock { branches, else_branch, disaggregate, span })
    }

    fn condition(&mut self) -> Result<Condition> {
        let mut xs = vec![self.conjunction()?];
        while *self.peek() == Tok::Or {
            self.bump();
            xs.push(self.conjunction()?);
        }
        Ok(if xs.len() == 1 { xs.pop().unwrap() } else { Condition::Or(xs) })
    }

    fn conjunction(&mut self) -> Result<Condition> {
        let mut xs = vec![self.cond_unary()?];
        while *self.peek() == Tok::And {
            self.bump();
            xs.push(self.cond_unary()?);
        }
        Ok(if xs.len() == 1 { xs.pop().unwrap() } else { Condition::And(xs) })
    }

    fn cond_unary(&mut self) -> Result<Condition> {
        if *self.peek() == Tok::Not {
            self.bump();
            return Ok(Condition::Not(Box::new(self.cond_unary()?)));
        }
        let save = (self.pos, self.prog.warnings.len());
        let first = match self.comparison() {
            Ok(c) => return Ok(c),
            Err(e) => e,
        };
        self.pos = save.0;
        self.prog.warnings.truncate(save.1);
        if self.toks[self.pos].tok != Tok::LParen {
            return Err(first);
        }
        self.bump();
        let inner = self.condition().and_then(|c| self.expect(Tok::RParen).map(|_| c));
        match inner {
            Ok(c) => Ok(c),
            Err(second) => Err(if err_pos(&second) >= err_pos(&first) { second } else { first }),
        }
    }

    fn comparison(&mut self) -> Result<Condition> {
        let lhs = self.expr()?;
        let span = self.span();
        let (op, strict) = match self.peek() {
            Tok::Le => (CmpOp::Le, false),
            Tok::Ge => (CmpOp::Ge, false),
            Tok::Lt => (CmpOp::Le, true),
            Tok::Gt => (CmpOp::Ge, true),
            Tok::Assign => return self.fail("equality is not allowed in a condition"),
            t => {
                let t = t.describe();
                return self.fail(format!("expected comparison operator, found {t}"));
            }
        };
        self.bump();
        let rhs = self.expr()?;
        if strict {
            let c = Comparison { lhs: lhs.clone(), op, rhs: rhs.clone() };
            self.prog.warnings.push(Diagnostic::new(
                DiagCode::StrictCoerced,
                Severity::Warning,
                &c.to_string(),
                format!("strict comparison treated as `{c}`"),
                span,
            ));
        }
        Ok(Condition::cmp(lhs, op, rhs))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    e = Expr::add(e, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    e = Expr::sub(e, self.term()?);
                }
                _ => return Ok(e),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    e = Expr::mul(e, self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    e = Expr::div(e, self.unary()?);
                }
                _ => return Ok(e),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            if let Tok::Num(v) = *self.peek() {
                if *self.peek_at(1) != Tok::Caret {
                    self.bump();
                    return Ok(Expr::Const(-v));
                }
            }
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let span = self.span();
        let ex = self.unary()?;
        let params = self.prog.param_binding();
        match eval_expr::<f64>(&ex, &params) {
            Ok(k) if k.is_finite() => Ok(Expr::pow(base, k)),
            _ => Err(Error::Syntax {
                line: span.line,
                col: span.col,
                msg: format!("exponent `{ex}` must be a constant"),
            }),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if let (Some(f), Tok::LParen) = (Func::from_name(&name), self.peek()) {
                    self.bump();
                    let a = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Expr::call(f, a));
                }
                if !self.prog.is_declared(&name) {
                    return Err(Error::Undeclared { name, line: span.line, col: span.col });
                }
                Ok(Expr::var(name))
            }
            t => self.fail(format!("expected expression, found {}", t.describe())),
        }
    }
}

/// Identifiers referenced by a program, for diagnostics.
pub fn referenced(p: &IfElseProgram) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn go(stmts: &[Statement], out: &mut BTreeSet<String>) {
        for s in stmts {
            match s {
                Statement::Assign { target, rhs, .. } => {
                    out.insert(target.clone());
                    rhs.visit_vars(&mut |v| {
                        out.insert(v.to_string());
                    });
                }
                Statement::If(b) => {
                    for br in &b.branches {
                        out.extend(br.cond.reads());
                    }
                    b.bodies().for_each(|x| go(x, out));
                }
            }
        }
    }
    go(&p.statements, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_program_shape() {
        let p = parse_program("var x in [0,10]; param a = 4; p = 2*x; if p <= a then q = p + 1; else q = 0; end")
            .unwrap_err();
        assert!(matches!(p, Error::Undeclared { .. }));
        let p = parse_program(
            "var x in [0,10]; var p in [0,20]; var q in [0,21]; param a = 4; \
             p = 2*x; if p <= a then q = p + 1; else q = 0; end",
        )
        .unwrap();
        assert_eq!(p.statements.len(), 2);
        assert!(matches!(p.statements[0], Statement::Assign { .. }));
        match &p.statements[1] {
            Statement::If(b) => {
                assert_eq!(b.branches.len(), 1);
                assert!(b.else_branch.is_some());
            }
            _ => panic!(),
        }
    }

    #[test]
    fn else_if_chain_keeps_order() {
        let p = parse_program(
            "var E in [0,10]; var PC in [0,100];\n\
             if E >= 6 then PC = 3;\nelse if E <= 2 then PC = 1;\nelse PC = 2; end",
        )
        .unwrap();
        let Statement::If(b) = &p.statements[0] else { panic!() };
        assert_eq!(b.branches.len(), 2);
        assert_eq!(b.branches[0].span.line, 2);
        assert_eq!(b.branches[1].span.line, 3);
        assert_eq!(b.branches[1].cond.atoms()[0].op, CmpOp::Le);
    }

    #[test]
    fn malformed_operator() {
        let e = parse_program("var x in [0,1]; if x << 3 then x = 1; end").unwrap_err();
        assert!(e.to_string().starts_with("E_SYNTAX"));
    }

    #[test]
    fn redeclaration() {
        let e = parse_program("var x in [0,1]; param x = 2;").unwrap_err();
        assert!(matches!(e, Error::Redeclared { line: 1, col: 23, .. }), "{e:?}");
    }

    #[test]
    fn strict_comparison_warns() {
        let p = parse_program("var x in [0,1]; var y in [0,1]; if x < 0.5 then y = 1; else y = 0; end").unwrap();
        assert_eq!(p.warnings.len(), 1);
        assert_eq!(p.warnings[0].code, DiagCode::StrictCoerced);
    }

    #[test]
    fn parenthesised_conditions_and_expressions() {
        let p = parse_program(
            "var a in [0,1]; var b in [0,1]; var y in [0,1];\n\
             if (a <= 0.2 and b <= 0.3) or (a + 1) * 2 >= 3 then y = 1; else y = 0; end",
        )
        .unwrap();
        let Statement::If(blk) = &p.statements[0] else { panic!() };
        let Condition::Or(xs) = &blk.branches[0].cond else { panic!("{:?}", blk.branches[0].cond) };
        assert!(matches!(xs[0], Condition::And(_)));
        assert!(matches!(xs[1], Condition::Cmp(_)));
    }

    #[test]
    fn negative_literals_and_powers() {
        let p = parse_program("var x in [0,1]; var y in [-10,10]; y = -2*x^2 - x^-1 + -x^2;").unwrap();
        let Statement::Assign { rhs, .. } = &p.statements[0] else { panic!() };
        let v: f64 = eval_expr(rhs, &|n: &str| (n == "x").then_some(0.5)).unwrap();
        assert!((v - (-0.5 - 2.0 - 0.25)).abs() < 1e-12);
    }

    #[test]
    fn disaggregate_statement_attaches_to_block() {
        let p = parse_program(
            "var x in [0,1]; var y in [0,1]; if x <= 0.5 then disaggregate x; y = 1; else y = 0; end",
        )
        .unwrap();
        let Statement::If(blk) = &p.statements[0] else { panic!() };
        assert_eq!(blk.disaggregate, vec!["x".to_string()]);
    }

    #[test]
    fn unbounded_declaration() {
        let p = parse_program("var E; var z in [-inf, 3];").unwrap();
        assert!(p.decls[0].lb.is_infinite() && p.decls[0].ub.is_infinite());
        assert_eq!(p.decls[1].ub, 3.0);
    }
}
