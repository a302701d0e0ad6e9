use std::collections::BTreeSet;

use num_bigint::BigInt;

use crate::error::{Error, Result};

use super::ast::*;
use super::lexer::{tokenize, Tok};

pub fn parse(src: &str) -> Result<Program> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, at: 0 };
    let prog = p.program()?;
    check_declarations(&prog)?;
    Ok(prog)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

fn syntax(pos: Pos, message: String) -> Error {
    Error::Syntax {
        line: pos.line,
        column: pos.column,
        message,
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<Pos> {
        if *self.peek() == t {
            Ok(self.bump().1)
        } else {
            Err(syntax(self.pos(), format!("expected `{t}`, found `{}`", self.peek())))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos)> {
        match self.bump() {
            (Tok::Ident(s), p) => Ok((s, p)),
            (t, p) => Err(syntax(p, format!("expected identifier, found `{t}`"))),
        }
    }

    fn program(&mut self) -> Result<Program> {
        let mut prog = Program::default();
        while *self.peek() == Tok::KwInt {
            let pos = self.bump().1;
            let (name, _) = self.ident()?;
            let init = if *self.peek() == Tok::Assign {
                self.bump();
                Some(self.expr()?)
            } else {
                None
            };
            self.expect(Tok::Semi)?;
            prog.decls.push(Decl { name, init, pos });
        }
        while *self.peek() != Tok::Eof {
            prog.stmts.push(self.stmt()?);
        }
        Ok(prog)
    }

    fn block(&mut self) -> Result<Vec<Stmt>> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return Err(syntax(self.pos(), "unterminated block".into()));
            }
            out.push(self.stmt()?);
        }
        self.bump();
        Ok(out)
    }

    /// A braced block or a single statement.
    fn body(&mut self) -> Result<Vec<Stmt>> {
        if *self.peek() == Tok::LBrace {
            self.block()
        } else {
            Ok(vec![self.stmt()?])
        }
    }

    fn paren_cond(&mut self) -> Result<Cond> {
        self.expect(Tok::LParen)?;
        let c = self.cond()?;
        self.expect(Tok::RParen)?;
        Ok(c)
    }

    fn stmt(&mut self) -> Result<Stmt> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                let var = Expr::new(ExprKind::Var(name.clone()), pos);
                let (op, op_pos) = self.bump();
                let value = match op {
                    Tok::Assign => self.expr()?,
                    Tok::PlusAssign => {
                        let e = self.expr()?;
                        Expr::new(ExprKind::Add(Box::new(var), Box::new(e)), op_pos)
                    }
                    Tok::MinusAssign => {
                        let e = self.expr()?;
                        Expr::new(ExprKind::Sub(Box::new(var), Box::new(e)), op_pos)
                    }
                    Tok::PlusPlus | Tok::MinusMinus => {
                        let one = Box::new(Expr::new(ExprKind::Int(BigInt::from(1)), op_pos));
                        let k = if op == Tok::PlusPlus {
                            ExprKind::Add(Box::new(var), one)
                        } else {
                            ExprKind::Sub(Box::new(var), one)
                        };
                        Expr::new(k, op_pos)
                    }
                    t => return Err(syntax(op_pos, format!("expected assignment, found `{t}`"))),
                };
                self.expect(Tok::Semi)?;
                StmtKind::Assign(name, value)
            }
            Tok::If => {
                self.bump();
                let c = self.paren_cond()?;
                let then = self.body()?;
                let els = if *self.peek() == Tok::Else {
                    self.bump();
                    self.body()?
                } else {
                    Vec::new()
                };
                StmtKind::If(c, then, els)
            }
            Tok::While => {
                self.bump();
                let c = self.paren_cond()?;
                StmtKind::While(c, self.body()?)
            }
            Tok::Assert | Tok::Assume => {
                let (t, _) = self.bump();
                let c = self.paren_cond()?;
                self.expect(Tok::Semi)?;
                if t == Tok::Assert {
                    StmtKind::Assert(c)
                } else {
                    StmtKind::Assume(c)
                }
            }
            Tok::LBrace => StmtKind::Block(self.block()?),
            Tok::Semi => {
                self.bump();
                StmtKind::Block(Vec::new())
            }
            Tok::KwInt => return Err(syntax(pos, "declarations must precede statements".into())),
            t => return Err(syntax(pos, format!("unexpected `{t}`"))),
        };
        Ok(Stmt { kind, pos })
    }

    fn cond(&mut self) -> Result<Cond> {
        let mut c = self.conj()?;
        while *self.peek() == Tok::OrOr {
            self.bump();
            let r = self.conj()?;
            c = Cond::Or(Box::new(c), Box::new(r));
        }
        Ok(c)
    }

    fn conj(&mut self) -> Result<Cond> {
        let mut c = self.cond_atom()?;
        while *self.peek() == Tok::AndAnd {
            self.bump();
            let r = self.cond_atom()?;
            c = Cond::And(Box::new(c), Box::new(r));
        }
        Ok(c)
    }

    fn cond_atom(&mut self) -> Result<Cond> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Cond::Not(Box::new(self.cond_atom()?)))
            }
            Tok::True | Tok::False => {
                let b = *self.peek() == Tok::True;
                self.bump();
                Ok(Cond::Bool(b))
            }
            Tok::LParen => {
                // Either a parenthesized condition or an expression that
                // starts with a parenthesis.
                let save = self.at;
                if let Ok(c) = self.paren_cond() {
                    if !continues_expr(self.peek()) {
                        return Ok(c);
                    }
                }
                self.at = save;
                self.comparison()
            }
            _ => self.comparison(),
        }
    }

    fn comparison(&mut self) -> Result<Cond> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::EqEq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            _ => {
                // C truthiness: `e` means `e != 0`.
                let zero = Expr::new(ExprKind::Int(BigInt::from(0)), lhs.pos);
                return Ok(Cond::Cmp(lhs, CmpOp::Ne, zero));
            }
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(Cond::Cmp(lhs, op, rhs))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            let pos = self.pos();
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let r = self.term()?;
                    e = Expr::new(ExprKind::Add(Box::new(e), Box::new(r)), pos);
                }
                Tok::Minus => {
                    self.bump();
                    let r = self.term()?;
                    e = Expr::new(ExprKind::Sub(Box::new(e), Box::new(r)), pos);
                }
                _ => return Ok(e),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.factor()?;
        loop {
            let pos = self.pos();
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let r = self.factor()?;
                    if e.has_var() && r.has_var() {
                        return Err(Error::Nonlinear {
                            line: pos.line,
                            column: pos.column,
                            message: format!("product of `{e}` and `{r}`"),
                        });
                    }
                    e = Expr::new(ExprKind::Mul(Box::new(e), Box::new(r)), pos);
                }
                Tok::Slash | Tok::Percent => {
                    return Err(Error::Nonlinear {
                        line: pos.line,
                        column: pos.column,
                        message: format!("operator `{}` is not supported", self.peek()),
                    });
                }
                _ => return Ok(e),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let (t, pos) = self.bump();
        let kind = match t {
            Tok::Int(n) => ExprKind::Int(n),
            Tok::Ident(s) => ExprKind::Var(s),
            Tok::Minus => ExprKind::Neg(Box::new(self.factor()?)),
            Tok::Nondet => {
                self.expect(Tok::LParen)?;
                self.expect(Tok::RParen)?;
                ExprKind::Nondet
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                return Ok(e);
            }
            t => return Err(syntax(pos, format!("expected expression, found `{t}`"))),
        };
        Ok(Expr::new(kind, pos))
    }
}

fn continues_expr(t: &Tok) -> bool {
    matches!(
        t,
        Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash | Tok::Percent | Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge | Tok::EqEq | Tok::Ne
    )
}

fn check_declarations(p: &Program) -> Result<()> {
    let mut declared = BTreeSet::new();
    let undeclared = |name: &str, pos: Pos| Error::Undeclared {
        line: pos.line,
        column: pos.column,
        name: name.to_string(),
    };
    for d in &p.decls {
        if let Some(e) = &d.init {
            let mut err = None;
            e.for_each_var(&mut |v, pos| {
                if err.is_none() && !declared.contains(v) {
                    err = Some(undeclared(v, pos));
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
        if !declared.insert(d.name.clone()) {
            return Err(Error::Redeclared {
                line: d.pos.line,
                column: d.pos.column,
                name: d.name.clone(),
            });
        }
    }
    fn uses(ss: &[Stmt], out: &mut Vec<(String, Pos)>) {
        fn push(out: &mut Vec<(String, Pos)>) -> impl FnMut(&str, Pos) + '_ {
            |v: &str, pos: Pos| out.push((v.to_string(), pos))
        }
        for s in ss {
            match &s.kind {
                StmtKind::Assign(v, e) => {
                    out.push((v.clone(), s.pos));
                    e.for_each_var(&mut push(out));
                }
                StmtKind::If(c, t, e) => {
                    c.for_each_var(&mut push(out));
                    uses(t, out);
                    uses(e, out);
                }
                StmtKind::While(c, b) => {
                    c.for_each_var(&mut push(out));
                    uses(b, out);
                }
                StmtKind::Assert(c) | StmtKind::Assume(c) => c.for_each_var(&mut push(out)),
                StmtKind::Block(b) => uses(b, out),
            }
        }
    }
    let mut all = Vec::new();
    uses(&p.stmts, &mut all);
    match all.into_iter().find(|(v, _)| !declared.contains(v)) {
        Some((v, pos)) => Err(undeclared(&v, pos)),
        None => Ok(()),
    }
}
