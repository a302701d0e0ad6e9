use std::fmt;

use num_bigint::BigInt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Int(BigInt),
    Var(String),
    Nondet,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    /// At least one side is variable-free.
    Mul(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cond {
    Cmp(Expr, CmpOp, Expr),
    Not(Box<Cond>),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Assign(String, Expr),
    If(Cond, Vec<Stmt>, Vec<Stmt>),
    While(Cond, Vec<Stmt>),
    Assert(Cond),
    Assume(Cond),
    Block(Vec<Stmt>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decl {
    pub name: String,
    /// `None` leaves the variable unconstrained.
    pub init: Option<Expr>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub decls: Vec<Decl>,
    pub stmts: Vec<Stmt>,
}

impl Expr {
    pub fn new(kind: ExprKind, pos: Pos) -> Self {
        Expr { kind, pos }
    }

    pub fn has_var(&self) -> bool {
        match &self.kind {
            ExprKind::Int(_) => false,
            ExprKind::Var(_) | ExprKind::Nondet => true,
            ExprKind::Neg(e) => e.has_var(),
            ExprKind::Add(a, b) | ExprKind::Sub(a, b) | ExprKind::Mul(a, b) => a.has_var() || b.has_var(),
        }
    }

    pub fn has_nondet(&self) -> bool {
        match &self.kind {
            ExprKind::Nondet => true,
            ExprKind::Int(_) | ExprKind::Var(_) => false,
            ExprKind::Neg(e) => e.has_nondet(),
            ExprKind::Add(a, b) | ExprKind::Sub(a, b) | ExprKind::Mul(a, b) => a.has_nondet() || b.has_nondet(),
        }
    }

    pub(crate) fn for_each_var<F: FnMut(&str, Pos)>(&self, f: &mut F) {
        match &self.kind {
            ExprKind::Var(v) => f(v, self.pos),
            ExprKind::Int(_) | ExprKind::Nondet => {}
            ExprKind::Neg(e) => e.for_each_var(f),
            ExprKind::Add(a, b) | ExprKind::Sub(a, b) | ExprKind::Mul(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
        }
    }
}

impl Cond {
    pub(crate) fn for_each_var<F: FnMut(&str, Pos)>(&self, f: &mut F) {
        match self {
            Cond::Cmp(a, _, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
            Cond::Not(c) => c.for_each_var(f),
            Cond::And(a, b) | Cond::Or(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
            Cond::Bool(_) => {}
        }
    }
}

impl Program {
    /// Copy with every position reset, for structural comparison.
    pub fn without_positions(&self) -> Program {
        fn expr(e: &Expr) -> Expr {
            let kind = match &e.kind {
                ExprKind::Neg(a) => ExprKind::Neg(Box::new(expr(a))),
                ExprKind::Add(a, b) => ExprKind::Add(Box::new(expr(a)), Box::new(expr(b))),
                ExprKind::Sub(a, b) => ExprKind::Sub(Box::new(expr(a)), Box::new(expr(b))),
                ExprKind::Mul(a, b) => ExprKind::Mul(Box::new(expr(a)), Box::new(expr(b))),
                k => k.clone(),
            };
            Expr::new(kind, Pos::default())
        }
        fn cond(c: &Cond) -> Cond {
            match c {
                Cond::Cmp(a, op, b) => Cond::Cmp(expr(a), *op, expr(b)),
                Cond::Not(a) => Cond::Not(Box::new(cond(a))),
                Cond::And(a, b) => Cond::And(Box::new(cond(a)), Box::new(cond(b))),
                Cond::Or(a, b) => Cond::Or(Box::new(cond(a)), Box::new(cond(b))),
                c => c.clone(),
            }
        }
        fn stmts(ss: &[Stmt]) -> Vec<Stmt> {
            ss.iter().map(stmt).collect()
        }
        fn stmt(s: &Stmt) -> Stmt {
            let kind = match &s.kind {
                StmtKind::Assign(v, e) => StmtKind::Assign(v.clone(), expr(e)),
                StmtKind::If(c, t, e) => StmtKind::If(cond(c), stmts(t), stmts(e)),
                StmtKind::While(c, b) => StmtKind::While(cond(c), stmts(b)),
                StmtKind::Assert(c) => StmtKind::Assert(cond(c)),
                StmtKind::Assume(c) => StmtKind::Assume(cond(c)),
                StmtKind::Block(b) => StmtKind::Block(stmts(b)),
            };
            Stmt {
                kind,
                pos: Pos::default(),
            }
        }
        Program {
            decls: self
                .decls
                .iter()
                .map(|d| Decl {
                    name: d.name.clone(),
                    init: d.init.as_ref().map(expr),
                    pos: Pos::default(),
                })
                .collect(),
            stmts: stmts(&self.stmts),
        }
    }
}

// Printing is fully parenthesized so that reparsing yields the same tree.

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Int(n) => write!(f, "{n}"),
            ExprKind::Var(v) => write!(f, "{v}"),
            ExprKind::Nondet => write!(f, "nondet()"),
            ExprKind::Neg(e) => write!(f, "-({e})"),
            ExprKind::Add(a, b) => write!(f, "({a} + {b})"),
            ExprKind::Sub(a, b) => write!(f, "({a} - {b})"),
            ExprKind::Mul(a, b) => write!(f, "({a} * {b})"),
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        };
        write!(f, "{s}")
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cond::Cmp(a, op, b) => write!(f, "{a} {op} {b}"),
            Cond::Not(c) => write!(f, "!({c})"),
            Cond::And(a, b) => write!(f, "({a}) && ({b})"),
            Cond::Or(a, b) => write!(f, "({a}) || ({b})"),
            Cond::Bool(b) => write!(f, "{b}"),
        }
    }
}

fn write_block(f: &mut fmt::Formatter<'_>, stmts: &[Stmt], indent: usize) -> fmt::Result {
    writeln!(f, "{{")?;
    for s in stmts {
        s.write(f, indent + 1)?;
    }
    write!(f, "{}}}", "    ".repeat(indent))
}

impl Stmt {
    fn write(&self, f: &mut fmt::Formatter<'_>, indent: usize) -> fmt::Result {
        let pad = "    ".repeat(indent);
        match &self.kind {
            StmtKind::Assign(v, e) => writeln!(f, "{pad}{v} = {e};"),
            StmtKind::If(c, t, e) => {
                write!(f, "{pad}if ({c}) ")?;
                write_block(f, t, indent)?;
                if !e.is_empty() {
                    write!(f, " else ")?;
                    write_block(f, e, indent)?;
                }
                writeln!(f)
            }
            StmtKind::While(c, b) => {
                write!(f, "{pad}while ({c}) ")?;
                write_block(f, b, indent)?;
                writeln!(f)
            }
            StmtKind::Assert(c) => writeln!(f, "{pad}assert({c});"),
            StmtKind::Assume(c) => writeln!(f, "{pad}assume({c});"),
            StmtKind::Block(b) => {
                write!(f, "{pad}")?;
                write_block(f, b, indent)?;
                writeln!(f)
            }
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            match &d.init {
                Some(e) => writeln!(f, "int {} = {};", d.name, e)?,
                None => writeln!(f, "int {};", d.name)?,
            }
        }
        for s in &self.stmts {
            s.write(f, 0)?;
        }
        Ok(())
    }
}
