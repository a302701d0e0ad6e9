#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lpi::frontend::ast::{CmpOp, Cond, ExprKind, Program, Stmt, StmtKind};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

/// `(file name, source)` of every corpus program, sorted by name.
pub fn corpus() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "c"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

pub fn corpus_file(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).unwrap()
}

/// Small random programs over `a`, `b`, `c`. Loops either count a private
/// counter up to a small bound or run a nondeterministic number of times.
pub struct ProgramGen {
    rng: ChaCha8Rng,
    counters: usize,
    pub allow_nondet: bool,
    pub allow_unbounded_loops: bool,
}

const VARS: [&str; 3] = ["a", "b", "c"];

impl ProgramGen {
    pub fn new(seed: u64) -> Self {
        ProgramGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            counters: 0,
            allow_nondet: true,
            allow_unbounded_loops: true,
        }
    }

    fn var(&mut self) -> &'static str {
        VARS[self.rng.gen_range(0..VARS.len())]
    }

    fn expr(&mut self) -> String {
        if self.allow_nondet && self.rng.gen_bool(0.08) {
            return "nondet()".into();
        }
        let mut parts = Vec::new();
        for _ in 0..self.rng.gen_range(0..=2) {
            let k: i64 = *[-2, -1, 1, 1, 1, 2].get(self.rng.gen_range(0..6)).unwrap();
            let v = self.var();
            parts.push(match k {
                1 => v.to_string(),
                -1 => format!("-{v}"),
                k => format!("{k} * {v}"),
            });
        }
        let c: i64 = self.rng.gen_range(-3..=3);
        if parts.is_empty() || c != 0 {
            parts.push(c.to_string());
        }
        parts.join(" + ")
    }

    fn atom(&mut self) -> String {
        let ops = ["<", "<=", "==", "!=", ">", ">="];
        let op = ops[self.rng.gen_range(0..ops.len())];
        let v = self.var();
        let rhs = if self.rng.gen_bool(0.3) { self.var().to_string() } else { self.rng.gen_range(-4..=6).to_string() };
        format!("{v} {op} {rhs}")
    }

    fn cond(&mut self) -> String {
        match self.rng.gen_range(0..10) {
            0 => format!("{} && {}", self.atom(), self.atom()),
            1 => format!("{} || {}", self.atom(), self.atom()),
            2 if self.allow_nondet => "nondet()".into(),
            _ => self.atom(),
        }
    }

    fn block(&mut self, depth: usize, out: &mut Vec<String>, decls: &mut Vec<String>) {
        let n = self.rng.gen_range(1..=3);
        for _ in 0..n {
            self.stmt(depth, out, decls);
        }
    }

    fn stmt(&mut self, depth: usize, out: &mut Vec<String>, decls: &mut Vec<String>) {
        let choice = if depth == 0 { 0 } else { self.rng.gen_range(0..10) };
        match choice {
            0..=4 => {
                let v = self.var();
                let e = self.expr();
                out.push(format!("{v} = {e};"));
            }
            5 | 6 => {
                let c = self.cond();
                let mut then = Vec::new();
                let mut els = Vec::new();
                self.block(depth - 1, &mut then, decls);
                if self.rng.gen_bool(0.6) {
                    self.block(depth - 1, &mut els, decls);
                }
                out.push(format!("if ({c}) {{ {} }} else {{ {} }}", then.join(" "), els.join(" ")));
            }
            7 | 8 => {
                let mut body = Vec::new();
                self.block(depth - 1, &mut body, decls);
                if self.allow_unbounded_loops && self.allow_nondet && self.rng.gen_bool(0.2) {
                    out.push(format!("while (nondet()) {{ {} }}", body.join(" ")));
                } else {
                    let k = format!("k{}", self.counters);
                    self.counters += 1;
                    decls.push(format!("int {k} = 0;"));
                    let bound = self.rng.gen_range(1..=4);
                    out.push(format!("while ({k} < {bound}) {{ {} {k}++; }}", body.join(" ")));
                }
            }
            _ => {
                let c = self.atom();
                if self.rng.gen_bool(0.5) {
                    out.push(format!("assert({c});"));
                } else {
                    out.push(format!("assume({c});"));
                }
            }
        }
    }

    pub fn program(&mut self) -> String {
        self.counters = 0;
        let mut decls = Vec::new();
        for v in VARS {
            let init = if self.allow_nondet && self.rng.gen_bool(0.25) {
                "nondet()".to_string()
            } else {
                self.rng.gen_range(-2..=3).to_string()
            };
            decls.push(format!("int {v} = {init};"));
        }
        let mut body = Vec::new();
        let n = self.rng.gen_range(1..=4);
        for _ in 0..n {
            self.stmt(2, &mut body, &mut decls);
        }
        if self.rng.gen_bool(0.5) {
            let c = self.atom();
            body.push(format!("assert({c});"));
        }
        format!("{}\n{}\n", decls.join("\n"), body.join("\n"))
    }
}

pub fn random_programs(count: usize, seed: u64) -> Vec<String> {
    let mut g = ProgramGen::new(seed);
    (0..count).map(|_| g.program()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AstOutcome {
    Finished(BTreeMap<String, BigInt>),
    AssertionFailed,
    Blocked,
    OutOfFuel,
}

/// Direct interpreter over the syntax tree; `nondet` values come from
/// `next`.
pub struct AstInterp<'a> {
    pub env: BTreeMap<String, BigInt>,
    pub fuel: usize,
    pub next: &'a mut dyn FnMut() -> i64,
}

enum Stop {
    Fail,
    Block,
    Fuel,
}

impl AstInterp<'_> {
    fn eval(&mut self, e: &lpi::frontend::ast::Expr) -> BigInt {
        match &e.kind {
            ExprKind::Int(n) => n.clone(),
            ExprKind::Var(v) => self.env[v].clone(),
            ExprKind::Nondet => BigInt::from((self.next)()),
            ExprKind::Neg(a) => -self.eval(a),
            ExprKind::Add(a, b) => self.eval(a) + self.eval(b),
            ExprKind::Sub(a, b) => self.eval(a) - self.eval(b),
            ExprKind::Mul(a, b) => self.eval(a) * self.eval(b),
        }
    }

    fn test(&mut self, c: &Cond) -> bool {
        match c {
            Cond::Bool(b) => *b,
            Cond::Not(c) => !self.test(c),
            Cond::And(a, b) => {
                let x = self.test(a);
                let y = self.test(b);
                x && y
            }
            Cond::Or(a, b) => {
                let x = self.test(a);
                let y = self.test(b);
                x || y
            }
            Cond::Cmp(l, op, r) => {
                let (l, r) = (self.eval(l), self.eval(r));
                match op {
                    CmpOp::Lt => l < r,
                    CmpOp::Le => l <= r,
                    CmpOp::Gt => l > r,
                    CmpOp::Ge => l >= r,
                    CmpOp::Eq => l == r,
                    CmpOp::Ne => l != r,
                }
            }
        }
    }

    fn exec(&mut self, ss: &[Stmt]) -> Result<(), Stop> {
        for s in ss {
            if self.fuel == 0 {
                return Err(Stop::Fuel);
            }
            self.fuel -= 1;
            match &s.kind {
                StmtKind::Assign(v, e) => {
                    let x = self.eval(e);
                    self.env.insert(v.clone(), x);
                }
                StmtKind::If(c, t, e) => {
                    if self.test(c) {
                        self.exec(t)?
                    } else {
                        self.exec(e)?
                    }
                }
                StmtKind::While(c, body) => {
                    while self.test(c) {
                        if self.fuel == 0 {
                            return Err(Stop::Fuel);
                        }
                        self.fuel -= 1;
                        self.exec(body)?;
                    }
                }
                StmtKind::Assert(c) => {
                    if !self.test(c) {
                        return Err(Stop::Fail);
                    }
                }
                StmtKind::Assume(c) => {
                    if !self.test(c) {
                        return Err(Stop::Block);
                    }
                }
                StmtKind::Block(b) => self.exec(b)?,
            }
        }
        Ok(())
    }

    pub fn run(&mut self, p: &Program) -> AstOutcome {
        for d in &p.decls {
            let v = match &d.init {
                Some(e) => self.eval(e),
                None => BigInt::from((self.next)()),
            };
            self.env.insert(d.name.clone(), v);
        }
        match self.exec(&p.stmts) {
            Ok(()) => AstOutcome::Finished(self.env.clone()),
            Err(Stop::Fail) => AstOutcome::AssertionFailed,
            Err(Stop::Block) => AstOutcome::Blocked,
            Err(Stop::Fuel) => AstOutcome::OutOfFuel,
        }
    }
}

pub fn run_ast(p: &Program, seed: u64, fuel: usize) -> AstOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next = move || rng.gen_range(-4..=4);
    let mut it = AstInterp {
        env: BTreeMap::new(),
        fuel,
        next: &mut next,
    };
    it.run(p)
}

pub fn to_i64(n: &BigInt) -> i64 {
    n.to_i64().unwrap_or(if n > &BigInt::zero() { i64::MAX } else { i64::MIN })
}
