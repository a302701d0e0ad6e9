use num_traits::{Signed, Zero};

use crate::cfa::{Assertion, Cfa, Edge, EdgeKind, NodeId, Op};
use crate::formula::Formula;
use crate::linear::{Atom, LinearExpr, Rational, Relation, VarId};

use super::ast::*;

/// Linear form of `e`, or `None` when it involves `nondet()`.
pub fn linearize(e: &Expr) -> Option<LinearExpr> {
    Some(match &e.kind {
        ExprKind::Int(n) => LinearExpr::constant(Rational::from_integer(n.clone())),
        ExprKind::Var(v) => LinearExpr::var(VarId::input(v)),
        ExprKind::Nondet => return None,
        ExprKind::Neg(a) => -linearize(a)?,
        ExprKind::Add(a, b) => linearize(a)? + linearize(b)?,
        ExprKind::Sub(a, b) => linearize(a)? - linearize(b)?,
        ExprKind::Mul(a, b) => {
            let (a, b) = (linearize(a)?, linearize(b)?);
            // The parser guarantees one side is constant.
            if a.is_constant() {
                b * a.constant_term()
            } else {
                a * b.constant_term()
            }
        }
    })
}

fn atom_formula(a: Atom) -> Formula {
    if a.expr.is_constant() {
        let k = a.expr.constant_term();
        let holds = match a.rel {
            Relation::Leq => !k.is_positive(),
            Relation::Eq => k.is_zero(),
        };
        return if holds { Formula::True } else { Formula::False };
    }
    Formula::atom(a)
}

/// The condition (or its negation when `positive` is false) over program
/// variables. Comparisons involving `nondet()` may go either way.
pub fn lower_cond(c: &Cond, positive: bool) -> Formula {
    match c {
        Cond::Bool(b) => {
            if *b == positive {
                Formula::True
            } else {
                Formula::False
            }
        }
        Cond::Not(c) => lower_cond(c, !positive),
        Cond::And(a, b) | Cond::Or(a, b) => {
            let (l, r) = (lower_cond(a, positive), lower_cond(b, positive));
            if matches!(c, Cond::And(..)) == positive {
                Formula::and([l, r])
            } else {
                Formula::or(l, r)
            }
        }
        Cond::Cmp(a, op, b) => {
            let (Some(l), Some(r)) = (linearize(a), linearize(b)) else {
                return Formula::True;
            };
            let op = if positive { *op } else { negate(*op) };
            match op {
                CmpOp::Lt => atom_formula(Atom::lt(l, r)),
                CmpOp::Le => atom_formula(Atom::leq(l, r)),
                CmpOp::Gt => atom_formula(Atom::gt(l, r)),
                CmpOp::Ge => atom_formula(Atom::geq(l, r)),
                CmpOp::Eq => atom_formula(Atom::eq(l, r)),
                CmpOp::Ne => Formula::or(atom_formula(Atom::lt(l.clone(), r.clone())), atom_formula(Atom::gt(l, r))),
            }
        }
    }
}

fn negate(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::Ge,
        CmpOp::Le => CmpOp::Gt,
        CmpOp::Gt => CmpOp::Le,
        CmpOp::Ge => CmpOp::Lt,
        CmpOp::Eq => CmpOp::Ne,
        CmpOp::Ne => CmpOp::Eq,
    }
}

const ERROR: NodeId = usize::MAX;

struct Lowering {
    vars: Vec<VarId>,
    edges: Vec<Edge>,
    next: NodeId,
    dead: Vec<NodeId>,
    assertions: Vec<Assertion>,
}

impl Lowering {
    fn node(&mut self) -> NodeId {
        self.next += 1;
        self.next - 1
    }

    fn edge(&mut self, from: NodeId, to: NodeId, op: Op, kind: EdgeKind) {
        self.edges.push(Edge::new(from, to, op, kind, &self.vars));
    }

    /// Makes `from` an alias of `to`; `from` must be a fresh block exit.
    fn redirect(&mut self, from: NodeId, to: NodeId) {
        if self.edges.iter().any(|e| e.from == from) || from == 0 {
            self.edge(from, to, Op::Skip, EdgeKind::Normal);
            return;
        }
        for e in self.edges.iter_mut() {
            if e.to == from {
                e.to = to;
            }
        }
        self.dead.push(from);
    }

    fn block(&mut self, stmts: &[Stmt], mut cur: NodeId) -> NodeId {
        for s in stmts {
            cur = self.stmt(s, cur);
        }
        cur
    }

    fn stmt(&mut self, s: &Stmt, cur: NodeId) -> NodeId {
        match &s.kind {
            StmtKind::Assign(x, e) => {
                let n = self.node();
                self.edge(cur, n, Op::Assign(VarId::input(x), linearize(e)), EdgeKind::Normal);
                n
            }
            StmtKind::Assume(c) => {
                let n = self.node();
                self.edge(cur, n, Op::Assume(lower_cond(c, true)), EdgeKind::Normal);
                n
            }
            StmtKind::Assert(c) => {
                let id = self.assertions.len();
                let condition = lower_cond(c, true);
                self.assertions.push(Assertion {
                    id,
                    line: s.pos.line,
                    condition: condition.clone(),
                });
                self.edge(cur, ERROR, Op::Assume(lower_cond(c, false)), EdgeKind::AssertFail(id));
                let n = self.node();
                self.edge(cur, n, Op::Assume(condition), EdgeKind::AssertPass(id));
                n
            }
            StmtKind::Block(b) => self.block(b, cur),
            StmtKind::If(c, t, e) => {
                let ts = self.node();
                self.edge(cur, ts, Op::Assume(lower_cond(c, true)), EdgeKind::Normal);
                let te = self.block(t, ts);
                let es = self.node();
                self.edge(cur, es, Op::Assume(lower_cond(c, false)), EdgeKind::Normal);
                let ee = self.block(e, es);
                let join = self.node();
                self.redirect(te, join);
                self.redirect(ee, join);
                join
            }
            StmtKind::While(c, body) => {
                let head = if cur == 0 {
                    let h = self.node();
                    self.edge(cur, h, Op::Skip, EdgeKind::Normal);
                    h
                } else {
                    cur
                };
                let bs = self.node();
                self.edge(head, bs, Op::Assume(lower_cond(c, true)), EdgeKind::Normal);
                let be = self.block(body, bs);
                self.redirect(be, head);
                let exit = self.node();
                self.edge(head, exit, Op::Assume(lower_cond(c, false)), EdgeKind::Normal);
                exit
            }
        }
    }
}

pub fn lower(p: &Program) -> Cfa {
    let vars: Vec<VarId> = p.decls.iter().map(|d| VarId::input(&d.name)).collect();
    let mut l = Lowering {
        vars,
        edges: Vec::new(),
        next: 1,
        dead: Vec::new(),
        assertions: Vec::new(),
    };
    let mut cur = 0;
    for d in &p.decls {
        let n = l.node();
        let value = d.init.as_ref().and_then(linearize);
        l.edge(cur, n, Op::Assign(VarId::input(&d.name), value), EdgeKind::Normal);
        cur = n;
    }
    l.block(&p.stmts, cur);

    // Renumber the surviving nodes densely; the error node goes last.
    let mut map = vec![usize::MAX; l.next];
    let mut k = 0;
    for (n, slot) in map.iter_mut().enumerate() {
        if !l.dead.contains(&n) {
            *slot = k;
            k += 1;
        }
    }
    let has_error = l.edges.iter().any(|e| e.to == ERROR);
    let error = has_error.then_some(k);
    let num_nodes = k + usize::from(has_error);
    let edges = l
        .edges
        .into_iter()
        .map(|mut e| {
            e.from = map[e.from];
            e.to = if e.to == ERROR { k } else { map[e.to] };
            e
        })
        .collect();
    Cfa::new(num_nodes, 0, error, edges, l.vars, l.assertions).expect("structured programs are reducible")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;
    use crate::linear::rat;

    fn cfa(src: &str) -> Cfa {
        lower(&parse(src).unwrap())
    }

    #[test]
    fn running_example() {
        let c = cfa("int i = 0; int j = 0; while (i < 10) { i++; } while (j < 10) { j++; }");
        assert_eq!(c.loop_heads.len(), 2);
        assert_eq!(c.error, None);
        let shapes: Vec<String> = c.edges.iter().map(|e| format!("{}->{}: {}", e.from, e.to, e.formula)).collect();
        assert_eq!(
            shapes,
            vec![
                "0->1: i' = 0 && -j + j' = 0",
                "1->2: -i + i' = 0 && j' = 0",
                "2->3: i <= 9 && -i + i' = 0 && -j + j' = 0",
                "3->2: -i + i' = 1 && -j + j' = 0",
                "2->4: -i <= -10 && -i + i' = 0 && -j + j' = 0",
                "4->5: j <= 9 && -i + i' = 0 && -j + j' = 0",
                "5->4: -i + i' = 0 && -j + j' = 1",
                "4->6: -j <= -10 && -i + i' = 0 && -j + j' = 0",
            ]
        );
        assert_eq!(c.loop_heads, [2, 4].into());
        assert!(c.in_edges(c.entry).next().is_none());
    }

    #[test]
    fn not_equal_assertion() {
        let c = cfa("int x = nondet(); assert(x != 0);");
        let err = c.error.unwrap();
        let fail = c.in_edges(err).next().unwrap();
        assert_eq!(fail.kind, EdgeKind::AssertFail(0));
        assert_eq!(fail.op, Op::Assume(Formula::atom(Atom::eq(LinearExpr::var(VarId::input("x")), LinearExpr::zero()))));
    }

    #[test]
    fn havoc_keeps_only_frames() {
        let c = cfa("int x; int y; x = nondet();");
        let e = c.edges.last().unwrap();
        assert_eq!(e.formula.to_string(), "-y + y' = 0");
    }

    #[test]
    fn nondet_condition_goes_both_ways() {
        let c = cfa("int i = 0; while (i < 5) { while (unknown()) { } i++; }");
        assert_eq!(c.loop_heads.len(), 2);
        let inner_self_loop = c.edges.iter().find(|e| e.from == e.to).unwrap();
        assert_eq!(inner_self_loop.op, Op::Assume(Formula::True));
    }

    #[test]
    fn constant_conditions_fold() {
        assert_eq!(
            lower_cond(&Cond::Cmp(Expr::new(ExprKind::Int(1.into()), Pos::default()), CmpOp::Ne, Expr::new(ExprKind::Int(0.into()), Pos::default())), true),
            Formula::True
        );
        let c = cfa("int x = 3 * 2 - 1;");
        assert_eq!(c.edges[0].op, Op::Assign(VarId::input("x"), Some(LinearExpr::constant(rat(5)))));
    }

    #[test]
    fn if_without_else_joins() {
        let c = cfa("int x; if (x > 0) { x = 0; }");
        // entry, after decl, then-start, join
        assert_eq!(c.num_nodes, 4);
        assert_eq!(c.edges.iter().filter(|e| e.to == 3).count(), 2);
    }
}
