//! Control-flow automata: nodes joined by edges labelled with transition
//! formulas over inputs `x` and outputs `x'`.

mod dot;
pub mod liveness;
pub mod loops;
pub mod unroll;
pub mod wto;

use std::collections::BTreeSet;

use crate::error::Result;
use crate::formula::Formula;
use crate::linear::{Atom, LinearExpr, VarId};

pub use dot::to_dot;
pub use liveness::live_variables;
pub use unroll::{unroll, unroll_with_origin};
pub use wto::{weak_topological_order, Wto, WtoComponent};

pub type NodeId = usize;

/// The statement an edge came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Op {
    /// `var = value`; `None` assigns an arbitrary value.
    Assign(VarId, Option<LinearExpr>),
    Assume(Formula),
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Normal,
    /// Taken when assertion `id` fails; leads to the error node.
    AssertFail(usize),
    AssertPass(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub op: Op,
    pub kind: EdgeKind,
    /// Transition relation over `X` and `X'`.
    pub formula: Formula,
}

impl Edge {
    pub fn new(from: NodeId, to: NodeId, op: Op, kind: EdgeKind, vars: &[VarId]) -> Edge {
        let formula = transition(&op, vars);
        Edge {
            from,
            to,
            op,
            kind,
            formula,
        }
    }

    /// Variables the edge writes.
    pub fn written(&self) -> Option<&VarId> {
        match &self.op {
            Op::Assign(v, _) => Some(v),
            _ => None,
        }
    }

    /// Variables the edge reads.
    pub fn read(&self) -> BTreeSet<VarId> {
        match &self.op {
            Op::Assign(_, Some(e)) => e.vars().cloned().collect(),
            Op::Assume(f) => f.vars(),
            _ => BTreeSet::new(),
        }
    }
}

fn frame(v: &VarId) -> Formula {
    Formula::atom(Atom::eq(
        LinearExpr::var(v.with_role(crate::linear::Role::Output)),
        LinearExpr::var(v.clone()),
    ))
}

fn transition(op: &Op, vars: &[VarId]) -> Formula {
    let out = |v: &VarId| LinearExpr::var(v.with_role(crate::linear::Role::Output));
    match op {
        Op::Assign(x, value) => {
            let mut parts = Vec::new();
            for v in vars {
                if v == x {
                    if let Some(e) = value {
                        parts.push(Formula::atom(Atom::eq(out(v), e.clone())));
                    }
                } else {
                    parts.push(frame(v));
                }
            }
            Formula::and(parts)
        }
        Op::Assume(c) => Formula::and(std::iter::once(c.clone()).chain(vars.iter().map(frame))),
        Op::Skip => Formula::and(vars.iter().map(frame)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assertion {
    pub id: usize,
    pub line: usize,
    /// The asserted condition over program variables.
    pub condition: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfa {
    pub num_nodes: usize,
    pub entry: NodeId,
    pub error: Option<NodeId>,
    pub edges: Vec<Edge>,
    /// Program variables in declaration order.
    pub vars: Vec<VarId>,
    pub loop_heads: BTreeSet<NodeId>,
    pub assertions: Vec<Assertion>,
}

impl Cfa {
    /// Builds a CFA and computes its loop heads; fails on irreducible flow.
    pub fn new(
        num_nodes: usize,
        entry: NodeId,
        error: Option<NodeId>,
        edges: Vec<Edge>,
        vars: Vec<VarId>,
        assertions: Vec<Assertion>,
    ) -> Result<Cfa> {
        let mut cfa = Cfa {
            num_nodes,
            entry,
            error,
            edges,
            vars,
            loop_heads: BTreeSet::new(),
            assertions,
        };
        cfa.loop_heads = loops::loop_heads(&cfa)?;
        Ok(cfa)
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.num_nodes
    }

    pub fn out_edges(&self, n: NodeId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == n)
    }

    pub fn in_edges(&self, n: NodeId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.to == n)
    }

    pub fn successors(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.num_nodes];
        for e in &self.edges {
            if !out[e.from].contains(&e.to) {
                out[e.from].push(e.to);
            }
        }
        out
    }

    pub fn predecessors(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.num_nodes];
        for e in &self.edges {
            if !out[e.to].contains(&e.from) {
                out[e.to].push(e.from);
            }
        }
        out
    }

    /// Nodes from which `target` is reachable, `target` included.
    pub fn reaching(&self, target: NodeId) -> BTreeSet<NodeId> {
        let preds = self.predecessors();
        let mut seen = BTreeSet::from([target]);
        let mut stack = vec![target];
        while let Some(n) = stack.pop() {
            for &p in &preds[n] {
                if seen.insert(p) {
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Entry plus loop heads: the nodes where states get abstracted.
    pub fn abstraction_points(&self) -> BTreeSet<NodeId> {
        let mut s = self.loop_heads.clone();
        s.insert(self.entry);
        s
    }
}
