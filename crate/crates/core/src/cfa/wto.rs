//! Bourdoncle's weak topological ordering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Cfa, NodeId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WtoComponent {
    Vertex(NodeId),
    Component(NodeId, Vec<WtoComponent>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wto {
    pub components: Vec<WtoComponent>,
}

struct Builder<'a> {
    succ: &'a [Vec<NodeId>],
    dfn: Vec<usize>,
    num: usize,
    stack: Vec<NodeId>,
}

impl Builder<'_> {
    fn visit(&mut self, v: NodeId, partition: &mut Vec<WtoComponent>) -> usize {
        self.stack.push(v);
        self.num += 1;
        self.dfn[v] = self.num;
        let mut head = self.num;
        let mut is_loop = false;
        for i in 0..self.succ[v].len() {
            let w = self.succ[v][i];
            let min = if self.dfn[w] == 0 {
                self.visit(w, partition)
            } else {
                self.dfn[w]
            };
            if min <= head {
                head = min;
                is_loop = true;
            }
        }
        if head == self.dfn[v] {
            self.dfn[v] = usize::MAX;
            let mut element = self.stack.pop().unwrap();
            if is_loop {
                while element != v {
                    self.dfn[element] = 0;
                    element = self.stack.pop().unwrap();
                }
                let c = self.component(v);
                partition.insert(0, c);
            } else {
                partition.insert(0, WtoComponent::Vertex(v));
            }
        }
        head
    }

    fn component(&mut self, v: NodeId) -> WtoComponent {
        let mut partition = Vec::new();
        for i in 0..self.succ[v].len() {
            let w = self.succ[v][i];
            if self.dfn[w] == 0 {
                self.visit(w, &mut partition);
            }
        }
        WtoComponent::Component(v, partition)
    }
}

pub fn weak_topological_order(cfa: &Cfa) -> Wto {
    let succ = cfa.successors();
    let mut b = Builder {
        succ: &succ,
        dfn: vec![0; cfa.num_nodes],
        num: 0,
        stack: Vec::new(),
    };
    let mut components = Vec::new();
    if cfa.num_nodes > 0 {
        b.visit(cfa.entry, &mut components);
    }
    Wto { components }
}

fn flatten_into(cs: &[WtoComponent], out: &mut Vec<NodeId>) {
    for c in cs {
        match c {
            WtoComponent::Vertex(v) => out.push(*v),
            WtoComponent::Component(h, body) => {
                out.push(*h);
                flatten_into(body, out);
            }
        }
    }
}

impl Wto {
    pub fn flatten(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        flatten_into(&self.components, &mut out);
        out
    }

    /// Position of every node in the flattening.
    pub fn positions(&self) -> BTreeMap<NodeId, usize> {
        self.flatten().into_iter().enumerate().map(|(i, v)| (v, i)).collect()
    }

    pub fn heads(&self) -> BTreeSet<NodeId> {
        fn walk(cs: &[WtoComponent], out: &mut BTreeSet<NodeId>) {
            for c in cs {
                if let WtoComponent::Component(h, body) = c {
                    out.insert(*h);
                    walk(body, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(&self.components, &mut out);
        out
    }

    /// Every node of the component headed by `head`, the head included.
    pub fn component_nodes(&self, head: NodeId) -> BTreeSet<NodeId> {
        fn find(cs: &[WtoComponent], head: NodeId) -> Option<&WtoComponent> {
            for c in cs {
                if let WtoComponent::Component(h, body) = c {
                    if *h == head {
                        return Some(c);
                    }
                    if let Some(x) = find(body, head) {
                        return Some(x);
                    }
                }
            }
            None
        }
        let mut out = Vec::new();
        if let Some(c) = find(&self.components, head) {
            flatten_into(std::slice::from_ref(c), &mut out);
        }
        out.into_iter().collect()
    }
}

impl fmt::Display for WtoComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WtoComponent::Vertex(v) => write!(f, "{v}"),
            WtoComponent::Component(h, body) => {
                write!(f, "({h}")?;
                for c in body {
                    write!(f, " {c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Wto {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfa::{Edge, EdgeKind, Op};

    fn graph(n: usize, edges: &[(usize, usize)]) -> Cfa {
        let edges = edges
            .iter()
            .map(|&(a, b)| Edge::new(a, b, Op::Skip, EdgeKind::Normal, &[]))
            .collect();
        Cfa::new(n, 0, None, edges, vec![], vec![]).unwrap()
    }

    #[test]
    fn two_sequential_loops() {
        // I=0 -> A=1; A <-> 2; A -> B=3; B <-> 4; B -> C=5
        let g = graph(6, &[(0, 1), (1, 2), (2, 1), (1, 3), (3, 4), (4, 3), (3, 5)]);
        let w = weak_topological_order(&g);
        assert_eq!(w.to_string(), "0 (1 2) (3 4) 5");
        assert_eq!(w.heads(), g.loop_heads);
    }

    #[test]
    fn nested_component() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 2), (2, 3), (3, 1), (1, 4)]);
        let w = weak_topological_order(&g);
        assert_eq!(w.to_string(), "0 (1 (2) 3) 4");
        assert_eq!(w.component_nodes(1), BTreeSet::from([1, 2, 3]));
        assert_eq!(w.component_nodes(2), BTreeSet::from([2]));
    }

    #[test]
    fn single_node() {
        assert_eq!(weak_topological_order(&graph(1, &[])).to_string(), "0");
    }
}
