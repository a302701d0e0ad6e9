use std::collections::BTreeSet;

use super::loops::natural_loop;
use super::{Cfa, Edge, NodeId};

/// Peels the first `depth` iterations of every loop.
pub fn unroll(cfa: &Cfa, depth: usize) -> Cfa {
    unroll_with_origin(cfa, depth).0
}

/// Like [`unroll`], also returning the original node of every node.
pub fn unroll_with_origin(cfa: &Cfa, depth: usize) -> (Cfa, Vec<NodeId>) {
    let mut origin: Vec<NodeId> = cfa.nodes().collect();
    if depth == 0 || cfa.loop_heads.is_empty() {
        return (cfa.clone(), origin);
    }
    // Innermost loops first.
    let mut heads: Vec<(usize, NodeId)> = cfa
        .loop_heads
        .iter()
        .map(|&h| (natural_loop(cfa, h).len(), h))
        .collect();
    heads.sort();

    let mut g = cfa.clone();
    for (_, h) in heads {
        let body: BTreeSet<NodeId> = natural_loop(&g, h);
        let inner: Vec<Edge> = g.edges.iter().filter(|e| body.contains(&e.from)).cloned().collect();
        let mut copies: Vec<Vec<(NodeId, NodeId)>> = Vec::new();
        for _ in 0..depth {
            let mut map = Vec::new();
            for &n in &body {
                map.push((n, g.num_nodes));
                origin.push(origin[n]);
                g.num_nodes += 1;
            }
            copies.push(map);
        }
        let lookup = |k: usize, n: NodeId| copies[k].iter().find(|(a, _)| *a == n).unwrap().1;
        for e in g.edges.iter_mut() {
            if e.to == h && !body.contains(&e.from) {
                e.to = lookup(0, h);
            }
        }
        for k in 0..depth {
            for e in &inner {
                let to = if e.to == h {
                    if k + 1 < depth {
                        lookup(k + 1, h)
                    } else {
                        h
                    }
                } else if body.contains(&e.to) {
                    lookup(k, e.to)
                } else {
                    e.to
                };
                g.edges.push(Edge {
                    from: lookup(k, e.from),
                    to,
                    ..e.clone()
                });
            }
        }
    }
    let out = Cfa::new(g.num_nodes, g.entry, g.error, g.edges, g.vars, g.assertions).expect("peeling keeps reducibility");
    (out, origin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::compile;

    #[test]
    fn depth_zero_is_identity() {
        let c = compile("int i = 0; while (i < 3) i++;").unwrap();
        assert_eq!(unroll(&c, 0), c);
    }

    #[test]
    fn single_loop_two_copies() {
        let c = compile("int i = 0; while (i < 3) i++;").unwrap();
        let u = unroll(&c, 2);
        assert_eq!(u.loop_heads, c.loop_heads);
        // loop body {head, body-start} copied twice
        assert_eq!(u.num_nodes, c.num_nodes + 4);
        let head = *c.loop_heads.iter().next().unwrap();
        // the only way into the original head is from the second copy or its own body
        let preds: BTreeSet<NodeId> = u.in_edges(head).map(|e| e.from).collect();
        assert_eq!(preds.len(), 2);
    }

    #[test]
    fn nested_loops_keep_inner_heads_in_copies() {
        let c = compile("int i = 0; int j; while (i < 3) { j = 0; while (j < i) j++; i++; }").unwrap();
        let (u, origin) = unroll_with_origin(&c, 2);
        assert_eq!(origin.len(), u.num_nodes);
        assert!(u.loop_heads.len() > c.loop_heads.len());
        for &h in &u.loop_heads {
            assert!(c.loop_heads.contains(&origin[h]));
        }
    }
}
