use std::collections::BTreeSet;

use crate::error::{Error, Result};

use super::{Cfa, NodeId};

/// Depth-first traversal from the entry in edge order; returns the
/// postorder and the back edges (targets on the DFS stack).
pub fn dfs(cfa: &Cfa) -> (Vec<NodeId>, Vec<(NodeId, NodeId)>) {
    let succ = cfa.successors();
    let n = cfa.num_nodes;
    let mut state = vec![0u8; n]; // 0 new, 1 on stack, 2 done
    let mut post = Vec::with_capacity(n);
    let mut back = Vec::new();
    if n == 0 {
        return (post, back);
    }
    let mut stack: Vec<(NodeId, usize)> = vec![(cfa.entry, 0)];
    state[cfa.entry] = 1;
    while let Some(&mut (v, ref mut i)) = stack.last_mut() {
        if *i < succ[v].len() {
            let w = succ[v][*i];
            *i += 1;
            match state[w] {
                0 => {
                    state[w] = 1;
                    stack.push((w, 0));
                }
                1 => back.push((v, w)),
                _ => {}
            }
        } else {
            state[v] = 2;
            post.push(v);
            stack.pop();
        }
    }
    (post, back)
}

/// Immediate dominators; `None` for the entry and unreachable nodes.
pub fn dominators(cfa: &Cfa) -> Vec<Option<NodeId>> {
    let (post, _) = dfs(cfa);
    let n = cfa.num_nodes;
    let mut order = vec![usize::MAX; n];
    for (i, &v) in post.iter().enumerate() {
        order[v] = i;
    }
    let preds = cfa.predecessors();
    let mut idom: Vec<Option<NodeId>> = vec![None; n];
    if n == 0 {
        return idom;
    }
    idom[cfa.entry] = Some(cfa.entry);
    let intersect = |idom: &[Option<NodeId>], mut a: NodeId, mut b: NodeId| {
        while a != b {
            while order[a] < order[b] {
                a = idom[a].unwrap();
            }
            while order[b] < order[a] {
                b = idom[b].unwrap();
            }
        }
        a
    };
    let mut changed = true;
    while changed {
        changed = false;
        for &v in post.iter().rev() {
            if v == cfa.entry {
                continue;
            }
            let mut new: Option<NodeId> = None;
            for &p in &preds[v] {
                if idom[p].is_none() {
                    continue;
                }
                new = Some(match new {
                    None => p,
                    Some(q) => intersect(&idom, p, q),
                });
            }
            if new.is_some() && idom[v] != new {
                idom[v] = new;
                changed = true;
            }
        }
    }
    idom[cfa.entry] = None;
    idom
}

pub fn dominates(idom: &[Option<NodeId>], a: NodeId, mut b: NodeId) -> bool {
    loop {
        if a == b {
            return true;
        }
        match idom[b] {
            Some(p) => b = p,
            None => return false,
        }
    }
}

pub fn loop_heads(cfa: &Cfa) -> Result<BTreeSet<NodeId>> {
    let (_, back) = dfs(cfa);
    let idom = dominators(cfa);
    let mut heads = BTreeSet::new();
    for (src, head) in back {
        if !dominates(&idom, head, src) {
            return Err(Error::Irreducible(head));
        }
        heads.insert(head);
    }
    Ok(heads)
}

/// Nodes of the natural loop of `head`: the head plus every node that
/// reaches one of its back edges without passing through it.
pub fn natural_loop(cfa: &Cfa, head: NodeId) -> BTreeSet<NodeId> {
    let idom = dominators(cfa);
    let preds = cfa.predecessors();
    let mut body = BTreeSet::from([head]);
    let mut stack: Vec<NodeId> = preds[head]
        .iter()
        .copied()
        .filter(|&p| dominates(&idom, head, p))
        .collect();
    while let Some(v) = stack.pop() {
        if body.insert(v) {
            stack.extend(preds[v].iter().copied());
        }
    }
    body
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfa::{Edge, EdgeKind, Op};

    fn graph(n: usize, edges: &[(usize, usize)]) -> Result<Cfa> {
        let edges = edges
            .iter()
            .map(|&(a, b)| Edge::new(a, b, Op::Skip, EdgeKind::Normal, &[]))
            .collect();
        Cfa::new(n, 0, None, edges, vec![], vec![])
    }

    #[test]
    fn chain_has_no_heads() {
        assert!(graph(3, &[(0, 1), (1, 2)]).unwrap().loop_heads.is_empty());
    }

    #[test]
    fn nested_loops() {
        // 0 -> 1 (outer) -> 2 (inner) -> 2, 2 -> 3 -> 1, 1 -> 4
        let g = graph(5, &[(0, 1), (1, 2), (2, 2), (2, 3), (3, 1), (1, 4)]).unwrap();
        assert_eq!(g.loop_heads, BTreeSet::from([1, 2]));
        assert_eq!(natural_loop(&g, 1), BTreeSet::from([1, 2, 3]));
        assert_eq!(natural_loop(&g, 2), BTreeSet::from([2]));
    }

    #[test]
    fn irreducible_is_rejected() {
        // two entries into the cycle 1 <-> 2
        assert!(matches!(
            graph(3, &[(0, 1), (0, 2), (1, 2), (2, 1)]),
            Err(Error::Irreducible(_))
        ));
    }

    #[test]
    fn removing_heads_leaves_dag() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 2), (2, 3), (3, 1), (1, 4)]).unwrap();
        // Kahn's algorithm on edges not entering a head.
        let edges: Vec<_> = g.edges.iter().filter(|e| !g.loop_heads.contains(&e.to)).collect();
        let mut indeg = [0; 5];
        for e in &edges {
            indeg[e.to] += 1;
        }
        let mut ready: Vec<_> = (0..5).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = ready.pop() {
            seen += 1;
            for e in edges.iter().filter(|e| e.from == v) {
                indeg[e.to] -= 1;
                if indeg[e.to] == 0 {
                    ready.push(e.to);
                }
            }
        }
        assert_eq!(seen, 5);
    }
}
