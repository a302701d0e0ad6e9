use std::fmt::Write;

use super::{Cfa, EdgeKind};

/// Graphviz rendering with edge formulas as labels.
pub fn to_dot(cfa: &Cfa) -> String {
    let mut s = String::from("digraph cfa {\n");
    for n in cfa.nodes() {
        let mut attrs = vec![format!("label=\"n{n}\"")];
        if n == cfa.entry {
            attrs.push("shape=box".into());
        }
        if cfa.loop_heads.contains(&n) {
            attrs.push("peripheries=2".into());
        }
        if Some(n) == cfa.error {
            attrs.push("color=red".into());
        }
        let _ = writeln!(s, "  n{n} [{}];", attrs.join(", "));
    }
    for e in &cfa.edges {
        let mut label = e.formula.to_string().replace('"', "\\\"");
        if let EdgeKind::AssertFail(id) = e.kind {
            label = format!("assert #{id} fails: {label}");
        }
        let _ = writeln!(s, "  n{} -> n{} [label=\"{label}\"];", e.from, e.to);
    }
    s.push_str("}\n");
    s
}
