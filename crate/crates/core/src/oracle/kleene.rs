use std::collections::{BTreeMap, BTreeSet};

use crate::cfa::{Cfa, EdgeKind, NodeId, Op};
use crate::domain::Template;
use crate::error::Result;
use crate::formula::Formula;
use crate::linear::{Atom, LinearExpr, Rational, Role, VarId};
use crate::lp::{LpResult, Solver};

/// Bounds at one point; a missing template is unbounded, `None` is bottom.
pub type TemplateValues = Option<BTreeMap<Template, Rational>>;

#[derive(Debug, Clone, PartialEq)]
pub enum KleeneOutcome {
    Converged { values: BTreeMap<NodeId, TemplateValues>, iterations: usize },
    DidNotConverge,
}

fn dnf(f: &Formula) -> Vec<Vec<Atom>> {
    match f {
        Formula::True => vec![vec![]],
        Formula::False => vec![],
        Formula::Leaf(a) => vec![vec![a.clone()]],
        Formula::Or(l, r, _) => {
            let mut out = dnf(l);
            out.extend(dnf(r));
            out
        }
        Formula::And(parts) => {
            let mut acc = vec![vec![]];
            for p in parts {
                let alts = dnf(p);
                let mut next = Vec::new();
                for a in &acc {
                    for b in &alts {
                        let mut c: Vec<Atom> = a.clone();
                        c.extend(b.iter().cloned());
                        next.push(c);
                    }
                }
                acc = next;
            }
            acc
        }
    }
}

/// One conjunctive path: SSA constraints and the final version of each
/// variable.
#[derive(Debug, Clone)]
struct Branch {
    atoms: Vec<Atom>,
    version: BTreeMap<VarId, VarId>,
}

fn ssa(v: &VarId, k: usize) -> VarId {
    VarId::new(&v.name, Some(&format!("ssa{k}")), Role::Aux)
}

/// Every conjunctive path from point `p` to some point, as
/// `(target, atoms over the inputs X and SSA copies, final versions)`.
pub fn path_branches(cfa: &Cfa, points: &BTreeSet<NodeId>, p: NodeId) -> Vec<(NodeId, Vec<Atom>, BTreeMap<VarId, VarId>)> {
    let mut out = Vec::new();
    let init = Branch {
        atoms: Vec::new(),
        version: cfa.vars.iter().map(|v| (v.clone(), v.clone())).collect(),
    };
    let mut stack = vec![(p, init, 0usize)];
    while let Some((n, b, fresh)) = stack.pop() {
        for e in cfa.out_edges(n) {
            if matches!(e.kind, EdgeKind::AssertFail(_)) {
                continue;
            }
            let mut nexts = Vec::new();
            let cur = |x: &VarId| b.version.get(x).cloned().unwrap_or_else(|| x.clone());
            match &e.op {
                Op::Skip => nexts.push((b.clone(), fresh)),
                Op::Assume(f) => {
                    for conj in dnf(f) {
                        let mut nb = b.clone();
                        nb.atoms.extend(conj.iter().map(|a| a.rename(cur)));
                        nexts.push((nb, fresh));
                    }
                }
                Op::Assign(x, value) => {
                    let mut nb = b.clone();
                    let nv = ssa(x, fresh + 1);
                    if let Some(expr) = value {
                        nb.atoms.push(Atom::eq(LinearExpr::var(nv.clone()), expr.rename(cur)));
                    }
                    nb.version.insert(x.clone(), nv);
                    nexts.push((nb, fresh + 1));
                }
            }
            for (nb, f) in nexts {
                if points.contains(&e.to) {
                    out.push((e.to, nb.atoms, nb.version));
                } else {
                    stack.push((e.to, nb, f));
                }
            }
        }
    }
    out
}

fn bound_atoms(vals: &BTreeMap<Template, Rational>) -> Vec<Atom> {
    vals.iter()
        .map(|(t, d)| Atom::leq(t.expr().clone(), LinearExpr::constant(d.clone())))
        .collect()
}

fn join(a: &TemplateValues, b: &TemplateValues) -> TemplateValues {
    match (a, b) {
        (None, x) | (x, None) => x.clone(),
        (Some(x), Some(y)) => Some(
            x.iter()
                .filter_map(|(t, d)| y.get(t).map(|e| (t.clone(), d.clone().max(e.clone()))))
                .collect(),
        ),
    }
}

/// Value iteration from bottom at the abstraction points of `cfa`, in
/// rational arithmetic and without widening. `templates` is indexed by node.
pub fn kleene_tcd(cfa: &Cfa, templates: &[BTreeSet<Template>], cap: usize) -> Result<KleeneOutcome> {
    let points = cfa.abstraction_points();
    let mut paths = BTreeMap::new();
    for p in &points {
        paths.insert(*p, path_branches(cfa, &points, *p));
    }
    let mut values: BTreeMap<NodeId, TemplateValues> = points.iter().map(|p| (*p, None)).collect();
    values.insert(cfa.entry, Some(BTreeMap::new()));
    let mut solver = Solver::new(false);
    for iteration in 1..=cap {
        let mut next = values.clone();
        for (p, branches) in &paths {
            let Some(src) = &values[p] else {
                continue;
            };
            let base = bound_atoms(src);
            for (q, atoms, version) in branches {
                let mut cs = base.clone();
                cs.extend(atoms.iter().cloned());
                if solver.is_satisfiable(&cs)?.is_none() {
                    continue;
                }
                let mut post = BTreeMap::new();
                for t in &templates[*q] {
                    let obj = t.expr().rename(|v| version.get(v).cloned().unwrap_or_else(|| v.clone()));
                    if let LpResult::Optimal { value, .. } = solver.maximize(&obj, &cs)? {
                        post.insert(t.clone(), value);
                    }
                }
                let joined = join(&next[q], &Some(post));
                next.insert(*q, joined);
            }
        }
        if next == values {
            return Ok(KleeneOutcome::Converged { values, iterations: iteration });
        }
        values = next;
    }
    Ok(KleeneOutcome::DidNotConverge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfa::live_variables;
    use crate::frontend::compile;
    use crate::linear::rat;
    use crate::templates::{synthesize, TemplateConfig};

    fn explicit(cfa: &Cfa, names: &[&str]) -> Vec<BTreeSet<Template>> {
        let cfg = TemplateConfig {
            explicit: Some(names.iter().map(|n| Template::parse(n).unwrap()).collect()),
            ..TemplateConfig::default()
        };
        synthesize(cfa, &live_variables(cfa), &cfg)
    }

    #[test]
    fn running_example_converges() {
        let cfa = compile("int i = 0; int j = 0; while (i < 10) { i++; } while (j < 10) { j++; }").unwrap();
        let ts = explicit(&cfa, &["i", "j"]);
        let KleeneOutcome::Converged { values, .. } = kleene_tcd(&cfa, &ts, 100).unwrap() else {
            panic!("no convergence");
        };
        let heads: Vec<_> = cfa.loop_heads.iter().copied().collect();
        let i = Template::parse("i").unwrap();
        let j = Template::parse("j").unwrap();
        let a = values[&heads[0]].as_ref().unwrap();
        let b = values[&heads[1]].as_ref().unwrap();
        assert_eq!((a[&i].clone(), a[&j].clone()), (rat(10), rat(0)));
        assert_eq!((b[&i].clone(), b[&j].clone()), (rat(10), rat(10)));
    }

    #[test]
    fn large_loop_does_not_converge() {
        let cfa = compile("int i = 0; while (i < 1000000) i++;").unwrap();
        let ts = explicit(&cfa, &["i"]);
        assert_eq!(kleene_tcd(&cfa, &ts, 100).unwrap(), KleeneOutcome::DidNotConverge);
    }

    #[test]
    fn loop_free_converges_quickly() {
        let cfa = compile("int x = 1; if (x > 0) { x = 2; } else { x = 3; }").unwrap();
        let ts = explicit(&cfa, &["x"]);
        let KleeneOutcome::Converged { iterations, .. } = kleene_tcd(&cfa, &ts, 100).unwrap() else {
            panic!("no convergence");
        };
        assert!(iterations <= cfa.num_nodes);
    }
}
