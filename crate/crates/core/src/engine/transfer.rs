use std::sync::Arc;

use crate::cfa::Edge;
use crate::congruence::{congruence_transfer, parity_constraints, CongruenceState};
use crate::domain::{AbstractedState, IntermediateState};
use crate::error::Result;
use crate::formula::Formula;
use crate::linear::{Atom, Role, VarId};

/// `<a, true>`; the identity relation is left implicit until the first edge.
pub fn lift(a: &Arc<AbstractedState>) -> IntermediateState {
    IntermediateState {
        node: a.node,
        start: a.clone(),
        formula: Formula::True,
        touched: Default::default(),
        layers: 0,
        congruence: a.congruence.clone(),
    }
}

fn hidden(v: &VarId, ns: &str) -> VarId {
    VarId::aux(&v.name, ns)
}

/// `exists X^. phi(X, X^) && tau(X^, X')`, with `X^` kept as free
/// variables in the fresh namespace `h{k}`.
pub fn compose(s: &IntermediateState, edge: &Edge) -> IntermediateState {
    let formula = if s.layers == 0 {
        edge.formula.clone()
    } else {
        let ns = format!("h{}", s.layers);
        let phi = s.formula.rename(&mut |v: &VarId| {
            if v.role == Role::Output && v.namespace.is_none() {
                hidden(v, &ns)
            } else {
                v.clone()
            }
        });
        let tau = edge.formula.rename(&mut |v: &VarId| {
            if v.role == Role::Input && v.namespace.is_none() {
                hidden(v, &ns)
            } else {
                v.clone()
            }
        });
        Formula::and([phi, tau])
    };
    let mut touched = s.touched.clone();
    if let Some(w) = edge.written() {
        touched.insert(w.clone());
    }
    touched.extend(edge.read());
    IntermediateState {
        node: edge.to,
        start: s.start.clone(),
        formula,
        touched,
        layers: s.layers + 1,
        congruence: s.congruence.as_ref().map(|c| congruence_transfer(c, &edge.op)),
    }
}

/// Constraints every model of a path from `s.start` must satisfy besides the
/// path formula: the start bounds, and in integer mode the parities at both
/// ends.
pub fn base_constraints(s: &IntermediateState, integer: bool) -> Result<Vec<Atom>> {
    let mut out = s.start.constraints();
    if integer {
        if let Some(c) = &s.start.congruence {
            out.extend(parity_constraints(c, true)?);
        }
        if let Some(c) = &s.congruence {
            out.extend(output_parity(c)?);
        }
    }
    Ok(out)
}

/// Parity atoms over `X'`.
pub fn output_parity(c: &CongruenceState) -> Result<Vec<Atom>> {
    Ok(parity_constraints(c, true)?
        .into_iter()
        .map(|a| {
            a.rename(|v| match v.role {
                Role::Input => v.with_role(Role::Output),
                _ => VarId::aux(&v.name, "par_out"),
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfa::Op;
    use crate::frontend::compile;
    use crate::formula::{evaluate, Model};
    use crate::linear::rat;

    #[test]
    fn sequential_assignments_use_one_hidden_copy() {
        let cfa = compile("int x; int y; x = x + 1; y = x + y;").unwrap();
        let top = Arc::new(AbstractedState::top(cfa.entry));
        let mut s = lift(&top);
        let mut node = cfa.entry;
        while let Some(e) = cfa.out_edges(node).next() {
            s = compose(&s, e);
            node = e.to;
        }
        let hidden: std::collections::BTreeSet<_> = s
            .formula
            .vars()
            .into_iter()
            .filter_map(|v| v.namespace.clone())
            .collect();
        assert_eq!(hidden.len(), s.layers - 1);
        // x = 3, y = 4 (after the declaration edges keep them) -> x' = 4, y' = 8
        let x = VarId::input("x");
        let y = VarId::input("y");
        let mut m = Model::new().with(x.clone(), rat(3)).with(y.clone(), rat(4));
        m = m.with(x.with_role(Role::Output), rat(4)).with(y.with_role(Role::Output), rat(8));
        // hidden copies: fill in by replaying the edges
        let mut vals = (rat(3), rat(4));
        for k in 1..s.layers {
            let e = cfa.edges.iter().find(|e| e.from == k - 1).unwrap();
            if let Op::Assign(v, Some(expr)) = &e.op {
                let env = Model::new().with(x.clone(), vals.0.clone()).with(y.clone(), vals.1.clone());
                let val = expr.eval(&env).unwrap();
                if *v == x {
                    vals.0 = val;
                } else {
                    vals.1 = val;
                }
            }
            let ns = format!("h{k}");
            m = m.with(VarId::aux("x", &ns), vals.0.clone()).with(VarId::aux("y", &ns), vals.1.clone());
        }
        let _ = &mut m;
        assert!(evaluate(&s.formula, &m).unwrap());
        let bad = m.clone().with(y.with_role(Role::Output), rat(7));
        assert!(!evaluate(&s.formula, &bad).unwrap());
    }
}
