//! Independent checks on a finished analysis: assertion verdicts and
//! inductiveness of the invariant.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::cfa::{Cfa, EdgeKind, NodeId, Wto};
use crate::congruence::Parity;
use crate::domain::{AbstractedState, IntermediateState};
use crate::error::Result;
use crate::linear::{Atom, LinearExpr, Rational, Role, VarId};
use crate::opt::Optimizer;

use super::transfer::{base_constraints, compose, lift};
use super::{AnalysisResult, AssertionVerdict, Verdict};

/// Path formulas of every edge leaving the region that starts at `start`:
/// edges into abstraction points and assertion-failure edges.
fn exits(cfa: &Cfa, points: &BTreeSet<NodeId>, pos: &BTreeMap<NodeId, usize>, start: &Arc<AbstractedState>) -> Vec<(usize, IntermediateState)> {
    let key = |n: NodeId| (pos.get(&n).copied().unwrap_or(usize::MAX), n);
    let mut at: BTreeMap<(usize, NodeId), IntermediateState> = BTreeMap::from([(key(start.node), lift(start))]);
    let mut out = Vec::new();
    while let Some((_, s)) = at.pop_first() {
        for (idx, e) in cfa.edges.iter().enumerate() {
            if e.from != s.node {
                continue;
            }
            let next = compose(&s, e);
            if points.contains(&e.to) || matches!(e.kind, EdgeKind::AssertFail(_)) {
                out.push((idx, next));
                continue;
            }
            let k = key(e.to);
            let merged = match at.remove(&k) {
                Some(prev) => IntermediateState::merge(&prev, &next).expect("same start"),
                None => next,
            };
            at.insert(k, merged);
        }
    }
    out
}

/// An assertion is proved when no failure edge is feasible from any
/// reached abstraction point.
pub fn verdicts(
    cfa: &Cfa,
    points: &BTreeSet<NodeId>,
    invariants: &BTreeMap<NodeId, Arc<AbstractedState>>,
    wto: &Wto,
) -> Result<Vec<AssertionVerdict>> {
    let pos = wto.positions();
    let mut opt = Optimizer::new(true);
    let mut failing = BTreeSet::new();
    for p in points {
        let Some(inv) = invariants.get(p) else {
            continue;
        };
        for (idx, s) in exits(cfa, points, &pos, inv) {
            let EdgeKind::AssertFail(id) = cfa.edges[idx].kind else {
                continue;
            };
            if failing.contains(&id) {
                continue;
            }
            let base = base_constraints(&s, true)?;
            if opt.satisfiable(&s.formula, &base)?.is_some() {
                failing.insert(id);
            }
        }
    }
    Ok(cfa
        .assertions
        .iter()
        .map(|a| AssertionVerdict {
            id: a.id,
            line: a.line,
            verdict: if failing.contains(&a.id) { Verdict::Unknown } else { Verdict::Proved },
        })
        .collect())
}

fn parity_violation(v: &VarId, p: Parity) -> Option<Atom> {
    let other = match p {
        Parity::Even => 1,
        Parity::Odd => 0,
        _ => return None,
    };
    let k = VarId::aux(&format!("k_{}", v.name), "par_check");
    Some(Atom::eq(
        LinearExpr::var(v.with_role(Role::Output)),
        LinearExpr::from_terms([(k, Rational::from_integer(2.into()))], Rational::from_integer(other.into())),
    ))
}

/// Checks in integer arithmetic that the entry state is unconstrained and
/// that every path between abstraction points maps the invariant into
/// itself.
pub fn check_inductive(r: &AnalysisResult) -> Result<bool> {
    let cfa = &r.cfa;
    match r.invariants.get(&cfa.entry) {
        Some(s) if s.entries.is_empty() && s.congruence.as_ref().is_none_or(|c| c.iter().next().is_none()) => {}
        _ => return Ok(false),
    }
    let pos = r.wto.positions();
    let mut opt = Optimizer::new(true);
    for p in &r.points {
        let Some(inv) = r.invariants.get(p) else {
            continue;
        };
        for (idx, s) in exits(cfa, &r.points, &pos, inv) {
            let e = &cfa.edges[idx];
            if matches!(e.kind, EdgeKind::AssertFail(_)) {
                continue;
            }
            let base = base_constraints(&s, true)?;
            let base: Vec<Atom> = base.into_iter().filter(|a| !a.vars().any(|v| v.namespace.as_deref() == Some("par_out"))).collect();
            if opt.satisfiable(&s.formula, &base)?.is_none() {
                continue;
            }
            let Some(target) = r.invariants.get(&e.to) else {
                return Ok(false);
            };
            for (t, entry) in &target.entries {
                if opt.check_exceeds(&s.formula, &base, &t.output(), &entry.bound)? {
                    return Ok(false);
                }
            }
            if let Some(c) = &target.congruence {
                for (v, par) in c.iter() {
                    if *par == Parity::Bottom {
                        return Ok(false);
                    }
                    if let Some(bad) = parity_violation(v, *par) {
                        let mut atoms = base.clone();
                        atoms.push(bad);
                        if opt.satisfiable(&s.formula, &atoms)?.is_some() {
                            return Ok(false);
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}
