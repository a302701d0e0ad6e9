use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::cfa::NodeId;
use crate::domain::{AbstractedState, PolicyBound, Template};
use crate::error::{Error, Result};
use crate::formula::namespace;
use crate::linear::{Atom, LinearExpr, Rational, Role, VarId};
use crate::lp::{LpResult, Solver};

/// Follows policy backpointers from `s`, resolving each node to its current
/// state through `current`. Backpointers of input-independent entries are
/// not followed.
pub fn compute_influencing<F>(s: &Arc<AbstractedState>, current: F) -> Result<BTreeMap<NodeId, Arc<AbstractedState>>>
where
    F: Fn(NodeId) -> Option<Arc<AbstractedState>>,
{
    let mut map = BTreeMap::from([(s.node, s.clone())]);
    let mut stack = vec![s.clone()];
    while let Some(st) = stack.pop() {
        for e in st.entries.values() {
            if e.input_independent {
                continue;
            }
            let n0 = e.backpointer.node;
            let resolved = if n0 == s.node {
                s.clone()
            } else {
                current(n0).unwrap_or_else(|| e.backpointer.clone())
            };
            match map.get(&n0) {
                Some(existing) if !Arc::ptr_eq(existing, &resolved) => return Err(Error::InfluenceCollision(n0)),
                Some(_) => {}
                None => {
                    map.insert(n0, resolved.clone());
                    stack.push(resolved);
                }
            }
        }
    }
    Ok(map)
}

/// The global LP of one value determination.
#[derive(Debug, Clone)]
pub struct VdProblem {
    pub constraints: Vec<Atom>,
    /// `d_n^t` for every entry of every influencing state.
    pub objectives: BTreeMap<(NodeId, Template), VarId>,
}

fn d_var(node: NodeId, index: usize) -> VarId {
    VarId::aux(&format!("d{node}_{index}"), "vd")
}

impl VdProblem {
    pub fn build(influencing: &BTreeMap<NodeId, Arc<AbstractedState>>) -> Result<VdProblem> {
        let mut objectives = BTreeMap::new();
        for (n, s) in influencing {
            for (i, t) in s.entries.keys().enumerate() {
                objectives.insert((*n, t.clone()), d_var(*n, i));
            }
        }
        let mut constraints = Vec::new();
        let mut copy = 0usize;
        for (n, s) in influencing {
            for (t, e) in &s.entries {
                copy += 1;
                let ns = format!("vd{copy}");
                let psi = namespace(&e.policy, &ns, |_| true)?;
                let atoms = psi
                    .to_atoms()
                    .ok_or_else(|| Error::Internal(format!("policy with a disjunction at node {n}")))?;
                constraints.extend(atoms);
                let out = t.output().rename(|v| v.prefixed(&ns));
                constraints.push(Atom::eq(LinearExpr::var(objectives[&(*n, t.clone())].clone()), out));
                if e.input_independent {
                    continue;
                }
                let n0 = e.backpointer.node;
                let Some(s0) = influencing.get(&n0) else {
                    return Err(Error::Internal(format!("backpointer node {n0} missing from the influencing map")));
                };
                let policy_inputs: BTreeSet<VarId> = e.policy.vars().into_iter().filter(|v| v.role == Role::Input && v.namespace.is_none()).collect();
                for t0 in s0.entries.keys() {
                    if t0.vars().is_disjoint(&policy_inputs) {
                        continue;
                    }
                    let lhs = t0.expr().rename(|v| v.prefixed(&ns));
                    constraints.push(Atom::leq(lhs, LinearExpr::var(objectives[&(n0, t0.clone())].clone())));
                }
            }
        }
        Ok(VdProblem { constraints, objectives })
    }
}

/// Least fixpoint of the selected policies at `node`. Entries whose value is
/// unbounded are dropped; policies and backpointers are kept.
pub fn value_determination(
    node: NodeId,
    influencing: &BTreeMap<NodeId, Arc<AbstractedState>>,
    solver: &mut Solver,
) -> Result<AbstractedState> {
    let s = influencing
        .get(&node)
        .ok_or_else(|| Error::Internal(format!("node {node} missing from the influencing map")))?;
    let problem = VdProblem::build(influencing)?;
    // Feasible d-vectors are closed under componentwise max, so maximizing
    // the sum attains every template's own maximum at once.
    let mut open: BTreeMap<&Template, &VarId> = s.entries.keys().map(|t| (t, &problem.objectives[&(node, t.clone())])).collect();
    let mut entries = BTreeMap::new();
    while !open.is_empty() {
        let sum = LinearExpr::from_terms(open.values().map(|d| ((*d).clone(), Rational::one())), Rational::zero());
        match solver.maximize(&sum, &problem.constraints)? {
            LpResult::Optimal { model, .. } => {
                for (t, d) in open {
                    let bound = model.get(d).cloned().unwrap_or_else(Rational::zero);
                    entries.insert(t.clone(), PolicyBound { bound, ..s.entries[t].clone() });
                }
                break;
            }
            LpResult::Unbounded(ray) => {
                let before = open.len();
                open.retain(|_, d| !ray.get(*d).is_some_and(|r| r.is_positive()));
                if open.len() == before {
                    return Err(Error::Internal(format!("value determination ray at node {node} leaves every bound fixed")));
                }
            }
            LpResult::Infeasible => {
                return Err(Error::Internal(format!("infeasible value determination at node {node}")));
            }
        }
    }
    Ok(AbstractedState {
        node,
        entries,
        congruence: s.congruence.clone(),
        vd_fixpoint: true,
    })
}
