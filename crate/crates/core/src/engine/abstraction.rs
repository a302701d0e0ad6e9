use std::collections::{BTreeMap, BTreeSet};

use crate::cfa::NodeId;
use crate::congruence::tighten_bound;
use crate::domain::{AbstractedState, IntermediateState, PolicyBound, Template};
use crate::error::Result;
use crate::formula::{annotate_markers, substitute_markers, Formula};
use crate::linear::{Atom, LinearExpr, Rational, Role, VarId};
use crate::opt::{OptResult, Optimizer};

use super::transfer::base_constraints;
use super::{AnalysisConfig, Stats};

/// Variables linked to `vars` through templates of `a`.
fn template_component(a: &AbstractedState, vars: &BTreeSet<VarId>) -> BTreeSet<VarId> {
    let mut comp = vars.clone();
    loop {
        let before = comp.len();
        for t in a.entries.keys() {
            let tv = t.vars();
            if !tv.is_disjoint(&comp) {
                comp.extend(tv);
            }
        }
        if comp.len() == before {
            return comp;
        }
    }
}

/// `v' = v` for every variable of `t`.
fn frame_policy(t: &Template) -> Formula {
    Formula::from_atoms(
        t.vars()
            .into_iter()
            .map(|v| Atom::eq(LinearExpr::var(v.with_role(Role::Output)), LinearExpr::var(v))),
    )
}

/// Whether the bound `d` of `t` under `policy` holds whatever the inputs.
pub fn input_independent(opt: &mut Optimizer, policy: &Formula, t: &Template, d: &Rational) -> Result<bool> {
    Ok(!opt.check_exceeds(policy, &[], &t.output(), d)?)
}

/// Converts an intermediate state at abstraction point `node` into a
/// template-domain element. `start_templates` is the template set of the
/// start node. `None` means the state is infeasible.
pub fn abstraction(
    s: &IntermediateState,
    node: NodeId,
    templates: &BTreeSet<Template>,
    start_templates: &BTreeSet<Template>,
    cfg: &AnalysisConfig,
    opt: &mut Optimizer,
    stats: &mut Stats,
) -> Result<Option<AbstractedState>> {
    stats.abstractions += 1;
    let a0 = &s.start;
    let base = base_constraints(s, cfg.integer())?;
    let (annotated, markers) = annotate_markers(&s.formula);
    let disjunctive = !markers.is_empty();
    let mut entries = BTreeMap::new();
    let mut queried = false;
    for t in templates {
        let tv = t.vars();
        if cfg.toggles.syntactic_skip
            && !cfg.congruence
            && start_templates.contains(t)
            && template_component(a0, &tv).is_disjoint(&s.touched)
        {
            stats.skipped_by_syntactic_check += 1;
            if let Some(e) = a0.entries.get(t) {
                entries.insert(
                    t.clone(),
                    PolicyBound {
                        bound: e.bound.clone(),
                        policy: frame_policy(t),
                        backpointer: a0.clone(),
                        input_independent: false,
                    },
                );
            }
            continue;
        }
        if !disjunctive && !cfg.congruence && a0.vd_fixpoint && a0.node == node {
            if let Some(e) = a0.entries.get(t) {
                if e.backpointer.node == node && e.policy == s.formula {
                    stats.reused_from_value_determination += 1;
                    entries.insert(
                        t.clone(),
                        PolicyBound {
                            bound: e.bound.clone(),
                            policy: s.formula.clone(),
                            backpointer: a0.clone(),
                            input_independent: e.input_independent,
                        },
                    );
                    continue;
                }
            }
        }
        stats.opt_queries += 1;
        queried = true;
        match opt.maximize_formula(&t.output(), &annotated, &base)? {
            OptResult::Infeasible => return Ok(None),
            OptResult::Unbounded => {}
            OptResult::Optimal { value, model } => {
                let policy = if disjunctive {
                    substitute_markers(&annotated, &model.boolean)?
                } else {
                    s.formula.clone()
                };
                let ii = cfg.toggles.input_independence && {
                    stats.sat_checks += 1;
                    input_independent(opt, &policy, t, &value)?
                };
                if ii {
                    stats.input_independent += 1;
                }
                entries.insert(
                    t.clone(),
                    PolicyBound {
                        bound: value,
                        policy,
                        backpointer: a0.clone(),
                        input_independent: ii,
                    },
                );
            }
        }
    }
    if !queried {
        stats.sat_checks += 1;
        if opt.satisfiable(&annotated, &base)?.is_none() {
            return Ok(None);
        }
    }
    let mut out = AbstractedState {
        node,
        entries,
        congruence: s.congruence.clone(),
        vd_fixpoint: false,
    };
    if !cfg.integer() {
        tighten_by_parity(&mut out);
    }
    Ok(Some(out))
}

/// Relaxed mode: rounds bounds of `x` and `-x` to the known parity of `x`.
pub fn tighten_by_parity(a: &mut AbstractedState) {
    let Some(c) = a.congruence.clone() else {
        return;
    };
    for (t, e) in a.entries.iter_mut() {
        let terms: Vec<_> = t.expr().terms().collect();
        if let [(v, _)] = terms.as_slice() {
            let p = c.get(v);
            e.bound = tighten_bound(&e.bound, p);
        }
    }
}
