use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::cfa::NodeId;
use crate::congruence::CongruenceState;
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::linear::{fmt_rational, Atom, LinearExpr, Rational, VarId};

use super::Template;

#[derive(Debug, Clone)]
pub struct PolicyBound {
    pub bound: Rational,
    /// Disjunction-free restriction of the path formula that attains `bound`.
    pub policy: Formula,
    pub backpointer: Arc<AbstractedState>,
    /// The bound is reached whatever the input bounds are.
    pub input_independent: bool,
}

/// A template-domain element at an abstraction point. A missing template is
/// unbounded.
#[derive(Debug, Clone)]
pub struct AbstractedState {
    pub node: NodeId,
    pub entries: BTreeMap<Template, PolicyBound>,
    pub congruence: Option<CongruenceState>,
    /// Produced by value determination: its bounds are the least fixpoint of
    /// the recorded policies.
    pub vd_fixpoint: bool,
}

impl AbstractedState {
    /// The unconstrained state.
    pub fn top(node: NodeId) -> Self {
        AbstractedState {
            node,
            entries: BTreeMap::new(),
            congruence: None,
            vd_fixpoint: false,
        }
    }

    pub fn bound(&self, t: &Template) -> Option<&Rational> {
        self.entries.get(t).map(|e| &e.bound)
    }

    /// `t . X <= d` for every entry.
    pub fn constraints(&self) -> Vec<Atom> {
        self.entries
            .iter()
            .map(|(t, e)| Atom::leq(t.expr().clone(), LinearExpr::constant(e.bound.clone())))
            .collect()
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.entries.keys().flat_map(|t| t.vars()).collect()
    }

    /// Bounds and parities, without policy metadata.
    pub fn same_values(&self, o: &AbstractedState) -> bool {
        self.node == o.node
            && self.congruence == o.congruence
            && self.entries.len() == o.entries.len()
            && self.entries.iter().all(|(t, e)| o.bound(t) == Some(&e.bound))
    }

    pub fn leq(&self, o: &AbstractedState) -> Result<bool> {
        if self.node != o.node {
            return Err(Error::NodeMismatch(self.node, o.node));
        }
        Ok(o.entries.iter().all(|(t, e)| self.bound(t).is_some_and(|b| *b <= e.bound)))
    }

    /// Least upper bound; on equal bounds the entry of `old` is kept.
    pub fn join(new: &AbstractedState, old: &AbstractedState) -> Result<AbstractedState> {
        if new.node != old.node {
            return Err(Error::NodeMismatch(new.node, old.node));
        }
        let mut entries = BTreeMap::new();
        for (t, o) in &old.entries {
            if let Some(n) = new.entries.get(t) {
                let pick = if n.bound > o.bound { n } else { o };
                entries.insert(t.clone(), pick.clone());
            }
        }
        let congruence = match (&new.congruence, &old.congruence) {
            (Some(a), Some(b)) => Some(a.join(b)),
            _ => None,
        };
        Ok(AbstractedState {
            node: old.node,
            entries,
            congruence,
            vd_fixpoint: false,
        })
    }

    /// Whether some reached state at the same node covers `self`.
    pub fn covered_by<'a, I: IntoIterator<Item = &'a AbstractedState>>(&self, reached: I) -> bool {
        reached
            .into_iter()
            .any(|r| r.node == self.node && self.leq(r).unwrap_or(false))
    }
}

impl fmt::Display for AbstractedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (t, e)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{t} <= {}", fmt_rational(&e.bound))?;
        }
        write!(f, "}}")
    }
}

/// A path formula from an abstracted state, not yet abstracted.
#[derive(Debug, Clone)]
pub struct IntermediateState {
    pub node: NodeId,
    pub start: Arc<AbstractedState>,
    /// Relation between the start values `X` and the current values `X'`;
    /// intermediate copies live in auxiliary namespaces.
    pub formula: Formula,
    /// Variables written or read along some path.
    pub touched: BTreeSet<VarId>,
    /// Number of auxiliary layers used so far.
    pub layers: usize,
    pub congruence: Option<CongruenceState>,
}

impl IntermediateState {
    /// `<a, true>` with identity frames.
    pub fn lift(a: &Arc<AbstractedState>, vars: &[VarId]) -> Self {
        let formula = Formula::from_atoms(vars.iter().map(|v| {
            Atom::eq(
                LinearExpr::var(v.with_role(crate::linear::Role::Output)),
                LinearExpr::var(v.clone()),
            )
        }));
        IntermediateState {
            node: a.node,
            start: a.clone(),
            formula,
            touched: BTreeSet::new(),
            layers: 0,
            congruence: a.congruence.clone(),
        }
    }

    /// Disjunction of two states with the identical start; `None` otherwise.
    pub fn merge(a: &IntermediateState, b: &IntermediateState) -> Option<IntermediateState> {
        if a.node != b.node || !Arc::ptr_eq(&a.start, &b.start) {
            return None;
        }
        if a.formula == b.formula {
            return Some(a.clone());
        }
        let congruence = match (&a.congruence, &b.congruence) {
            (Some(x), Some(y)) => Some(x.join(y)),
            _ => None,
        };
        Some(IntermediateState {
            node: a.node,
            start: a.start.clone(),
            formula: Formula::or(a.formula.clone(), b.formula.clone()),
            touched: a.touched.union(&b.touched).cloned().collect(),
            layers: a.layers.max(b.layers),
            congruence,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::rat;

    fn state(node: NodeId, bounds: &[(&str, i64)], back: &Arc<AbstractedState>) -> AbstractedState {
        let mut s = AbstractedState::top(node);
        for (v, b) in bounds {
            s.entries.insert(
                Template::var(&VarId::input(v)),
                PolicyBound {
                    bound: rat(*b),
                    policy: Formula::True,
                    backpointer: back.clone(),
                    input_independent: false,
                },
            );
        }
        s
    }

    #[test]
    fn order_and_join() {
        let root = Arc::new(AbstractedState::top(0));
        let a5 = state(1, &[("x", 5)], &root);
        let a7 = state(1, &[("x", 7)], &root);
        let top = AbstractedState::top(1);
        assert!(a5.leq(&a7).unwrap());
        assert!(a5.leq(&top).unwrap());
        assert!(!top.leq(&a5).unwrap());
        assert!(AbstractedState::join(&a5, &top).unwrap().entries.is_empty());
        assert!(a5.leq(&state(2, &[], &root)).is_err());
    }

    #[test]
    fn join_keeps_larger_bound_and_its_backpointer() {
        let a0 = Arc::new(AbstractedState::top(0));
        let a1 = Arc::new(state(1, &[("i", 0), ("j", 0)], &a0));
        let a2 = state(1, &[("i", 1), ("j", 0)], &a1);
        let a3 = AbstractedState::join(&a2, &a1).unwrap();
        let i = &a3.entries[&Template::var(&VarId::input("i"))];
        let j = &a3.entries[&Template::var(&VarId::input("j"))];
        assert_eq!(i.bound, rat(1));
        assert!(Arc::ptr_eq(&i.backpointer, &a1));
        assert_eq!(j.bound, rat(0));
        assert!(Arc::ptr_eq(&j.backpointer, &a0));
    }

    #[test]
    fn merge_requires_identical_start() {
        let a = Arc::new(AbstractedState::top(0));
        let b = Arc::new(AbstractedState::top(0));
        let vars = [VarId::input("x")];
        let s = IntermediateState::lift(&a, &vars);
        let mut t = s.clone();
        t.formula = Formula::False;
        let m = IntermediateState::merge(&s, &t).unwrap();
        assert_eq!(m.formula, s.formula);
        let mut u = s.clone();
        u.formula = Formula::True;
        assert!(matches!(IntermediateState::merge(&s, &u).unwrap().formula, Formula::True));
        assert!(IntermediateState::merge(&s, &IntermediateState::lift(&b, &vars)).is_none());
        assert_eq!(IntermediateState::merge(&s, &s).unwrap().formula, s.formula);
    }
}
