//! Parity analysis run alongside the template domain.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use crate::cfa::Op;
use crate::domain::{AbstractedState, Template};
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::linear::{Atom, LinearExpr, Rational, Relation, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Bottom,
    Even,
    Odd,
    Top,
}

impl Parity {
    pub fn of(n: &BigInt) -> Parity {
        if n.is_even() {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn of_rational(q: &Rational) -> Parity {
        if q.is_integer() {
            Parity::of(&q.to_integer())
        } else {
            Parity::Top
        }
    }

    pub fn join(self, o: Parity) -> Parity {
        match (self, o) {
            (Parity::Bottom, p) | (p, Parity::Bottom) => p,
            (a, b) if a == b => a,
            _ => Parity::Top,
        }
    }

    pub fn meet(self, o: Parity) -> Parity {
        match (self, o) {
            (Parity::Top, p) | (p, Parity::Top) => p,
            (a, b) if a == b => a,
            _ => Parity::Bottom,
        }
    }

    pub fn leq(self, o: Parity) -> bool {
        self.join(o) == o
    }

    fn add(self, o: Parity) -> Parity {
        match (self, o) {
            (Parity::Bottom, _) | (_, Parity::Bottom) => Parity::Bottom,
            (Parity::Top, _) | (_, Parity::Top) => Parity::Top,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        }
    }

    pub fn contains(self, n: &BigInt) -> bool {
        match self {
            Parity::Bottom => false,
            Parity::Top => true,
            p => Parity::of(n) == p,
        }
    }
}

/// Per-variable parity; absent variables are `Top`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CongruenceState {
    map: BTreeMap<VarId, Parity>,
}

impl CongruenceState {
    pub fn top() -> Self {
        Self::default()
    }

    pub fn get(&self, v: &VarId) -> Parity {
        self.map.get(v).copied().unwrap_or(Parity::Top)
    }

    pub fn set(&mut self, v: VarId, p: Parity) {
        if p == Parity::Top {
            self.map.remove(&v);
        } else {
            self.map.insert(v, p);
        }
    }

    pub fn is_bottom(&self) -> bool {
        self.map.values().any(|p| *p == Parity::Bottom)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarId, &Parity)> {
        self.map.iter()
    }

    pub fn join(&self, o: &CongruenceState) -> CongruenceState {
        if self.is_bottom() {
            return o.clone();
        }
        if o.is_bottom() {
            return self.clone();
        }
        let mut out = CongruenceState::top();
        for (v, p) in &self.map {
            out.set(v.clone(), p.join(o.get(v)));
        }
        out
    }

    pub fn leq(&self, o: &CongruenceState) -> bool {
        self.is_bottom() || o.map.iter().all(|(v, p)| self.get(v).leq(*p))
    }

    pub fn eval(&self, e: &LinearExpr) -> Parity {
        let mut p = Parity::of_rational(e.constant_term());
        for (v, c) in e.terms() {
            if !c.is_integer() {
                return Parity::Top;
            }
            let term = if c.to_integer().is_even() {
                Parity::Even
            } else {
                self.get(v)
            };
            p = p.add(term);
        }
        p
    }
}

impl fmt::Display for CongruenceState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.map.iter().map(|(v, p)| format!("{v}: {p:?}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Abstract effect of one edge.
pub fn congruence_transfer(s: &CongruenceState, op: &Op) -> CongruenceState {
    let mut out = s.clone();
    match op {
        Op::Assign(x, Some(e)) => out.set(x.clone(), s.eval(e)),
        Op::Assign(x, None) => out.set(x.clone(), Parity::Top),
        Op::Assume(f) => refine_by_guard(&mut out, f),
        Op::Skip => {}
    }
    out
}

/// `x == c` guards pin the parity of `x`.
fn refine_by_guard(s: &mut CongruenceState, f: &Formula) {
    match f {
        Formula::And(parts) => parts.iter().for_each(|p| refine_by_guard(s, p)),
        Formula::Leaf(Atom {
            expr,
            rel: Relation::Eq,
        }) => {
            let terms: Vec<_> = expr.terms().collect();
            if let [(v, c)] = terms.as_slice() {
                if c.abs().is_one() {
                    let value = -(expr.constant_term() / *c);
                    let p = s.get(v).meet(Parity::of_rational(&value));
                    s.set((*v).clone(), p);
                }
            }
        }
        _ => {}
    }
}

/// `x = 2k` or `x = 2k + 1` per known parity, with a fresh integer `k`.
pub fn parity_constraints(s: &CongruenceState, integer_mode: bool) -> Result<Vec<Atom>> {
    if !integer_mode {
        return Err(Error::ModeMismatch);
    }
    let mut out = Vec::new();
    for (v, p) in &s.map {
        let k = VarId::aux(&format!("k_{}", v.name), "par");
        let rhs = |c: i64| LinearExpr::from_terms([(k.clone(), Rational::from_integer(2.into()))], Rational::from_integer(c.into()));
        match p {
            Parity::Even => out.push(Atom::eq(LinearExpr::var(v.clone()), rhs(0))),
            Parity::Odd => out.push(Atom::eq(LinearExpr::var(v.clone()), rhs(1))),
            Parity::Bottom => out.push(Atom::leq(LinearExpr::constant(Rational::one()), LinearExpr::zero())),
            Parity::Top => {}
        }
    }
    Ok(out)
}

/// Uses template bounds that pin a variable to one value.
pub fn refine_from_bounds(s: &CongruenceState, a: &AbstractedState) -> CongruenceState {
    let mut out = s.clone();
    let mut vars: Vec<VarId> = Vec::new();
    for t in a.entries.keys() {
        vars.extend(t.vars());
    }
    vars.sort();
    vars.dedup();
    for v in vars {
        let (Some(hi), Some(lo)) = (a.bound(&Template::var(&v)), a.bound(&Template::neg_var(&v))) else {
            continue;
        };
        let lo = -lo.clone();
        if *hi < lo {
            out.set(v, Parity::Bottom);
        } else if *hi == lo {
            let p = out.get(&v).meet(Parity::of_rational(hi));
            out.set(v, p);
        }
    }
    out
}

/// Rounds a bound on `x` or `-x` down to the nearest integer of the known
/// parity.
pub fn tighten_bound(bound: &Rational, parity: Parity) -> Rational {
    let mut k = bound.floor();
    if let Parity::Even | Parity::Odd = parity {
        if Parity::of_rational(&k) != parity {
            k -= Rational::one();
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::rat;
    use proptest::prelude::*;

    fn x() -> VarId {
        VarId::input("x")
    }
    fn y() -> VarId {
        VarId::input("y")
    }

    #[test]
    fn assignment_parities() {
        let mut s = CongruenceState::top();
        s = congruence_transfer(&s, &Op::Assign(x(), Some(LinearExpr::term(y(), rat(2)))));
        assert_eq!(s.get(&x()), Parity::Even);
        let inc = LinearExpr::from_terms([(x(), rat(1))], rat(1));
        s = congruence_transfer(&s, &Op::Assign(x(), Some(inc)));
        assert_eq!(s.get(&x()), Parity::Odd);
        s = congruence_transfer(&s, &Op::Assign(x(), None));
        assert_eq!(s.get(&x()), Parity::Top);
    }

    #[test]
    fn equality_guard_refines() {
        let g = Formula::atom(Atom::eq(LinearExpr::var(x()), LinearExpr::constant(rat(4))));
        let s = congruence_transfer(&CongruenceState::top(), &Op::Assume(g));
        assert_eq!(s.get(&x()), Parity::Even);
    }

    #[test]
    fn constraints_need_integer_mode() {
        let mut s = CongruenceState::top();
        s.set(x(), Parity::Odd);
        s.set(y(), Parity::Even);
        let atoms = parity_constraints(&s, true).unwrap();
        assert_eq!(atoms.len(), 2);
        let aux: std::collections::BTreeSet<_> = atoms.iter().flat_map(|a| a.vars().cloned()).filter(|v| v.namespace.is_some()).collect();
        assert_eq!(aux.len(), 2);
        assert_eq!(parity_constraints(&CongruenceState::top(), true).unwrap(), vec![]);
        assert_eq!(parity_constraints(&s, false), Err(Error::ModeMismatch));
    }

    #[test]
    fn rounding_to_parity() {
        assert_eq!(tighten_bound(&rat(7), Parity::Even), rat(6));
        assert_eq!(tighten_bound(&crate::linear::frac(15, 2), Parity::Odd), rat(7));
        assert_eq!(tighten_bound(&rat(-3), Parity::Even), rat(-4));
    }

    fn parity() -> impl Strategy<Value = Parity> {
        prop_oneof![Just(Parity::Bottom), Just(Parity::Even), Just(Parity::Odd), Just(Parity::Top)]
    }

    proptest! {
        #[test]
        fn transfer_is_monotone(px in parity(), py in parity(), qx in parity(), qy in parity(), a in -3i64..4, b in -3i64..4, c in -3i64..4) {
            let mut s = CongruenceState::top();
            s.set(x(), px);
            s.set(y(), py);
            let mut t = s.clone();
            t.set(x(), px.join(qx));
            t.set(y(), py.join(qy));
            prop_assume!(!s.is_bottom());
            let e = LinearExpr::from_terms([(x(), rat(a)), (y(), rat(b))], rat(c));
            let op = Op::Assign(x(), Some(e));
            let (s2, t2) = (congruence_transfer(&s, &op), congruence_transfer(&t, &op));
            prop_assert!(s2.leq(&t2));
        }
    }
}
