//! Linear-arithmetic formulas with boolean structure, marker annotation and
//! namespacing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::One;

use crate::error::{Error, Result};
use crate::linear::{Atom, LinearExpr, Rational, Relation, VarId};

/// An assignment to numeric variables and to boolean markers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    pub numeric: BTreeMap<VarId, Rational>,
    pub boolean: BTreeMap<VarId, bool>,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, v: VarId, q: Rational) -> Self {
        self.numeric.insert(v, q);
        self
    }

    pub fn value(&self, v: &VarId) -> Option<&Rational> {
        self.numeric.get(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Leaf(Atom),
    And(Vec<Formula>),
    /// Disjunction; when a marker `m` is present it reads `(m && l) || (!m && r)`.
    Or(Box<Formula>, Box<Formula>, Option<VarId>),
}

impl Formula {
    pub fn atom(a: Atom) -> Formula {
        Formula::Leaf(a)
    }

    /// Flattening conjunction.
    pub fn and<I: IntoIterator<Item = Formula>>(parts: I) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        match (l, r) {
            (Formula::False, r) => r,
            (l, Formula::False) => l,
            (Formula::True, _) | (_, Formula::True) => Formula::True,
            (l, r) => Formula::Or(Box::new(l), Box::new(r), None),
        }
    }

    pub fn from_atoms<I: IntoIterator<Item = Atom>>(atoms: I) -> Formula {
        Formula::and(atoms.into_iter().map(Formula::Leaf))
    }

    /// True iff the formula contains no disjunction.
    pub fn is_policy_form(&self) -> bool {
        match self {
            Formula::Or(..) => false,
            Formula::And(parts) => parts.iter().all(Formula::is_policy_form),
            _ => true,
        }
    }

    /// Conjunction of atoms for a disjunction-free formula. `False` becomes
    /// the contradictory atom `1 <= 0`.
    pub fn to_atoms(&self) -> Option<Vec<Atom>> {
        fn walk(f: &Formula, out: &mut Vec<Atom>) -> bool {
            match f {
                Formula::True => true,
                Formula::False => {
                    out.push(Atom::new(LinearExpr::constant(Rational::one()), Relation::Leq));
                    true
                }
                Formula::Leaf(a) => {
                    out.push(a.clone());
                    true
                }
                Formula::And(parts) => parts.iter().all(|p| walk(p, out)),
                Formula::Or(..) => false,
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out).then_some(out)
    }

    pub fn for_each_atom<F: FnMut(&Atom)>(&self, f: &mut F) {
        match self {
            Formula::Leaf(a) => f(a),
            Formula::And(parts) => parts.iter().for_each(|p| p.for_each_atom(f)),
            Formula::Or(l, r, _) => {
                l.for_each_atom(f);
                r.for_each_atom(f);
            }
            Formula::True | Formula::False => {}
        }
    }

    /// Numeric variables (markers excluded).
    pub fn vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.for_each_atom(&mut |a| out.extend(a.vars().cloned()));
        out
    }

    pub fn markers(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.collect_markers(&mut out);
        out
    }

    fn collect_markers(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Formula::And(parts) => parts.iter().for_each(|p| p.collect_markers(out)),
            Formula::Or(l, r, m) => {
                if let Some(m) = m {
                    out.insert(m.clone());
                }
                l.collect_markers(out);
                r.collect_markers(out);
            }
            _ => {}
        }
    }

    /// Renames numeric variables; markers are left alone.
    pub fn rename<F: FnMut(&VarId) -> VarId>(&self, f: &mut F) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Leaf(a) => Formula::Leaf(a.rename(&mut *f)),
            Formula::And(parts) => Formula::And(parts.iter().map(|p| p.rename(f)).collect()),
            Formula::Or(l, r, m) => Formula::Or(Box::new(l.rename(f)), Box::new(r.rename(f)), m.clone()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::And(parts) => 1 + parts.iter().map(Formula::size).sum::<usize>(),
            Formula::Or(l, r, _) => 1 + l.size() + r.size(),
            _ => 1,
        }
    }
}

/// Standard truth value; markers on `Or` nodes are ignored.
pub fn evaluate(f: &Formula, m: &Model) -> Result<bool> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Leaf(a) => a.holds(m)?,
        Formula::And(parts) => {
            for p in parts {
                if !evaluate(p, m)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(l, r, _) => evaluate(l, m)? || evaluate(r, m)?,
    })
}

/// Tags every disjunction with a fresh marker `m1, m2, ...` in preorder.
pub fn annotate_markers(f: &Formula) -> (Formula, BTreeSet<VarId>) {
    fn walk(f: &Formula, next: &mut usize, out: &mut BTreeSet<VarId>) -> Formula {
        match f {
            Formula::And(parts) => Formula::And(parts.iter().map(|p| walk(p, next, out)).collect()),
            Formula::Or(l, r, _) => {
                *next += 1;
                let m = VarId::marker(*next);
                out.insert(m.clone());
                let l = walk(l, next, out);
                let r = walk(r, next, out);
                Formula::Or(Box::new(l), Box::new(r), Some(m))
            }
            other => other.clone(),
        }
    }
    let mut next = 0;
    let mut markers = BTreeSet::new();
    let annotated = walk(f, &mut next, &mut markers);
    (annotated, markers)
}

/// Collapses every marked disjunction to the disjunct selected by `vals`.
pub fn substitute_markers(f: &Formula, vals: &BTreeMap<VarId, bool>) -> Result<Formula> {
    Ok(match f {
        Formula::And(parts) => Formula::and(
            parts
                .iter()
                .map(|p| substitute_markers(p, vals))
                .collect::<Result<Vec<_>>>()?,
        ),
        Formula::Or(l, r, Some(m)) => {
            let choice = vals.get(m).ok_or_else(|| Error::MissingMarker(m.clone()))?;
            if *choice {
                substitute_markers(l, vals)?
            } else {
                substitute_markers(r, vals)?
            }
        }
        Formula::Or(l, r, None) => Formula::Or(
            Box::new(substitute_markers(l, vals)?),
            Box::new(substitute_markers(r, vals)?),
            None,
        ),
        other => other.clone(),
    })
}

/// Prefixes the namespace of every variable selected by `which`.
pub fn namespace<P: Fn(&VarId) -> bool>(f: &Formula, prefix: &str, which: P) -> Result<Formula> {
    let nested = format!("{prefix}.");
    let collides = f.vars().iter().any(|v| {
        v.namespace
            .as_deref()
            .is_some_and(|ns| ns == prefix || ns.starts_with(&nested))
    });
    if collides {
        return Err(Error::NamespaceCollision(prefix.to_string()));
    }
    Ok(f.rename(&mut |v: &VarId| if which(v) { v.prefixed(prefix) } else { v.clone() }))
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Leaf(a) => write!(f, "{a}"),
            Formula::And(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " && ")?;
                    }
                    if matches!(p, Formula::Or(..)) {
                        write!(f, "({p})")?;
                    } else {
                        write!(f, "{p}")?;
                    }
                }
                Ok(())
            }
            Formula::Or(l, r, m) => {
                if let Some(m) = m {
                    write!(f, "[{m}] ")?;
                }
                write!(f, "({l}) || ({r})")
            }
        }
    }
}
