//! Exact rationals, variables, linear expressions and atoms.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::formula::Model;

/// Arbitrary-precision rational, always kept in lowest terms.
pub type Rational = num_rational::BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Formats a rational as `n` or `n/d`.
pub fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `n` or `n/d`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

/// A rational extended with both infinities.
///
/// `NegInf` encodes an unreachable state, `PosInf` an unbounded template.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtRational {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl ExtRational {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtRational::Finite(q) => Some(q),
            _ => None,
        }
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtRational::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::NegInf => write!(f, "-inf"),
            ExtRational::PosInf => write!(f, "+inf"),
            ExtRational::Finite(q) => write!(f, "{}", fmt_rational(q)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Input,
    Output,
    Aux,
    Marker,
}

/// A variable: base name, optional namespace prefix and role.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId {
    pub name: Arc<str>,
    pub namespace: Option<Arc<str>>,
    pub role: Role,
}

impl VarId {
    pub fn new(name: &str, namespace: Option<&str>, role: Role) -> Self {
        VarId {
            name: name.into(),
            namespace: namespace.map(Into::into),
            role,
        }
    }

    pub fn input(name: &str) -> Self {
        Self::new(name, None, Role::Input)
    }

    pub fn output(name: &str) -> Self {
        Self::new(name, None, Role::Output)
    }

    pub fn aux(name: &str, namespace: &str) -> Self {
        Self::new(name, Some(namespace), Role::Aux)
    }

    pub fn marker(index: usize) -> Self {
        Self::new(&format!("m{index}"), None, Role::Marker)
    }

    pub fn is_marker(&self) -> bool {
        self.role == Role::Marker
    }

    pub fn with_role(&self, role: Role) -> Self {
        VarId {
            role,
            ..self.clone()
        }
    }

    /// Same variable with `prefix` prepended to its namespace.
    pub fn prefixed(&self, prefix: &str) -> Self {
        let namespace = match &self.namespace {
            Some(ns) => format!("{prefix}.{ns}"),
            None => prefix.to_string(),
        };
        VarId {
            name: self.name.clone(),
            namespace: Some(namespace.into()),
            role: self.role,
        }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if self.role == Role::Output {
            write!(f, "'")?;
        }
        if let Some(ns) = &self.namespace {
            write!(f, "@{ns}")?;
        }
        Ok(())
    }
}

/// `sum(coeff * var) + constant`. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinearExpr {
    coeffs: BTreeMap<VarId, Rational>,
    constant: Rational,
}

impl LinearExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        LinearExpr {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: VarId) -> Self {
        Self::term(v, Rational::one())
    }

    pub fn term(v: VarId, c: Rational) -> Self {
        let mut e = Self::zero();
        e.add_term(v, c);
        e
    }

    pub fn from_terms<I: IntoIterator<Item = (VarId, Rational)>>(terms: I, constant: Rational) -> Self {
        let mut e = Self::constant(constant);
        for (v, c) in terms {
            e.add_term(v, c);
        }
        e
    }

    pub fn add_term(&mut self, v: VarId, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(v);
        match entry {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn add_constant(&mut self, c: &Rational) {
        self.constant += c;
    }

    pub fn coeff(&self, v: &VarId) -> Rational {
        self.coeffs.get(v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &BTreeMap<VarId, Rational> {
        &self.coeffs
    }

    pub fn terms(&self) -> impl Iterator<Item = (&VarId, &Rational)> {
        self.coeffs.iter()
    }

    pub fn constant_term(&self) -> &Rational {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &VarId> {
        self.coeffs.keys()
    }

    pub fn linear_part(&self) -> LinearExpr {
        LinearExpr {
            coeffs: self.coeffs.clone(),
            constant: Rational::zero(),
        }
    }

    pub fn scale(&self, k: &Rational) -> LinearExpr {
        if k.is_zero() {
            return LinearExpr::zero();
        }
        LinearExpr {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn rename<F: FnMut(&VarId) -> VarId>(&self, mut f: F) -> LinearExpr {
        let mut out = LinearExpr::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            out.add_term(f(v), c.clone());
        }
        out
    }

    /// Replaces `v` by `replacement`.
    pub fn substitute(&self, v: &VarId, replacement: &LinearExpr) -> LinearExpr {
        match self.coeffs.get(v) {
            None => self.clone(),
            Some(c) => {
                let mut out = self.clone();
                out.coeffs.remove(v);
                out + replacement.scale(c)
            }
        }
    }

    pub fn eval(&self, m: &Model) -> Result<Rational> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            let x = m
                .numeric
                .get(v)
                .ok_or_else(|| Error::MissingAssignment(v.clone()))?;
            acc += c * x;
        }
        Ok(acc)
    }

    /// Evaluates, treating missing variables as zero.
    pub fn eval_partial(&self, values: &BTreeMap<VarId, Rational>) -> Rational {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            if let Some(x) = values.get(v) {
                acc += c * x;
            }
        }
        acc
    }

    /// Positive rescaling with integer coefficients whose gcd is one.
    /// The constant is scaled along.
    pub fn integer_normalized(&self) -> LinearExpr {
        if self.coeffs.is_empty() {
            return self.clone();
        }
        let mut lcm = BigInt::one();
        for c in self.coeffs.values() {
            lcm = lcm.lcm(c.denom());
        }
        let scaled: Vec<(VarId, BigInt)> = self
            .coeffs
            .iter()
            .map(|(v, c)| (v.clone(), (c * Rational::from_integer(lcm.clone())).to_integer()))
            .collect();
        let mut g = BigInt::zero();
        for (_, c) in &scaled {
            g = g.gcd(c);
        }
        let factor = Rational::new(lcm, g);
        self.scale(&factor)
    }
}

impl fmt::Display for LinearExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if mag.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{}*{v}", fmt_rational(&mag))?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", fmt_rational(&self.constant))?;
        } else if !self.constant.is_zero() {
            let sign = if self.constant.is_negative() { "-" } else { "+" };
            write!(f, " {sign} {}", fmt_rational(&self.constant.abs()))?;
        }
        Ok(())
    }
}

impl Add for LinearExpr {
    type Output = LinearExpr;
    fn add(mut self, rhs: LinearExpr) -> LinearExpr {
        self.constant += rhs.constant;
        for (v, c) in rhs.coeffs {
            self.add_term(v, c);
        }
        self
    }
}

impl Sub for LinearExpr {
    type Output = LinearExpr;
    fn sub(self, rhs: LinearExpr) -> LinearExpr {
        self + (-rhs)
    }
}

impl Neg for LinearExpr {
    type Output = LinearExpr;
    fn neg(self) -> LinearExpr {
        LinearExpr {
            coeffs: self.coeffs.into_iter().map(|(v, c)| (v, -c)).collect(),
            constant: -self.constant,
        }
    }
}

impl Mul<&Rational> for LinearExpr {
    type Output = LinearExpr;
    fn mul(self, k: &Rational) -> LinearExpr {
        self.scale(k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// `expr <= 0`
    Leq,
    /// `expr = 0`
    Eq,
}

/// `expr <= 0` or `expr = 0`. Strict comparisons are rewritten before an
/// atom is built, so they never appear here.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub expr: LinearExpr,
    pub rel: Relation,
}

impl Atom {
    pub fn new(expr: LinearExpr, rel: Relation) -> Self {
        Atom { expr, rel }
    }

    /// `lhs <= rhs`
    pub fn leq(lhs: LinearExpr, rhs: LinearExpr) -> Self {
        Atom::new(lhs - rhs, Relation::Leq)
    }

    /// `lhs >= rhs`
    pub fn geq(lhs: LinearExpr, rhs: LinearExpr) -> Self {
        Atom::leq(rhs, lhs)
    }

    /// `lhs < rhs` over the integers, i.e. `lhs <= rhs - 1`.
    pub fn lt(lhs: LinearExpr, rhs: LinearExpr) -> Self {
        let mut e = lhs - rhs;
        e.add_constant(&Rational::one());
        Atom::new(e, Relation::Leq)
    }

    /// `lhs > rhs` over the integers.
    pub fn gt(lhs: LinearExpr, rhs: LinearExpr) -> Self {
        Atom::lt(rhs, lhs)
    }

    pub fn eq(lhs: LinearExpr, rhs: LinearExpr) -> Self {
        Atom::new(lhs - rhs, Relation::Eq)
    }

    pub fn holds(&self, m: &Model) -> Result<bool> {
        let v = self.expr.eval(m)?;
        Ok(match self.rel {
            Relation::Leq => !v.is_positive(),
            Relation::Eq => v.is_zero(),
        })
    }

    pub fn vars(&self) -> impl Iterator<Item = &VarId> {
        self.expr.vars()
    }

    pub fn rename<F: FnMut(&VarId) -> VarId>(&self, f: F) -> Atom {
        Atom::new(self.expr.rename(f), self.rel)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lhs = self.expr.linear_part();
        let rhs = -self.expr.constant_term().clone();
        let op = match self.rel {
            Relation::Leq => "<=",
            Relation::Eq => "=",
        };
        if lhs.is_constant() {
            write!(f, "0 {op} {}", fmt_rational(&rhs))
        } else {
            write!(f, "{lhs} {op} {}", fmt_rational(&rhs))
        }
    }
}

/// Collects the variables of an atom sequence.
pub fn atom_vars<'a, I: IntoIterator<Item = &'a Atom>>(atoms: I) -> BTreeSet<VarId> {
    atoms
        .into_iter()
        .flat_map(|a| a.vars().cloned())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> VarId {
        VarId::input("x")
    }
    fn y() -> VarId {
        VarId::input("y")
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let mut e = LinearExpr::var(x());
        e.add_term(x(), rat(-1));
        assert!(e.is_constant());
        assert_eq!(e, LinearExpr::zero());
    }

    #[test]
    fn strict_comparison_is_shifted() {
        let a = Atom::lt(LinearExpr::var(x()), LinearExpr::constant(rat(10)));
        assert_eq!(a.rel, Relation::Leq);
        assert_eq!(a.expr.constant_term(), &rat(-9));
        assert_eq!(a.to_string(), "x <= 9");
    }

    #[test]
    fn integer_normalization_keeps_direction() {
        let e = LinearExpr::from_terms([(x(), frac(-1, 2)), (y(), frac(3, 4))], rat(0));
        let n = e.integer_normalized();
        assert_eq!(n.coeff(&x()), rat(-2));
        assert_eq!(n.coeff(&y()), rat(3));
        let neg = LinearExpr::term(x(), rat(-4)).integer_normalized();
        assert_eq!(neg.coeff(&x()), rat(-1));
    }

    #[test]
    fn ext_rational_order() {
        let a = ExtRational::NegInf;
        let b = ExtRational::Finite(rat(-1000));
        let c = ExtRational::PosInf;
        assert!(a < b && b < c && a < c);
    }

    #[test]
    fn rational_text_round_trip() {
        for q in [rat(0), rat(-7), frac(5, 2), frac(-1, 3)] {
            assert_eq!(parse_rational(&fmt_rational(&q)), Some(q));
        }
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn display_forms() {
        let e = LinearExpr::from_terms([(x(), rat(2)), (VarId::output("y"), rat(-1))], rat(3));
        assert_eq!(e.to_string(), "2*x - y' + 3");
    }
}
