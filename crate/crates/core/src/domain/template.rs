use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::linear::{parse_rational, LinearExpr, Rational, Role, VarId};

/// A linear form `t` over program variables whose upper bound is tracked.
///
/// Stored scaled to integer coefficients with gcd one; the sign is kept, so
/// `x` and `-x` stay distinct.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Template(LinearExpr);

impl Template {
    pub fn new(e: &LinearExpr) -> Result<Template> {
        let lin = e.linear_part();
        if lin.is_constant() {
            return Err(Error::InvalidTemplate(e.to_string()));
        }
        Ok(Template(lin.integer_normalized()))
    }

    pub fn var(v: &VarId) -> Template {
        Template(LinearExpr::var(v.clone()))
    }

    pub fn neg_var(v: &VarId) -> Template {
        Template(-LinearExpr::var(v.clone()))
    }

    pub fn from_terms(terms: &[(&VarId, i64)]) -> Result<Template> {
        let e = LinearExpr::from_terms(
            terms.iter().map(|(v, c)| ((*v).clone(), Rational::from_integer((*c).into()))),
            Rational::from_integer(0.into()),
        );
        Template::new(&e)
    }

    /// `t . X`
    pub fn expr(&self) -> &LinearExpr {
        &self.0
    }

    /// `t . X'`
    pub fn output(&self) -> LinearExpr {
        self.0.rename(|v| v.with_role(Role::Output))
    }

    pub fn negated(&self) -> Template {
        Template(-self.0.clone())
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.0.vars().cloned().collect()
    }

    /// Parses forms like `x`, `-x`, `x - 2*y`, `x+y+z`.
    pub fn parse(s: &str) -> Result<Template> {
        let bad = || Error::InvalidTemplate(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        let mut e = LinearExpr::zero();
        let mut rest = compact.as_str();
        while !rest.is_empty() {
            let (sign, body) = match rest.as_bytes()[0] {
                b'+' => (1, &rest[1..]),
                b'-' => (-1, &rest[1..]),
                _ => (1, rest),
            };
            let end = body.find(['+', '-']).unwrap_or(body.len());
            let term = &body[..end];
            rest = &body[end..];
            let (coeff, name) = match term.split_once('*') {
                Some((k, v)) => (parse_rational(k).ok_or_else(bad)?, v),
                None => (Rational::from_integer(1.into()), term),
            };
            let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(bad());
            }
            e.add_term(VarId::input(name), coeff * Rational::from_integer(sign.into()));
        }
        Template::new(&e)
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
