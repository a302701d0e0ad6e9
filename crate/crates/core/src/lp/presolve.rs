//! Equality elimination and row deduplication ahead of the simplex.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::linear::{Atom, LinearExpr, Rational, Relation, VarId};

pub(crate) enum Presolved {
    Infeasible,
    Reduced(Reduced),
}

pub(crate) struct Reduced {
    /// Remaining `expr <= 0` rows.
    pub rows: Vec<LinearExpr>,
    pub objective: LinearExpr,
    /// Eliminated variables in elimination order; evaluate in reverse.
    pub substitutions: Vec<(VarId, LinearExpr)>,
    pub all_vars: BTreeSet<VarId>,
}

fn is_integral(q: &Rational) -> bool {
    q.is_integer()
}

/// Integer rows whose coefficient gcd does not divide the constant have no
/// integer solution.
fn gcd_infeasible(e: &LinearExpr, integer_vars: &BTreeSet<VarId>) -> bool {
    if !e.vars().all(|v| integer_vars.contains(v)) {
        return false;
    }
    let n = e.integer_normalized();
    if !n.terms().all(|(_, c)| is_integral(c)) {
        return false;
    }
    let mut g = BigInt::zero();
    for (_, c) in n.terms() {
        g = g.gcd(&c.to_integer());
    }
    if g.is_zero() {
        return false;
    }
    let k = n.constant_term();
    !(k.is_integer() && (k.to_integer() % &g).is_zero())
}

fn choose_pivot(e: &LinearExpr, integer_vars: &BTreeSet<VarId>) -> Option<VarId> {
    // Rational variables can always be eliminated.
    if let Some(v) = e.vars().find(|v| !integer_vars.contains(*v)) {
        return Some(v.clone());
    }
    // An integer variable with a unit coefficient whose defining expression
    // stays integral.
    'outer: for (v, c) in e.terms() {
        if !c.abs().is_one() {
            continue;
        }
        if !is_integral(e.constant_term()) {
            continue;
        }
        for (w, d) in e.terms() {
            if w != v && (!is_integral(d) || !integer_vars.contains(w)) {
                continue 'outer;
            }
        }
        return Some(v.clone());
    }
    None
}

pub(crate) fn presolve(objective: &LinearExpr, atoms: &[Atom], integer_vars: &BTreeSet<VarId>) -> Presolved {
    let mut all_vars: BTreeSet<VarId> = objective.vars().cloned().collect();
    let mut eqs = Vec::new();
    let mut rows = Vec::new();
    for a in atoms {
        all_vars.extend(a.vars().cloned());
        match a.rel {
            Relation::Eq => eqs.push(a.expr.clone()),
            Relation::Leq => rows.push(a.expr.clone()),
        }
    }
    let mut objective = objective.clone();
    let mut substitutions: Vec<(VarId, LinearExpr)> = Vec::new();

    let mut k = 0;
    while k < eqs.len() {
        let e = eqs[k].clone();
        k += 1;
        if e.is_constant() {
            if !e.constant_term().is_zero() {
                return Presolved::Infeasible;
            }
            continue;
        }
        if gcd_infeasible(&e, integer_vars) {
            return Presolved::Infeasible;
        }
        match choose_pivot(&e, integer_vars) {
            Some(v) => {
                let c = e.coeff(&v);
                let mut rest = e.clone();
                rest.add_term(v.clone(), -c.clone());
                let def = rest.scale(&(-c.recip()));
                for other in eqs[k..].iter_mut().chain(rows.iter_mut()) {
                    if other.coeffs().contains_key(&v) {
                        *other = other.substitute(&v, &def);
                    }
                }
                objective = objective.substitute(&v, &def);
                substitutions.push((v, def));
            }
            None => {
                rows.push(e.clone());
                rows.push(-e);
            }
        }
    }

    // Constant rows are checked; parallel rows keep the tightest constant.
    let mut tightest: BTreeMap<LinearExpr, Rational> = BTreeMap::new();
    for r in rows {
        if r.is_constant() {
            if r.constant_term().is_positive() {
                return Presolved::Infeasible;
            }
            continue;
        }
        let r = tighten_integer_row(r, integer_vars);
        let lin = r.linear_part();
        let c = r.constant_term().clone();
        tightest
            .entry(lin)
            .and_modify(|k| {
                if c > *k {
                    *k = c.clone()
                }
            })
            .or_insert(c);
    }
    let rows = tightest
        .into_iter()
        .map(|(mut lin, c)| {
            lin.add_constant(&c);
            lin
        })
        .collect();

    Presolved::Reduced(Reduced {
        rows,
        objective,
        substitutions,
        all_vars,
    })
}

/// Over integer variables, `g*L + c <= 0` with integral `L` is equivalent to
/// `L + ceil(c/g) <= 0`.
fn tighten_integer_row(r: LinearExpr, integer_vars: &BTreeSet<VarId>) -> LinearExpr {
    if !r.vars().all(|v| integer_vars.contains(v)) {
        return r;
    }
    let n = r.integer_normalized();
    let mut g = BigInt::zero();
    for (_, c) in n.terms() {
        g = g.gcd(&c.to_integer());
    }
    if g.is_zero() {
        return r;
    }
    let g = Rational::from_integer(g);
    let mut out = n.linear_part().scale(&g.recip());
    out.add_constant(&(n.constant_term() / &g).ceil());
    out
}

impl Reduced {
    /// Expands a point over the reduced variables to every variable.
    pub fn expand(&self, reduced: &BTreeMap<VarId, Rational>) -> BTreeMap<VarId, Rational> {
        let mut values = reduced.clone();
        for (v, def) in self.substitutions.iter().rev() {
            let x = def.eval_partial(&values);
            values.insert(v.clone(), x);
        }
        for v in &self.all_vars {
            values.entry(v.clone()).or_insert_with(Rational::zero);
        }
        values
    }

    /// Expands a direction: like `expand` but ignoring constants.
    pub fn expand_direction(&self, reduced: &BTreeMap<VarId, Rational>) -> BTreeMap<VarId, Rational> {
        let mut values = reduced.clone();
        for (v, def) in self.substitutions.iter().rev() {
            let x = def.linear_part().eval_partial(&values);
            values.insert(v.clone(), x);
        }
        values.retain(|_, q| !q.is_zero());
        values
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::rat;

    #[test]
    fn integer_rows_are_rounded() {
        let x = VarId::input("x");
        let ints: BTreeSet<VarId> = [x.clone()].into();
        // 2x - 5 <= 0  ~>  x - 2 <= 0
        let r = tighten_integer_row(LinearExpr::from_terms([(x.clone(), rat(2))], rat(-5)), &ints);
        assert_eq!(r, LinearExpr::from_terms([(x, rat(1))], rat(-2)));
    }

    #[test]
    fn parity_gcd_test() {
        let x = VarId::input("x");
        let ints: BTreeSet<VarId> = [x.clone()].into();
        // 2x - 1 = 0
        let e = LinearExpr::from_terms([(x, rat(2))], rat(-1));
        assert!(gcd_infeasible(&e, &ints));
        assert!(!gcd_infeasible(&e, &BTreeSet::new()));
    }
}
