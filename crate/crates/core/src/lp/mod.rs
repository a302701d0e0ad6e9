//! Exact linear and integer-linear optimization over conjunctions of atoms.

mod dual;
mod presolve;
pub mod simplex;

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::linear::{Atom, LinearExpr, Rational, VarId};
use presolve::{presolve, Presolved, Reduced};
use simplex::{solve, DenseLp, SimplexOutcome};

pub type Assignment = BTreeMap<VarId, Rational>;

/// Variable index, bound, and whether it is an upper bound.
type BranchBound = (usize, Rational, bool);

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Infeasible,
    /// A recession direction improving the objective.
    Unbounded(Assignment),
    Optimal { value: Rational, model: Assignment },
}

impl LpResult {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpResult::Infeasible)
    }
}

pub const DEFAULT_NODE_BUDGET: usize = 100_000;

#[derive(Debug, Clone)]
pub struct Solver {
    /// Integer mode: every variable ranges over the integers.
    pub integer: bool,
    pub node_budget: usize,
    /// Number of `maximize`/`is_satisfiable` calls.
    pub queries: usize,
    /// Number of simplex runs, branch-and-bound nodes included.
    pub lp_solves: usize,
}

impl Solver {
    pub fn new(integer: bool) -> Self {
        Solver {
            integer,
            node_budget: DEFAULT_NODE_BUDGET,
            queries: 0,
            lp_solves: 0,
        }
    }

    pub fn maximize(&mut self, objective: &LinearExpr, constraints: &[Atom]) -> Result<LpResult> {
        self.queries += 1;
        let integer_vars: BTreeSet<VarId> = if self.integer {
            let mut vs: BTreeSet<VarId> = objective.vars().cloned().collect();
            for a in constraints {
                vs.extend(a.vars().cloned());
            }
            vs
        } else {
            BTreeSet::new()
        };
        let reduced = match presolve(objective, constraints, &integer_vars) {
            Presolved::Infeasible => return Ok(LpResult::Infeasible),
            Presolved::Reduced(r) => r,
        };
        let problem = Dense::build(&reduced);
        let out = if self.integer {
            self.branch_and_bound(&problem)?
        } else {
            self.lp_solves += 1;
            problem.outcome(solve(&problem.lp))
        };
        Ok(match out {
            Outcome::Infeasible => LpResult::Infeasible,
            Outcome::Unbounded(ray) => LpResult::Unbounded(reduced.expand_direction(&ray)),
            Outcome::Optimal(value, point) => {
                let value = value + reduced.objective.constant_term();
                LpResult::Optimal {
                    value,
                    model: reduced.expand(&point),
                }
            }
        })
    }

    /// A satisfying assignment, if any.
    pub fn is_satisfiable(&mut self, constraints: &[Atom]) -> Result<Option<Assignment>> {
        match self.maximize(&LinearExpr::zero(), constraints)? {
            LpResult::Infeasible => Ok(None),
            LpResult::Optimal { model, .. } => Ok(Some(model)),
            LpResult::Unbounded(_) => Err(Error::Internal("zero objective reported unbounded".into())),
        }
    }

    fn branch_and_bound(&mut self, root: &Dense) -> Result<Outcome> {
        self.lp_solves += 1;
        let relaxed = solve(&root.lp);
        match root.outcome(relaxed.clone()) {
            Outcome::Infeasible => return Ok(Outcome::Infeasible),
            Outcome::Unbounded(ray) => {
                // With rational data a nonempty integer hull shares the
                // recession cone of the relaxation.
                let feasibility = root.with_objective(vec![Rational::zero(); root.vars.len()]);
                return Ok(match self.search(&feasibility, None)? {
                    Some(_) => Outcome::Unbounded(ray),
                    None => Outcome::Infeasible,
                });
            }
            Outcome::Optimal(..) => {}
        }
        Ok(match self.search(root, Some(relaxed))? {
            Some((v, p)) => Outcome::Optimal(v, p),
            None => Outcome::Infeasible,
        })
    }

    /// Depth-first branch and bound; the relaxation must be bounded.
    /// `relaxed` is the already solved root, if any.
    fn search(&mut self, root: &Dense, mut relaxed: Option<SimplexOutcome>) -> Result<Option<(Rational, Assignment)>> {
        // An objective with integer coefficients takes integer values, so a
        // node is only worth exploring if it can beat the incumbent by one.
        let integral = root.lp.objective.iter().all(|c| c.is_integer());
        let mut incumbent: Option<(Rational, Assignment)> = None;
        let beats = |bound: &Rational, incumbent: &Option<(Rational, Assignment)>| match incumbent {
            None => true,
            Some((best, _)) => (if integral { bound.floor() } else { bound.clone() }) > *best,
        };
        // Each node carries the relaxation value of its parent.
        let mut stack: Vec<(Vec<BranchBound>, Option<Rational>)> = vec![(Vec::new(), None)];
        let mut nodes = 0usize;
        while let Some((bounds, parent)) = stack.pop() {
            if parent.as_ref().is_some_and(|p| !beats(p, &incumbent)) {
                continue;
            }
            nodes += 1;
            if nodes > self.node_budget {
                return Err(Error::Budget(format!("branch and bound exceeded {} nodes", self.node_budget)));
            }
            let outcome = match relaxed.take() {
                Some(out) => out,
                None => {
                    self.lp_solves += 1;
                    solve(&root.with_bounds(&bounds))
                }
            };
            let (value, point) = match outcome {
                SimplexOutcome::Optimal { value, point } => (value, point),
                SimplexOutcome::Infeasible => continue,
                SimplexOutcome::Unbounded(_) => {
                    return Err(Error::Internal("bounded relaxation became unbounded".into()));
                }
            };
            if !beats(&value, &incumbent) {
                continue;
            }
            let branch = point
                .iter()
                .enumerate()
                .filter(|(_, q)| !q.is_integer())
                .max_by(|(i, a), (j, b)| a.denom().cmp(b.denom()).then(j.cmp(i)))
                .map(|(i, q)| (i, q.clone()));
            match branch {
                None => {
                    let model = root.assignment(&point);
                    incumbent = Some((value, model));
                }
                Some((i, q)) => {
                    if let Some((v, x)) = root.best_rounding(&point) {
                        if incumbent.as_ref().is_none_or(|(best, _)| v > *best) {
                            incumbent = Some((v, root.assignment(&x)));
                            if !beats(&value, &incumbent) {
                                continue;
                            }
                        }
                    }
                    let fl = q.floor();
                    let mut up = bounds.clone();
                    up.push((i, fl.clone() + Rational::from_integer(1.into()), false));
                    let mut down = bounds;
                    down.push((i, fl, true));
                    // Popped first: the floor branch.
                    stack.push((up, Some(value.clone())));
                    stack.push((down, Some(value)));
                }
            }
        }
        Ok(incumbent)
    }
}

enum Outcome {
    Infeasible,
    Unbounded(Assignment),
    Optimal(Rational, Assignment),
}

struct Dense {
    vars: Vec<VarId>,
    lp: DenseLp,
}

impl Dense {
    fn build(r: &Reduced) -> Dense {
        let mut vs: BTreeSet<VarId> = r.objective.vars().cloned().collect();
        for row in &r.rows {
            vs.extend(row.vars().cloned());
        }
        let vars: Vec<VarId> = vs.into_iter().collect();
        let index: BTreeMap<&VarId, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let dense_row = |e: &LinearExpr| {
            let mut row = vec![Rational::zero(); vars.len()];
            for (v, c) in e.terms() {
                row[index[v]] = c.clone();
            }
            row
        };
        let lp = DenseLp {
            num_vars: vars.len(),
            objective: dense_row(&r.objective),
            rows: r.rows.iter().map(&dense_row).collect(),
            rhs: r.rows.iter().map(|e| -e.constant_term().clone()).collect(),
        };
        Dense { vars, lp }
    }

    fn with_objective(&self, objective: Vec<Rational>) -> Dense {
        let mut lp = self.lp.clone();
        lp.objective = objective;
        Dense {
            vars: self.vars.clone(),
            lp,
        }
    }

    /// `(i, k, true)` is `x_i <= k`; `(i, k, false)` is `x_i >= k`.
    fn with_bounds(&self, bounds: &[BranchBound]) -> DenseLp {
        let mut lp = self.lp.clone();
        for (i, k, upper) in bounds {
            let mut row = vec![Rational::zero(); lp.num_vars];
            if *upper {
                row[*i] = Rational::from_integer(1.into());
                lp.rhs.push(k.clone());
            } else {
                row[*i] = Rational::from_integer((-1).into());
                lp.rhs.push(-k.clone());
            }
            lp.rows.push(row);
        }
        lp
    }

    /// The best of the floor, ceiling and nearest roundings of `point` that
    /// satisfies every row.
    fn best_rounding(&self, point: &[Rational]) -> Option<(Rational, Vec<Rational>)> {
        let half = Rational::new(1.into(), 2.into());
        let modes: [&dyn Fn(&Rational) -> Rational; 3] = [&|q| q.floor(), &|q| q.ceil(), &|q| (q + &half).floor()];
        let mut best: Option<(Rational, Vec<Rational>)> = None;
        for round in modes {
            let x: Vec<Rational> = point.iter().map(round).collect();
            let fits = self.lp.rows.iter().zip(&self.lp.rhs).all(|(row, b)| {
                let lhs: Rational = row.iter().zip(&x).filter(|(a, _)| !a.is_zero()).map(|(a, v)| a * v).sum();
                lhs <= *b
            });
            if !fits {
                continue;
            }
            let value: Rational = self.lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                best = Some((value, x));
            }
        }
        best
    }

    fn assignment(&self, point: &[Rational]) -> Assignment {
        self.vars.iter().cloned().zip(point.iter().cloned()).collect()
    }

    fn outcome(&self, out: SimplexOutcome) -> Outcome {
        match out {
            SimplexOutcome::Infeasible => Outcome::Infeasible,
            SimplexOutcome::Unbounded(ray) => Outcome::Unbounded(
                self.assignment(&ray)
                    .into_iter()
                    .filter(|(_, q)| !q.is_zero())
                    .collect(),
            ),
            SimplexOutcome::Optimal { value, point } => Outcome::Optimal(value, self.assignment(&point)),
        }
    }
}

/// Whether `x` satisfies every atom.
pub fn satisfies(x: &Assignment, atoms: &[Atom]) -> bool {
    atoms.iter().all(|a| {
        let v = a.expr.eval_partial(x);
        match a.rel {
            crate::linear::Relation::Leq => !v.is_positive(),
            crate::linear::Relation::Eq => v.is_zero(),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{frac, rat};

    fn x() -> VarId {
        VarId::input("x")
    }
    fn y() -> VarId {
        VarId::input("y")
    }
    fn ex(terms: &[(VarId, i64)], k: i64) -> LinearExpr {
        LinearExpr::from_terms(terms.iter().map(|(v, c)| (v.clone(), rat(*c))), rat(k))
    }

    #[test]
    fn rational_vs_integer_optimum() {
        // max x s.t. 2x <= 5
        let cons = [Atom::leq(ex(&[(x(), 2)], 0), LinearExpr::constant(rat(5)))];
        let obj = LinearExpr::var(x());
        match Solver::new(false).maximize(&obj, &cons).unwrap() {
            LpResult::Optimal { value, .. } => assert_eq!(value, frac(5, 2)),
            r => panic!("{r:?}"),
        }
        match Solver::new(true).maximize(&obj, &cons).unwrap() {
            LpResult::Optimal { value, .. } => assert_eq!(value, rat(2)),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn parity_equation_has_no_integer_solution() {
        // x = 2y + 1 and x = 2y
        let cons = [
            Atom::eq(LinearExpr::var(x()), ex(&[(y(), 2)], 1)),
            Atom::eq(LinearExpr::var(x()), ex(&[(y(), 2)], 0)),
        ];
        assert!(Solver::new(true).is_satisfiable(&cons).unwrap().is_none());
    }

    #[test]
    fn branch_and_bound_needs_branching() {
        // max y s.t. -x + y <= 1/2... scaled: 2y - 2x <= 1, 2y + 2x <= 5, y >= 0
        let cons = [
            Atom::leq(ex(&[(y(), 2), (x(), -2)], 0), LinearExpr::constant(rat(1))),
            Atom::leq(ex(&[(y(), 2), (x(), 2)], 0), LinearExpr::constant(rat(5))),
            Atom::geq(LinearExpr::var(y()), LinearExpr::zero()),
        ];
        let mut s = Solver::new(true);
        match s.maximize(&LinearExpr::var(y()), &cons).unwrap() {
            LpResult::Optimal { value, model } => {
                assert_eq!(value, rat(1));
                assert!(satisfies(&model, &cons));
                assert!(model.values().all(|q| q.is_integer()));
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn unbounded_with_ray() {
        let cons = [Atom::geq(LinearExpr::var(x()), LinearExpr::zero())];
        for integer in [false, true] {
            match Solver::new(integer).maximize(&LinearExpr::var(x()), &cons).unwrap() {
                LpResult::Unbounded(ray) => assert!(ray[&x()].is_positive()),
                r => panic!("{r:?}"),
            }
        }
    }

    #[test]
    fn unbounded_relaxation_without_integer_points() {
        // 0 < 3x - 3y < 3 has no integer solutions, but x is unbounded over Q.
        let cons = [
            Atom::geq(ex(&[(x(), 3), (y(), -3)], 0), LinearExpr::constant(rat(1))),
            Atom::leq(ex(&[(x(), 3), (y(), -3)], 0), LinearExpr::constant(rat(2))),
        ];
        assert_eq!(
            Solver::new(true).maximize(&LinearExpr::var(x()), &cons).unwrap(),
            LpResult::Infeasible
        );
    }

    #[test]
    fn equality_substitution_expands_model() {
        // x = y + 3, y <= 4: max x = 7
        let cons = [
            Atom::eq(LinearExpr::var(x()), ex(&[(y(), 1)], 3)),
            Atom::leq(LinearExpr::var(y()), LinearExpr::constant(rat(4))),
        ];
        match Solver::new(false).maximize(&LinearExpr::var(x()), &cons).unwrap() {
            LpResult::Optimal { value, model } => {
                assert_eq!(value, rat(7));
                assert_eq!(model[&x()], rat(7));
                assert_eq!(model[&y()], rat(4));
            }
            r => panic!("{r:?}"),
        }
    }
}
