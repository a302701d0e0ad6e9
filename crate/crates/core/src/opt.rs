//! Maximization of a linear objective over formulas with disjunctions, by
//! branching over marker assignments.

use std::collections::BTreeMap;

use num_traits::One;

use crate::error::{Error, Result};
use crate::formula::{annotate_markers, Formula, Model};
use crate::linear::{Atom, LinearExpr, Rational, VarId};
use crate::lp::{Assignment, LpResult, Solver};

#[derive(Debug, Clone, PartialEq)]
pub enum OptResult {
    Infeasible,
    Unbounded,
    Optimal { value: Rational, model: Model },
}

pub const DEFAULT_MAX_BRANCHES: usize = 10_000;

#[derive(Debug, Clone)]
pub struct Optimizer {
    pub solver: Solver,
    /// Require every later branch to beat the incumbent.
    pub redundant_lemma: bool,
    pub max_branches: usize,
    /// LP relaxations solved across all calls.
    pub branches: usize,
}

impl Optimizer {
    pub fn new(integer: bool) -> Self {
        Optimizer {
            solver: Solver::new(integer),
            redundant_lemma: true,
            max_branches: DEFAULT_MAX_BRANCHES,
            branches: 0,
        }
    }

    pub fn integer(&self) -> bool {
        self.solver.integer
    }

    /// Maximizes `objective` over `f && base`. Disjunctions without a marker
    /// are annotated first.
    pub fn maximize_formula(&mut self, objective: &LinearExpr, f: &Formula, base: &[Atom]) -> Result<OptResult> {
        let annotated;
        let f = if has_unmarked_or(f) {
            annotated = annotate_markers(f).0;
            &annotated
        } else {
            f
        };
        let all_markers = f.markers();
        let mut incumbent: Option<(Rational, Assignment, BTreeMap<VarId, bool>)> = None;
        let mut stack: Vec<BTreeMap<VarId, bool>> = vec![BTreeMap::new()];
        let mut local = 0usize;
        while let Some(choice) = stack.pop() {
            local += 1;
            if local > self.max_branches {
                return Err(Error::Budget(format!("more than {} marker branches", self.max_branches)));
            }
            self.branches += 1;
            let mut atoms = base.to_vec();
            let mut undecided = None;
            collect(f, &choice, &mut atoms, &mut undecided);
            if self.redundant_lemma {
                if let Some((best, _, _)) = &incumbent {
                    let mut target = best.clone();
                    if self.integer() {
                        target += Rational::one();
                    }
                    atoms.push(Atom::geq(objective.clone(), LinearExpr::constant(target)));
                }
            }
            match self.solver.maximize(objective, &atoms)? {
                LpResult::Infeasible => {}
                LpResult::Unbounded(_) => match undecided {
                    None => return Ok(OptResult::Unbounded),
                    Some(m) => push_children(&mut stack, &choice, m),
                },
                LpResult::Optimal { value, model } => {
                    if incumbent.as_ref().is_some_and(|(best, _, _)| value <= *best) {
                        continue;
                    }
                    match undecided {
                        None => incumbent = Some((value, model, choice)),
                        Some(m) => push_children(&mut stack, &choice, m),
                    }
                }
            }
        }
        Ok(match incumbent {
            None => OptResult::Infeasible,
            Some((value, numeric, mut boolean)) => {
                for m in all_markers {
                    boolean.entry(m).or_insert(true);
                }
                OptResult::Optimal {
                    value,
                    model: Model { numeric, boolean },
                }
            }
        })
    }

    /// Whether `f && base` admits a point with `objective > bound`.
    pub fn check_exceeds(&mut self, f: &Formula, base: &[Atom], objective: &LinearExpr, bound: &Rational) -> Result<bool> {
        if self.integer() {
            let mut atoms = base.to_vec();
            atoms.push(Atom::geq(objective.clone(), LinearExpr::constant(bound + Rational::one())));
            return Ok(self.satisfiable(f, &atoms)?.is_some());
        }
        Ok(match self.maximize_formula(objective, f, base)? {
            OptResult::Infeasible => false,
            OptResult::Unbounded => true,
            OptResult::Optimal { value, .. } => value > *bound,
        })
    }

    pub fn satisfiable(&mut self, f: &Formula, base: &[Atom]) -> Result<Option<Model>> {
        match self.maximize_formula(&LinearExpr::zero(), f, base)? {
            OptResult::Optimal { model, .. } => Ok(Some(model)),
            OptResult::Infeasible => Ok(None),
            OptResult::Unbounded => Err(Error::Internal("zero objective reported unbounded".into())),
        }
    }
}

fn has_unmarked_or(f: &Formula) -> bool {
    match f {
        Formula::Or(_, _, None) => true,
        Formula::Or(l, r, Some(_)) => has_unmarked_or(l) || has_unmarked_or(r),
        Formula::And(parts) => parts.iter().any(has_unmarked_or),
        _ => false,
    }
}

/// Atoms forced under a partial marker assignment; undecided disjunctions
/// are dropped and the first one in preorder is reported.
fn collect(f: &Formula, choice: &BTreeMap<VarId, bool>, atoms: &mut Vec<Atom>, undecided: &mut Option<VarId>) {
    match f {
        Formula::True => {}
        Formula::False => atoms.push(Atom::leq(LinearExpr::constant(Rational::one()), LinearExpr::zero())),
        Formula::Leaf(a) => atoms.push(a.clone()),
        Formula::And(parts) => parts.iter().for_each(|p| collect(p, choice, atoms, undecided)),
        Formula::Or(l, r, m) => {
            let m = m.as_ref().expect("annotated formula");
            match choice.get(m) {
                Some(true) => collect(l, choice, atoms, undecided),
                Some(false) => collect(r, choice, atoms, undecided),
                None => {
                    if undecided.is_none() {
                        *undecided = Some(m.clone());
                    }
                }
            }
        }
    }
}

fn push_children(stack: &mut Vec<BTreeMap<VarId, bool>>, choice: &BTreeMap<VarId, bool>, m: VarId) {
    let mut f = choice.clone();
    f.insert(m.clone(), false);
    let mut t = choice.clone();
    t.insert(m, true);
    stack.push(f);
    stack.push(t);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::substitute_markers;
    use crate::linear::rat;

    fn x() -> LinearExpr {
        LinearExpr::var(VarId::input("x"))
    }
    fn xp() -> LinearExpr {
        LinearExpr::var(VarId::output("x"))
    }
    fn c(k: i64) -> LinearExpr {
        LinearExpr::constant(rat(k))
    }

    fn example_two() -> Formula {
        let then = Formula::from_atoms([Atom::leq(x(), c(10)), Atom::eq(xp(), x() + c(1))]);
        let els = Formula::from_atoms([Atom::gt(x(), c(10)), Atom::eq(xp(), c(0))]);
        annotate_markers(&Formula::or(then, els)).0
    }

    #[test]
    fn if_then_else_abstraction_picks_then_branch() {
        let f = example_two();
        let mut opt = Optimizer::new(true);
        let base = [Atom::leq(x(), c(100))];
        match opt.maximize_formula(&xp(), &f, &base).unwrap() {
            OptResult::Optimal { value, model } => {
                assert_eq!(value, rat(11));
                assert!(model.boolean[&VarId::marker(1)]);
                assert_eq!(model.numeric[&VarId::input("x")], rat(10));
                assert_eq!(model.numeric[&VarId::output("x")], rat(11));
                let policy = substitute_markers(&f, &model.boolean).unwrap();
                assert_eq!(policy.to_string(), "x <= 10 && -x + x' = 1");
            }
            r => panic!("{r:?}"),
        }
        assert!(!opt.check_exceeds(&f, &base, &xp(), &rat(11)).unwrap());
        assert!(opt.check_exceeds(&f, &base, &xp(), &rat(10)).unwrap());
    }

    #[test]
    fn contradiction_is_infeasible() {
        let f = Formula::from_atoms([Atom::leq(x(), c(-1)), Atom::geq(x(), c(1))]);
        let mut opt = Optimizer::new(true);
        assert_eq!(opt.maximize_formula(&x(), &f, &[]).unwrap(), OptResult::Infeasible);
        assert!(!opt.check_exceeds(&f, &[], &x(), &rat(-100)).unwrap());
    }

    #[test]
    fn frame_equality_is_unbounded() {
        let f = Formula::atom(Atom::eq(xp(), x()));
        assert_eq!(Optimizer::new(false).maximize_formula(&xp(), &f, &[]).unwrap(), OptResult::Unbounded);
    }

    #[test]
    fn lemma_does_not_change_value() {
        let f = example_two();
        let base = [Atom::leq(x(), c(100)), Atom::geq(x(), c(-50))];
        let mut on = Optimizer::new(true);
        let mut off = Optimizer::new(true);
        off.redundant_lemma = false;
        let a = on.maximize_formula(&(-xp()), &f, &base).unwrap();
        let b = off.maximize_formula(&(-xp()), &f, &base).unwrap();
        match (a, b) {
            (OptResult::Optimal { value: va, .. }, OptResult::Optimal { value: vb, .. }) => {
                assert_eq!(va, vb);
                assert_eq!(va, rat(49));
            }
            r => panic!("{r:?}"),
        }
    }
}
