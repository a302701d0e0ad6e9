//! Simplex on the dual `min b.y, A^T y = c, y >= 0` of `max c.x, A x <= b`.
//! Its tableau has one row per primal variable, which pays off when there are
//! many more constraints than variables. Every answer is checked against an
//! exact certificate; `None` means a check failed.

use num_traits::{One, Signed, Zero};

use super::simplex::{SimplexOutcome, Tableau, DEGENERATE_RUN};
use super::DenseLp;
use crate::linear::Rational;

enum DualOutcome {
    /// Primal optimum and the dual solution proving it.
    Optimal(Vec<Rational>, Vec<Rational>),
    /// `A r <= 0` and `c.r > 0`: the primal is unbounded if feasible.
    NoDual(Vec<Rational>),
    /// `y >= 0`, `A^T y = 0`, `b.y < 0`: the primal is infeasible.
    Farkas(Vec<Rational>),
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).filter(|(x, y)| !x.is_zero() && !y.is_zero()).map(|(x, y)| x * y).sum()
}

fn row_products(lp: &DenseLp, x: &[Rational]) -> Vec<Rational> {
    lp.rows.iter().map(|r| dot(r, x)).collect()
}

/// `A^T y`
fn transposed(lp: &DenseLp, y: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); lp.num_vars];
    for (row, yi) in lp.rows.iter().zip(y) {
        if yi.is_zero() {
            continue;
        }
        for (o, a) in out.iter_mut().zip(row) {
            if !a.is_zero() {
                *o += a * yi;
            }
        }
    }
    out
}

fn feasible(lp: &DenseLp, x: &[Rational]) -> bool {
    row_products(lp, x).iter().zip(&lp.rhs).all(|(ax, b)| ax <= b)
}

fn is_farkas(lp: &DenseLp, y: &[Rational]) -> bool {
    y.iter().all(|v| !v.is_negative()) && transposed(lp, y).iter().all(Zero::is_zero) && dot(&lp.rhs, y).is_negative()
}

/// Entering column among `0..allowed`, or the unbounded column. Past phase
/// one, basic artificials from `artificial_from` on are at zero.
fn optimize(t: &mut Tableau, allowed: usize, artificial_from: Option<usize>) -> Result<(), usize> {
    let mut degenerate = 0usize;
    loop {
        let bland = degenerate > DEGENERATE_RUN;
        let entering = if bland {
            (0..allowed).find(|&j| t.obj[j].is_negative())
        } else {
            (0..allowed)
                .filter(|&j| t.obj[j].is_negative())
                .min_by(|&a, &b| t.obj[a].cmp(&t.obj[b]).then(a.cmp(&b)))
        };
        let Some(c) = entering else {
            return Ok(());
        };
        // An artificial left in the basis sits at zero; pivot it out before
        // it can move.
        let stuck = artificial_from.and_then(|a| (0..t.rows.len()).find(|&i| t.basis[i] >= a && !t.rows[i][c].is_zero()));
        let leaving = stuck.or_else(|| {
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in t.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[t.cols] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && t.basis[i] < t.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            best.map(|(i, _)| i)
        });
        let Some(r) = leaving else {
            return Err(c);
        };
        if t.rows[r][t.cols].is_zero() {
            degenerate += 1;
        } else if !bland {
            degenerate = 0;
        }
        t.pivot(r, c);
    }
}

fn run(lp: &DenseLp, c: &[Rational]) -> DualOutcome {
    let n = lp.num_vars;
    let m = lp.rows.len();
    let cols = m + n;
    let signs: Vec<Rational> = c.iter().map(|v| if v.is_negative() { -Rational::one() } else { Rational::one() }).collect();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![Rational::zero(); cols + 1];
        for (slot, lp_row) in row.iter_mut().zip(&lp.rows) {
            let a = &lp_row[i];
            if !a.is_zero() {
                *slot = a * &signs[i];
            }
        }
        row[m + i] = Rational::one();
        row[cols] = &c[i] * &signs[i];
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        obj: vec![Rational::zero(); cols + 1],
        basis: (m..cols).collect(),
        cols,
    };

    // Phase 1: minimize the sum of the artificials.
    for j in m..cols {
        t.obj[j] = Rational::one();
    }
    for i in 0..n {
        let row = t.rows[i].clone();
        for (o, v) in t.obj.iter_mut().zip(&row) {
            if !v.is_zero() {
                *o -= v;
            }
        }
    }
    if optimize(&mut t, m, None).is_err() {
        unreachable!("phase one is bounded");
    }
    if t.obj[cols].is_negative() {
        let pi: Vec<Rational> = (0..n).map(|i| (Rational::one() - &t.obj[m + i]) * &signs[i]).collect();
        return DualOutcome::NoDual(pi);
    }

    // Phase 2: minimize b.y.
    t.obj = vec![Rational::zero(); cols + 1];
    t.obj[..m].clone_from_slice(&lp.rhs);
    for i in 0..n {
        let b = t.basis[i];
        let cb = t.obj[b].clone();
        if !cb.is_zero() {
            let row = t.rows[i].clone();
            for (o, v) in t.obj.iter_mut().zip(&row) {
                if !v.is_zero() {
                    *o -= &cb * v;
                }
            }
        }
    }
    match optimize(&mut t, m, Some(m)) {
        Ok(()) => {
            let x = (0..n).map(|i| -&t.obj[m + i] * &signs[i]).collect();
            let mut y = vec![Rational::zero(); m];
            for (i, b) in t.basis.iter().enumerate() {
                if *b < m {
                    y[*b] = t.rows[i][cols].clone();
                }
            }
            DualOutcome::Optimal(x, y)
        }
        Err(e) => {
            let mut y = vec![Rational::zero(); m];
            y[e] = Rational::one();
            for (i, b) in t.basis.iter().enumerate() {
                if *b < m && !t.rows[i][e].is_zero() {
                    y[*b] = -t.rows[i][e].clone();
                }
            }
            DualOutcome::Farkas(y)
        }
    }
}

pub fn solve(lp: &DenseLp) -> Option<SimplexOutcome> {
    match run(lp, &lp.objective) {
        DualOutcome::Optimal(x, y) => {
            let value = dot(&lp.objective, &x);
            let certified = feasible(lp, &x)
                && y.iter().all(|v| !v.is_negative())
                && transposed(lp, &y) == lp.objective
                && dot(&lp.rhs, &y) == value;
            certified.then_some(SimplexOutcome::Optimal { value, point: x })
        }
        DualOutcome::Farkas(y) => is_farkas(lp, &y).then_some(SimplexOutcome::Infeasible),
        DualOutcome::NoDual(r) => {
            let ray_ok = row_products(lp, &r).iter().all(|v| !v.is_positive()) && dot(&lp.objective, &r).is_positive();
            if !ray_ok {
                return None;
            }
            match run(lp, &vec![Rational::zero(); lp.num_vars]) {
                DualOutcome::Optimal(x, _) => feasible(lp, &x).then_some(SimplexOutcome::Unbounded(r)),
                DualOutcome::Farkas(y) => is_farkas(lp, &y).then_some(SimplexOutcome::Infeasible),
                DualOutcome::NoDual(_) => None,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::rat;
    use proptest::prelude::*;

    fn lp(n: usize, obj: &[i64], rows: &[(Vec<i64>, i64)]) -> DenseLp {
        DenseLp {
            num_vars: n,
            objective: obj.iter().map(|v| rat(*v)).collect(),
            rows: rows.iter().map(|(r, _)| r.iter().map(|v| rat(*v)).collect()).collect(),
            rhs: rows.iter().map(|(_, b)| rat(*b)).collect(),
        }
    }

    #[test]
    fn box_with_redundant_rows() {
        let rows: Vec<(Vec<i64>, i64)> = vec![
            (vec![1, 0], 4),
            (vec![0, 1], 3),
            (vec![-1, 0], 0),
            (vec![0, -1], 0),
            (vec![1, 1], 10),
            (vec![1, 1], 6),
        ];
        match solve(&lp(2, &[1, 1], &rows)).unwrap() {
            SimplexOutcome::Optimal { value, .. } => assert_eq!(value, rat(6)),
            other => panic!("{other:?}"),
        }
        assert_eq!(solve(&lp(2, &[0, 0], &rows)).map(|o| matches!(o, SimplexOutcome::Optimal { .. })), Some(true));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let rows = vec![(vec![1], 1), (vec![-1], -2), (vec![1], 5)];
        assert_eq!(solve(&lp(1, &[1], &rows)), Some(SimplexOutcome::Infeasible));
        let rows = vec![(vec![-1], 0), (vec![-1], 3), (vec![-2], 1)];
        assert!(matches!(solve(&lp(1, &[1], &rows)), Some(SimplexOutcome::Unbounded(_))));
    }

    fn small_lp() -> impl Strategy<Value = DenseLp> {
        (1usize..4).prop_flat_map(|n| {
            let row = (prop::collection::vec(-3i64..4, n), -4i64..8);
            (Just(n), prop::collection::vec(-3i64..4, n), prop::collection::vec(row, 2 * n + 1..4 * n + 4))
                .prop_map(|(n, obj, rows)| lp(n, &obj, &rows))
        })
    }

    fn kind(o: &SimplexOutcome) -> (u8, Option<Rational>) {
        match o {
            SimplexOutcome::Infeasible => (0, None),
            SimplexOutcome::Unbounded(_) => (1, None),
            SimplexOutcome::Optimal { value, .. } => (2, Some(value.clone())),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn agrees_with_primal(p in small_lp()) {
            let d = solve(&p);
            prop_assert!(d.is_some(), "certificate failed");
            let primal = super::super::simplex::solve_primal(&p);
            prop_assert_eq!(kind(&d.unwrap()), kind(&primal));
        }
    }
}
