//! Dense two-phase primal simplex on exact rationals.
//!
//! Solves `max c.x` subject to `A x <= b` with every `x` free in sign.

use num_traits::{One, Signed, Zero};

use crate::linear::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum SimplexOutcome {
    Infeasible,
    /// Direction (in original variables) along which the objective grows
    /// without bound.
    Unbounded(Vec<Rational>),
    Optimal { value: Rational, point: Vec<Rational> },
}

/// `rows[i] . x <= rhs[i]`.
#[derive(Debug, Clone, Default)]
pub struct DenseLp {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub rows: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
}

/// Consecutive degenerate pivots tolerated before Bland's rule takes over.
pub(super) const DEGENERATE_RUN: usize = 50;

pub(super) struct Tableau {
    /// `m` rows of `cols + 1` entries; the last entry is the right-hand side.
    pub(super) rows: Vec<Vec<Rational>>,
    /// Reduced costs `z_j - c_j` plus the objective value in the last slot.
    pub(super) obj: Vec<Rational>,
    pub(super) basis: Vec<usize>,
    pub(super) cols: usize,
}

impl Tableau {
    pub(super) fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            let inv = p.recip();
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            if f.is_zero() {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        let f = self.obj[c].clone();
        if !f.is_zero() {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Dantzig pricing, switching for good to Bland's rule after a run of
    /// degenerate pivots. Returns the unbounded column, if any.
    fn optimize(&mut self, allowed: usize) -> Result<(), usize> {
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate > DEGENERATE_RUN;
            let entering = if bland {
                (0..allowed).find(|&j| self.obj[j].is_negative())
            } else {
                (0..allowed)
                    .filter(|&j| self.obj[j].is_negative())
                    .min_by(|&a, &b| self.obj[a].cmp(&self.obj[b]).then(a.cmp(&b)))
            };
            let Some(c) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[self.cols] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((r, ratio)) => {
                    if ratio.is_zero() {
                        degenerate += 1;
                    } else if !bland {
                        degenerate = 0;
                    }
                    self.pivot(r, c)
                }
                None => return Err(c),
            }
        }
    }

    fn column_value(&self, j: usize) -> Rational {
        self.basis
            .iter()
            .position(|&b| b == j)
            .map(|i| self.rows[i][self.cols].clone())
            .unwrap_or_else(Rational::zero)
    }
}

pub fn solve(lp: &DenseLp) -> SimplexOutcome {
    if lp.num_vars > 0 && lp.rows.len() > 2 * lp.num_vars {
        match super::dual::solve(lp) {
            Some(out) => return out,
            None => log::warn!("dual simplex certificate failed; falling back to the primal"),
        }
    }
    solve_primal(lp)
}

pub(super) fn solve_primal(lp: &DenseLp) -> SimplexOutcome {
    let n = lp.num_vars;
    let m = lp.rows.len();
    // Columns: x+ (n), x- (n), slacks (m), artificials (as needed).
    let structural = 2 * n;
    let slack0 = structural;
    let neg_rows: Vec<usize> = (0..m).filter(|&i| lp.rhs[i].is_negative()).collect();
    let art0 = slack0 + m;
    let cols = art0 + neg_rows.len();

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art_index = 0;
    for i in 0..m {
        let mut row = vec![Rational::zero(); cols + 1];
        let flip = lp.rhs[i].is_negative();
        let sign = if flip { -Rational::one() } else { Rational::one() };
        for j in 0..n {
            let a = &lp.rows[i][j];
            if !a.is_zero() {
                row[j] = a * &sign;
                row[n + j] = -(a * &sign);
            }
        }
        row[slack0 + i] = sign.clone();
        row[cols] = &lp.rhs[i] * &sign;
        if flip {
            row[art0 + art_index] = Rational::one();
            basis.push(art0 + art_index);
            art_index += 1;
        } else {
            basis.push(slack0 + i);
        }
        rows.push(row);
    }

    let mut t = Tableau {
        rows,
        obj: vec![Rational::zero(); cols + 1],
        basis,
        cols,
    };

    if !neg_rows.is_empty() {
        // Phase 1: maximize -sum(artificials).
        for j in art0..cols {
            t.obj[j] = Rational::one();
        }
        for i in 0..m {
            if t.basis[i] >= art0 {
                let row = t.rows[i].clone();
                for (o, v) in t.obj.iter_mut().zip(&row) {
                    if !v.is_zero() {
                        *o -= v;
                    }
                }
            }
        }
        if t.optimize(cols).is_err() {
            unreachable!("phase one is bounded");
        }
        if t.obj[cols].is_negative() {
            return SimplexOutcome::Infeasible;
        }
        // Drive remaining artificials out of the basis.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art0 {
                match (0..art0).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => {
                        t.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    // Phase 2 on the non-artificial columns.
    t.obj = vec![Rational::zero(); cols + 1];
    for j in 0..n {
        let c = &lp.objective[j];
        if !c.is_zero() {
            t.obj[j] = -c.clone();
            t.obj[n + j] = c.clone();
        }
    }
    for i in 0..t.rows.len() {
        let b = t.basis[i];
        let cb = -t.obj[b].clone();
        if !cb.is_zero() {
            let row = t.rows[i].clone();
            for (o, v) in t.obj.iter_mut().zip(&row) {
                if !v.is_zero() {
                    *o += &cb * v;
                }
            }
        }
    }
    for row in t.rows.iter_mut() {
        for v in row[art0..cols].iter_mut() {
            *v = Rational::zero();
        }
    }

    match t.optimize(art0) {
        Ok(()) => {
            let point: Vec<Rational> = (0..n).map(|j| t.column_value(j) - t.column_value(n + j)).collect();
            SimplexOutcome::Optimal {
                value: t.obj[cols].clone(),
                point,
            }
        }
        Err(c) => {
            // Entering column grows by one; basic variables move by -column.
            let mut dir_cols = vec![Rational::zero(); art0];
            dir_cols[c] = Rational::one();
            for (i, row) in t.rows.iter().enumerate() {
                let b = t.basis[i];
                if b < art0 && !row[c].is_zero() {
                    dir_cols[b] = -row[c].clone();
                }
            }
            let ray = (0..n).map(|j| &dir_cols[j] - &dir_cols[n + j]).collect();
            SimplexOutcome::Unbounded(ray)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{frac, rat};

    fn lp(obj: &[i64], rows: &[(&[i64], i64)]) -> DenseLp {
        DenseLp {
            num_vars: obj.len(),
            objective: obj.iter().map(|&c| rat(c)).collect(),
            rows: rows.iter().map(|(r, _)| r.iter().map(|&c| rat(c)).collect()).collect(),
            rhs: rows.iter().map(|(_, b)| rat(*b)).collect(),
        }
    }

    #[test]
    fn bounded_max() {
        let out = solve(&lp(&[1], &[(&[1], 10)]));
        assert_eq!(
            out,
            SimplexOutcome::Optimal {
                value: rat(10),
                point: vec![rat(10)]
            }
        );
    }

    #[test]
    fn infeasible_box() {
        assert_eq!(solve(&lp(&[1], &[(&[1], 10), (&[-1], -11)])), SimplexOutcome::Infeasible);
    }

    #[test]
    fn unbounded_free_var() {
        match solve(&lp(&[1], &[])) {
            SimplexOutcome::Unbounded(ray) => assert!(ray[0] > rat(0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fractional_vertex() {
        match solve(&lp(&[1], &[(&[2], 5)])) {
            SimplexOutcome::Optimal { value, .. } => assert_eq!(value, frac(5, 2)),
            other => panic!("{other:?}"),
        }
    }

    // Beale's classic cycling example; Bland's rule must terminate.
    #[test]
    fn degenerate_cycling_instance_terminates() {
        let q = |n, d| frac(n, d);
        let lp = DenseLp {
            num_vars: 4,
            objective: vec![q(3, 4), rat(-150), q(1, 50), rat(-6)],
            rows: vec![
                vec![q(1, 4), rat(-60), q(-1, 25), rat(9)],
                vec![q(1, 2), rat(-90), q(-1, 50), rat(3)],
                vec![rat(0), rat(0), rat(1), rat(0)],
                vec![rat(-1), rat(0), rat(0), rat(0)],
                vec![rat(0), rat(-1), rat(0), rat(0)],
                vec![rat(0), rat(0), rat(-1), rat(0)],
                vec![rat(0), rat(0), rat(0), rat(-1)],
            ],
            rhs: vec![rat(0), rat(0), rat(1), rat(0), rat(0), rat(0), rat(0)],
        };
        match solve(&lp) {
            SimplexOutcome::Optimal { value, .. } => assert_eq!(value, q(1, 20)),
            other => panic!("{other:?}"),
        }
    }
}
