use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::cfa::{Cfa, NodeId, Op};
use crate::congruence::Parity;
use crate::engine::AnalysisResult;
use crate::formula::{evaluate, Model};
use crate::linear::{Rational, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub nondet_min: i64,
    pub nondet_max: i64,
    pub max_states: usize,
    pub max_steps: usize,
    /// States holding a value wider than this are dropped.
    pub max_bits: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            nondet_min: -4,
            nondet_max: 4,
            max_states: 100_000,
            max_steps: 100_000,
            max_bits: 64,
        }
    }
}

/// Concrete states reached per node; values are in the order of `vars`.
#[derive(Debug, Clone)]
pub struct ConcreteRun {
    pub vars: Vec<VarId>,
    pub reachable: BTreeMap<NodeId, BTreeSet<Vec<BigInt>>>,
    pub truncated: bool,
    pub limits: Limits,
}

impl ConcreteRun {
    pub fn model(&self, values: &[BigInt]) -> Model {
        let mut m = Model::new();
        for (v, x) in self.vars.iter().zip(values) {
            m.numeric.insert(v.clone(), Rational::from_integer(x.clone()));
        }
        m
    }

    pub fn states(&self, n: NodeId) -> impl Iterator<Item = &Vec<BigInt>> {
        self.reachable.get(&n).into_iter().flatten()
    }

    pub fn value(&self, state: &[BigInt], name: &str) -> Option<BigInt> {
        self.vars.iter().position(|v| &*v.name == name).map(|i| state[i].clone())
    }
}

/// Breadth-first exploration from the all-zero state at the entry, with
/// every nondeterministic value drawn from the configured range.
pub fn interpret(cfa: &Cfa, limits: Limits) -> ConcreteRun {
    let mut run = ConcreteRun {
        vars: cfa.vars.clone(),
        reachable: BTreeMap::new(),
        truncated: false,
        limits,
    };
    let init = vec![BigInt::zero(); cfa.vars.len()];
    let mut count = 1usize;
    run.reachable.entry(cfa.entry).or_default().insert(init.clone());
    let mut queue = VecDeque::from([(cfa.entry, init)]);
    let mut steps = 0usize;
    let index: BTreeMap<&VarId, usize> = cfa.vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
    while let Some((n, st)) = queue.pop_front() {
        steps += 1;
        if steps > limits.max_steps {
            run.truncated = true;
            break;
        }
        let model = run.model(&st);
        for e in cfa.out_edges(n) {
            let mut succs = Vec::new();
            match &e.op {
                Op::Skip => succs.push(st.clone()),
                Op::Assume(f) => {
                    if evaluate(f, &model).unwrap_or(false) {
                        succs.push(st.clone());
                    }
                }
                Op::Assign(x, Some(expr)) => {
                    let q = expr.eval(&model).expect("program variables are all valued");
                    let mut s = st.clone();
                    s[index[x]] = q.to_integer();
                    succs.push(s);
                }
                Op::Assign(x, None) => {
                    for k in limits.nondet_min..=limits.nondet_max {
                        let mut s = st.clone();
                        s[index[x]] = BigInt::from(k);
                        succs.push(s);
                    }
                }
            }
            for s in succs {
                if s.iter().any(|v| v.bits() > limits.max_bits) {
                    run.truncated = true;
                    continue;
                }
                if run.reachable.entry(e.to).or_default().insert(s.clone()) {
                    count += 1;
                    if count > limits.max_states {
                        run.truncated = true;
                        return run;
                    }
                    queue.push_back((e.to, s));
                }
            }
        }
    }
    run
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub node: NodeId,
    pub state: Vec<BigInt>,
    /// The constraint the state breaks.
    pub constraint: String,
}

/// Concrete states at abstraction points that fall outside the invariant.
pub fn check_soundness(run: &ConcreteRun, result: &AnalysisResult) -> Vec<Violation> {
    let mut out = Vec::new();
    for p in &result.points {
        for st in run.states(*p) {
            let Some(inv) = result.invariants.get(p) else {
                out.push(Violation {
                    node: *p,
                    state: st.clone(),
                    constraint: "unreachable".into(),
                });
                continue;
            };
            let m = run.model(st);
            for (t, e) in &inv.entries {
                let v = t.expr().eval(&m).expect("program variables are all valued");
                if v > e.bound {
                    out.push(Violation {
                        node: *p,
                        state: st.clone(),
                        constraint: format!("{t} <= {}", crate::linear::fmt_rational(&e.bound)),
                    });
                }
            }
            if let Some(c) = &inv.congruence {
                for (v, par) in c.iter() {
                    let Some(i) = run.vars.iter().position(|x| x == v) else {
                        continue;
                    };
                    if *par != Parity::Top && !par.contains(&st[i]) {
                        out.push(Violation {
                            node: *p,
                            state: st.clone(),
                            constraint: format!("{v}: {par:?}"),
                        });
                    }
                }
            }
        }
    }
    out
}
