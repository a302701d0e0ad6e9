//! The fixpoint loop: transfer between abstraction points as path formulas,
//! abstraction at loop heads, joins and local value determination.

pub mod abstraction;
pub mod certify;
mod config;
pub mod ladder;
mod stats;
pub mod transfer;
pub mod value_det;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::sync::Arc;

use serde::Serialize;

use crate::cfa::{live_variables, unroll, weak_topological_order, Cfa, EdgeKind, NodeId, Op, Wto};
use crate::congruence::{refine_from_bounds, CongruenceState};
use crate::domain::{AbstractedState, IntermediateState, Template};
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::linear::Rational;
use crate::opt::Optimizer;
use crate::templates::synthesize;

pub use certify::{check_inductive, verdicts};
pub use config::{AnalysisConfig, Budgets, IntegerMode, Toggles};
pub use ladder::refine_ladder;
pub use stats::Stats;
pub use value_det::{compute_influencing, value_determination, VdProblem};

/// Distinct start states kept at one node before it is turned into an
/// abstraction point.
pub const MAX_STATES_PER_NODE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Proved,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssertionVerdict {
    pub id: usize,
    pub line: usize,
    pub verdict: Verdict,
}

/// A bound committed at an abstraction point; `None` is unbounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundEvent {
    pub node: NodeId,
    pub template: Template,
    pub bound: Option<Rational>,
    pub policy: Option<Formula>,
}

#[derive(Debug, Clone)]
pub struct AnalysisResult {
    /// The analysed automaton, after unrolling.
    pub cfa: Cfa,
    pub config: AnalysisConfig,
    pub wto: Wto,
    pub templates: Vec<BTreeSet<Template>>,
    pub points: BTreeSet<NodeId>,
    /// Final states; a point without one is unreachable.
    pub invariants: BTreeMap<NodeId, Arc<AbstractedState>>,
    pub verdicts: Vec<AssertionVerdict>,
    pub stats: Stats,
    /// False when a budget ran out; the verdicts are then all unknown.
    pub complete: bool,
    pub trace: Vec<BoundEvent>,
}

impl AnalysisResult {
    pub fn all_proved(&self) -> bool {
        self.verdicts.iter().all(|v| v.verdict == Verdict::Proved)
    }

    pub fn bound(&self, node: NodeId, t: &Template) -> Option<&Rational> {
        self.invariants.get(&node).and_then(|s| s.bound(t))
    }

    /// Points in WTO order.
    pub fn ordered_points(&self) -> Vec<NodeId> {
        let mut ps: Vec<NodeId> = self.points.iter().copied().collect();
        let pos = self.wto.positions();
        ps.sort_by_key(|p| pos.get(p).copied().unwrap_or(usize::MAX));
        ps
    }
}

/// Intermediate states at one node sharing a start, one per incoming edge.
struct Group {
    start: Arc<AbstractedState>,
    parts: BTreeMap<usize, IntermediateState>,
    dirty: bool,
}

impl Group {
    fn combined(&self) -> IntermediateState {
        let mut it = self.parts.values();
        let first = it.next().expect("groups are never empty").clone();
        it.fold(first, |acc, s| IntermediateState::merge(&acc, s).expect("same node and start"))
    }
}

/// WTO position, phase, component end, arrival order, node.
type QueueKey = (usize, u8, usize, u64, NodeId);

const PROCESS: u8 = 0;
const ABSTRACT: u8 = 1;

struct Engine<'a> {
    cfa: &'a Cfa,
    cfg: &'a AnalysisConfig,
    templates: Vec<BTreeSet<Template>>,
    points: BTreeSet<NodeId>,
    pos: Vec<usize>,
    end: Vec<usize>,
    components: BTreeMap<NodeId, BTreeSet<NodeId>>,
    abstracted: BTreeMap<NodeId, Arc<AbstractedState>>,
    groups: Vec<Vec<Group>>,
    queue: BinaryHeap<Reverse<QueueKey>>,
    queued: BTreeSet<(u8, NodeId)>,
    seq: u64,
    opt: Optimizer,
    stats: Stats,
    trace: Vec<BoundEvent>,
}

impl Engine<'_> {
    fn is_current(abstracted: &BTreeMap<NodeId, Arc<AbstractedState>>, a: &Arc<AbstractedState>) -> bool {
        abstracted.get(&a.node).is_some_and(|c| Arc::ptr_eq(c, a))
    }

    fn enqueue(&mut self, kind: u8, n: NodeId) {
        if !self.queued.insert((kind, n)) {
            return;
        }
        self.seq += 1;
        let key = if kind == PROCESS {
            (self.pos[n], kind, 0)
        } else {
            (self.end[n], kind, usize::MAX - self.pos[n])
        };
        self.queue.push(Reverse((key.0, key.1, key.2, self.seq, n)));
    }

    fn run(&mut self) -> Result<()> {
        while let Some(Reverse((_, kind, _, _, n))) = self.queue.pop() {
            self.queued.remove(&(kind, n));
            self.stats.steps += 1;
            if self.stats.steps > self.cfg.budgets.max_steps {
                return Err(Error::Budget(format!("more than {} waitlist steps", self.cfg.budgets.max_steps)));
            }
            if kind == PROCESS {
                self.process(n)?;
            } else {
                self.abstract_point(n)?;
            }
        }
        Ok(())
    }

    fn process(&mut self, n: NodeId) -> Result<()> {
        let mut todo = Vec::new();
        if self.points.contains(&n) {
            if let Some(s) = self.abstracted.get(&n) {
                todo.push(transfer::lift(s));
            }
        } else {
            let abstracted = &self.abstracted;
            self.groups[n].retain(|g| Self::is_current(abstracted, &g.start));
            for g in self.groups[n].iter_mut().filter(|g| g.dirty) {
                g.dirty = false;
                todo.push(g.combined());
            }
        }
        for s in todo {
            self.propagate(&s)?;
        }
        Ok(())
    }

    fn propagate(&mut self, s: &IntermediateState) -> Result<()> {
        let cfa = self.cfa;
        for (idx, e) in cfa.edges.iter().enumerate() {
            if e.from != s.node || matches!(e.kind, EdgeKind::AssertFail(_)) {
                continue;
            }
            let next = transfer::compose(s, e);
            let feasible = match &e.op {
                Op::Assume(Formula::True) => true,
                Op::Assume(_) => {
                    self.stats.sat_checks += 1;
                    let base = transfer::base_constraints(&next, self.cfg.integer())?;
                    self.opt.satisfiable(&next.formula, &base)?.is_some()
                }
                _ => next.congruence.as_ref().is_none_or(|c| !c.is_bottom()),
            };
            if feasible {
                self.deliver(idx, next);
            } else {
                self.withdraw(idx, s.start.clone(), e.to);
            }
        }
        Ok(())
    }

    fn kind_of(&self, n: NodeId) -> u8 {
        if self.points.contains(&n) {
            ABSTRACT
        } else {
            PROCESS
        }
    }

    fn withdraw(&mut self, idx: usize, start: Arc<AbstractedState>, n: NodeId) {
        let Some(pos) = self.groups[n].iter().position(|g| Arc::ptr_eq(&g.start, &start)) else {
            return;
        };
        if self.groups[n][pos].parts.remove(&idx).is_some() {
            if self.groups[n][pos].parts.is_empty() {
                self.groups[n].remove(pos);
            } else {
                self.groups[n][pos].dirty = true;
                let k = self.kind_of(n);
                self.enqueue(k, n);
            }
        }
    }

    fn deliver(&mut self, idx: usize, s: IntermediateState) {
        let n = s.node;
        let abstracted = &self.abstracted;
        self.groups[n].retain(|g| Self::is_current(abstracted, &g.start));
        let gi = match self.groups[n].iter().position(|g| Arc::ptr_eq(&g.start, &s.start)) {
            Some(i) => i,
            None => {
                self.groups[n].push(Group {
                    start: s.start.clone(),
                    parts: BTreeMap::new(),
                    dirty: false,
                });
                self.groups[n].len() - 1
            }
        };
        let g = &mut self.groups[n][gi];
        let changed = g
            .parts
            .get(&idx)
            .is_none_or(|old| old.formula != s.formula || old.congruence != s.congruence);
        if !changed {
            return;
        }
        g.parts.insert(idx, s);
        g.dirty = true;
        if !self.points.contains(&n) && self.groups[n].len() > MAX_STATES_PER_NODE {
            log::warn!("node {n}: more than {MAX_STATES_PER_NODE} start states, abstracting");
            self.stats.overflow_abstractions += 1;
            self.points.insert(n);
            self.end[n] = self.pos[n];
            for g in &mut self.groups[n] {
                g.dirty = true;
            }
        }
        let k = self.kind_of(n);
        self.enqueue(k, n);
    }

    fn abstract_point(&mut self, h: NodeId) -> Result<()> {
        let groups = std::mem::take(&mut self.groups[h]);
        let old = self.abstracted.get(&h).cloned();
        let mut acc: Option<AbstractedState> = old.as_deref().cloned();
        for g in groups {
            if !Self::is_current(&self.abstracted, &g.start) {
                continue;
            }
            if self.stats.abstractions >= self.cfg.budgets.max_abstractions {
                return Err(Error::Budget(format!("more than {} abstractions", self.cfg.budgets.max_abstractions)));
            }
            let s = g.combined();
            let start_templates = &self.templates[g.start.node];
            let res = abstraction::abstraction(&s, h, &self.templates[h], start_templates, self.cfg, &mut self.opt, &mut self.stats)?;
            if let Some(new) = res {
                acc = Some(match acc {
                    None => new,
                    Some(prev) => AbstractedState::join(&new, &prev)?,
                });
            }
        }
        let Some(mut acc) = acc else {
            return Ok(());
        };
        if let Some(old) = &old {
            if acc.same_values(old) {
                return Ok(());
            }
            let updated: Vec<&Template> = acc
                .entries
                .iter()
                .filter(|(t, e)| old.bound(t).is_none_or(|b| e.bound > *b))
                .map(|(t, _)| t)
                .collect();
            let closes = self.components.get(&h).is_some_and(|comp| {
                updated.iter().any(|t| comp.contains(&acc.entries[*t].backpointer.node))
            });
            if closes {
                let candidate = Arc::new(acc);
                let abstracted = &self.abstracted;
                let influencing = compute_influencing(&candidate, |n| abstracted.get(&n).cloned())?;
                self.stats.value_determinations += 1;
                self.stats.opt_queries += 1;
                acc = value_determination(h, &influencing, &mut self.opt.solver)?;
            }
        }
        if let Some(c) = &acc.congruence {
            acc.congruence = Some(refine_from_bounds(c, &acc));
        }
        if let Some(old) = &old {
            if acc.same_values(old) {
                return Ok(());
            }
        }
        if self.cfg.record_trace {
            self.record(old.as_deref(), &acc);
        }
        self.abstracted.insert(h, Arc::new(acc));
        self.enqueue(PROCESS, h);
        Ok(())
    }

    fn record(&mut self, old: Option<&AbstractedState>, new: &AbstractedState) {
        for t in &self.templates[new.node] {
            let nb = new.bound(t);
            let ob = old.and_then(|o| o.bound(t));
            if old.is_none() || nb != ob {
                self.trace.push(BoundEvent {
                    node: new.node,
                    template: t.clone(),
                    bound: nb.cloned(),
                    policy: new.entries.get(t).map(|e| e.policy.clone()),
                });
            }
        }
    }
}

/// Runs the analysis on `cfa` (unrolled first when configured).
pub fn run(cfa: &Cfa, cfg: &AnalysisConfig) -> Result<AnalysisResult> {
    let cfa = if cfg.unroll > 0 { unroll(cfa, cfg.unroll) } else { cfa.clone() };
    let live = live_variables(&cfa);
    let templates = synthesize(&cfa, &live, &cfg.templates);
    let wto = weak_topological_order(&cfa);
    let positions = wto.positions();
    let pos: Vec<usize> = cfa.nodes().map(|n| positions.get(&n).copied().unwrap_or(usize::MAX / 2)).collect();
    let components: BTreeMap<NodeId, BTreeSet<NodeId>> = wto.heads().into_iter().map(|h| (h, wto.component_nodes(h))).collect();
    let mut end = pos.clone();
    for (h, comp) in &components {
        end[*h] = comp.iter().map(|n| pos[*n]).max().unwrap_or(pos[*h]);
    }
    let mut opt = Optimizer::new(cfg.integer());
    opt.redundant_lemma = cfg.toggles.redundant_lemma;
    opt.max_branches = cfg.budgets.opt_branches;
    opt.solver.node_budget = cfg.budgets.lp_nodes;
    let mut engine = Engine {
        cfa: &cfa,
        cfg,
        templates,
        points: cfa.abstraction_points(),
        pos,
        end,
        components,
        abstracted: BTreeMap::new(),
        groups: (0..cfa.num_nodes).map(|_| Vec::new()).collect(),
        queue: BinaryHeap::new(),
        queued: BTreeSet::new(),
        seq: 0,
        opt,
        stats: Stats::default(),
        trace: Vec::new(),
    };
    let mut init = AbstractedState::top(cfa.entry);
    if cfg.congruence {
        init.congruence = Some(CongruenceState::top());
    }
    engine.abstracted.insert(cfa.entry, Arc::new(init));
    engine.enqueue(PROCESS, cfa.entry);
    let outcome = engine.run();
    let complete = match outcome {
        Ok(()) => true,
        Err(Error::Budget(msg)) => {
            log::warn!("analysis stopped early: {msg}");
            false
        }
        Err(e) => return Err(e),
    };
    let mut stats = engine.stats;
    stats.lp_queries = engine.opt.solver.queries;
    stats.opt_branches = engine.opt.branches;
    let points = engine.points;
    let invariants = engine.abstracted;
    let verdicts = if complete {
        match verdicts(&cfa, &points, &invariants, &wto) {
            Ok(v) => v,
            Err(Error::Budget(msg)) => {
                log::warn!("verdict check stopped early: {msg}");
                unknown_verdicts(&cfa)
            }
            Err(e) => return Err(e),
        }
    } else {
        unknown_verdicts(&cfa)
    };
    Ok(AnalysisResult {
        templates: engine.templates,
        trace: engine.trace,
        config: cfg.clone(),
        cfa,
        wto,
        points,
        invariants,
        verdicts,
        stats,
        complete,
    })
}

fn unknown_verdicts(cfa: &Cfa) -> Vec<AssertionVerdict> {
    cfa.assertions
        .iter()
        .map(|a| AssertionVerdict {
            id: a.id,
            line: a.line,
            verdict: Verdict::Unknown,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::compile;
    use crate::linear::{rat, VarId};

    const FIG1: &str = "int i = 0; int j = 0; while (i < 10) { i++; } while (j < 10) { j++; }";

    fn explicit(names: &[&str]) -> AnalysisConfig {
        let mut cfg = AnalysisConfig::default();
        cfg.templates.explicit = Some(names.iter().map(|n| Template::parse(n).unwrap()).collect());
        cfg
    }

    fn t(s: &str) -> Template {
        Template::parse(s).unwrap()
    }

    #[test]
    fn running_example() {
        let cfa = compile(FIG1).unwrap();
        let mut cfg = explicit(&["i", "j"]);
        cfg.toggles = Toggles::all_off();
        let r = run(&cfa, &cfg).unwrap();
        let heads: Vec<NodeId> = cfa.loop_heads.iter().copied().collect();
        assert_eq!(r.bound(heads[0], &t("i")), Some(&rat(10)));
        assert_eq!(r.bound(heads[0], &t("j")), Some(&rat(0)));
        assert_eq!(r.bound(heads[1], &t("i")), Some(&rat(10)));
        assert_eq!(r.bound(heads[1], &t("j")), Some(&rat(10)));
        assert_eq!(r.stats.value_determinations, 2);
        assert_eq!(r.stats.opt_queries, 12, "{:?}", r.stats);
        assert!(check_inductive(&r).unwrap());
        let on = run(&cfa, &explicit(&["i", "j"])).unwrap();
        assert!(on.stats.opt_queries <= 10, "{:?}", on.stats);
        assert_eq!(on.bound(heads[1], &t("j")), Some(&rat(10)));
    }

    #[test]
    fn loop_free_assertion_needs_no_abstraction() {
        let cfa = compile("int x = nondet(); if (x >= 1 || x <= -1) { assert(x != 0); }").unwrap();
        let r = run(&cfa, &AnalysisConfig::default()).unwrap();
        assert_eq!(r.stats.abstractions, 0);
        assert!(r.all_proved());
    }

    #[test]
    fn large_bound_is_accelerated() {
        let cfa = compile("int i = 0; while (i < 1000000) i++;").unwrap();
        let r = run(&cfa, &AnalysisConfig::default()).unwrap();
        let h = *cfa.loop_heads.iter().next().unwrap();
        assert_eq!(r.bound(h, &Template::var(&VarId::input("i"))), Some(&rat(1000000)));
        assert!(r.stats.value_determinations <= 2);
    }

    #[test]
    fn corrupted_invariant_is_not_inductive() {
        let cfa = compile(FIG1).unwrap();
        let mut r = run(&cfa, &explicit(&["i", "j"])).unwrap();
        let h = *cfa.loop_heads.iter().next().unwrap();
        let mut s = (*r.invariants[&h]).clone();
        s.entries.get_mut(&t("i")).unwrap().bound = rat(9);
        r.invariants.insert(h, Arc::new(s));
        assert!(!check_inductive(&r).unwrap());
    }
}
