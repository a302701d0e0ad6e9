use std::collections::BTreeSet;

use super::{Cfa, Op};
use crate::linear::VarId;

/// Backward may-liveness: the variables live on entry to each node.
pub fn live_variables(cfa: &Cfa) -> Vec<BTreeSet<VarId>> {
    let mut live = vec![BTreeSet::new(); cfa.num_nodes];
    let mut changed = true;
    while changed {
        changed = false;
        for e in cfa.edges.iter().rev() {
            let out = &live[e.to];
            let mut inflow: BTreeSet<VarId> = match &e.op {
                Op::Assign(x, _) => out.iter().filter(|v| *v != x).cloned().collect(),
                _ => out.clone(),
            };
            inflow.extend(e.read());
            let before = live[e.from].len();
            live[e.from].extend(inflow);
            if live[e.from].len() != before {
                changed = true;
            }
        }
    }
    live
}
