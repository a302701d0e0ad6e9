//! Per-node template sets from presets, assertions and explicit lists.

use std::collections::BTreeSet;

use crate::cfa::{Cfa, EdgeKind};
use crate::domain::Template;
use crate::linear::VarId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Preset {
    Intervals,
    Octagons,
    Rich,
}

/// Variable triples are only generated at nodes with at most this many
/// live variables.
pub const RICH_MAX_LIVE: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateConfig {
    pub preset: Preset,
    pub from_assertions: bool,
    /// When set, exactly these templates are used at every node instead of
    /// the preset.
    pub explicit: Option<Vec<Template>>,
}

impl Default for TemplateConfig {
    fn default() -> Self {
        TemplateConfig {
            preset: Preset::Intervals,
            from_assertions: false,
            explicit: None,
        }
    }
}

fn push(out: &mut BTreeSet<Template>, terms: &[(&VarId, i64)]) {
    if let Ok(t) = Template::from_terms(terms) {
        out.insert(t);
    }
}

/// Templates over one node's live variables.
pub fn preset_templates(live: &BTreeSet<VarId>, preset: Preset) -> BTreeSet<Template> {
    let vs: Vec<&VarId> = live.iter().collect();
    let mut out = BTreeSet::new();
    for x in &vs {
        push(&mut out, &[(x, 1)]);
        push(&mut out, &[(x, -1)]);
    }
    if preset == Preset::Intervals {
        return out;
    }
    let signs = [1i64, -1];
    for (i, x) in vs.iter().enumerate() {
        for y in &vs[i + 1..] {
            for a in signs {
                for b in signs {
                    push(&mut out, &[(x, a), (y, b)]);
                }
            }
        }
    }
    if preset == Preset::Octagons {
        return out;
    }
    for x in &vs {
        for y in &vs {
            if x == y {
                continue;
            }
            for a in signs {
                for b in signs {
                    push(&mut out, &[(x, 2 * a), (y, b)]);
                }
            }
        }
    }
    if vs.len() > RICH_MAX_LIVE {
        log::warn!("{} live variables: skipping three-variable templates", vs.len());
        return out;
    }
    for (i, x) in vs.iter().enumerate() {
        for (j, y) in vs.iter().enumerate().skip(i + 1) {
            for z in &vs[j + 1..] {
                for a in signs {
                    for b in signs {
                        for c in signs {
                            push(&mut out, &[(x, a), (y, b), (z, c)]);
                            push(&mut out, &[(x, 2 * a), (y, b), (z, c)]);
                            push(&mut out, &[(x, a), (y, 2 * b), (z, c)]);
                            push(&mut out, &[(x, a), (y, b), (z, 2 * c)]);
                        }
                    }
                }
            }
        }
    }
    out
}

/// `+e` and `-e` for every atom `e <= 0` or `e = 0` of an assertion.
pub fn assertion_templates(cfa: &Cfa, id: usize) -> BTreeSet<Template> {
    let mut out = BTreeSet::new();
    if let Some(a) = cfa.assertions.iter().find(|a| a.id == id) {
        a.condition.for_each_atom(&mut |atom| {
            if let Ok(t) = Template::new(&atom.expr) {
                out.insert(t.negated());
                out.insert(t);
            }
        });
    }
    out
}

pub fn templates_from_assertions(cfa: &Cfa) -> BTreeSet<Template> {
    cfa.assertions.iter().flat_map(|a| assertion_templates(cfa, a.id)).collect()
}

/// Template set of every node.
pub fn synthesize(cfa: &Cfa, live: &[BTreeSet<VarId>], cfg: &TemplateConfig) -> Vec<BTreeSet<Template>> {
    let mut out: Vec<BTreeSet<Template>> = match &cfg.explicit {
        Some(ts) => vec![ts.iter().cloned().collect(); cfa.num_nodes],
        None => live.iter().map(|l| preset_templates(l, cfg.preset)).collect(),
    };
    if cfg.from_assertions {
        for a in &cfa.assertions {
            let sources: BTreeSet<_> = cfa
                .edges
                .iter()
                .filter(|e| e.kind == EdgeKind::AssertFail(a.id))
                .map(|e| e.from)
                .collect();
            let mut nodes = BTreeSet::new();
            for s in sources {
                nodes.extend(cfa.reaching(s));
            }
            let ts = assertion_templates(cfa, a.id);
            for n in nodes {
                for t in &ts {
                    if t.vars().is_subset(&live[n]) {
                        out[n].insert(t.clone());
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfa::live_variables;
    use crate::frontend::compile;

    fn vars(names: &[&str]) -> BTreeSet<VarId> {
        names.iter().map(|n| VarId::input(n)).collect()
    }

    #[test]
    fn preset_sizes() {
        assert_eq!(preset_templates(&vars(&["x", "y"]), Preset::Intervals).len(), 4);
        assert_eq!(preset_templates(&vars(&["x", "y"]), Preset::Octagons).len(), 8);
        assert!(preset_templates(&vars(&[]), Preset::Rich).is_empty());
        // 3 vars: 6 + 12 pairs + 24 (2x +- y) + 8 * 4 triples
        assert_eq!(preset_templates(&vars(&["x", "y", "z"]), Preset::Rich).len(), 6 + 12 + 24 + 32);
    }

    #[test]
    fn presets_are_nested() {
        let l = vars(&["a", "b", "c", "d"]);
        let i = preset_templates(&l, Preset::Intervals);
        let o = preset_templates(&l, Preset::Octagons);
        let r = preset_templates(&l, Preset::Rich);
        assert!(i.is_subset(&o) && o.is_subset(&r));
    }

    #[test]
    fn assertion_atoms() {
        let c = compile("int x; int y; assert(x >= 2 * y);").unwrap();
        let ts: Vec<String> = templates_from_assertions(&c).iter().map(|t| t.to_string()).collect();
        assert_eq!(ts, vec!["-x + 2*y", "x - 2*y"]);
        let c = compile("int x; assert(x != 0);").unwrap();
        let ts: Vec<String> = templates_from_assertions(&c).iter().map(|t| t.to_string()).collect();
        assert_eq!(ts, vec!["-x", "x"]);
        assert!(templates_from_assertions(&compile("int x;").unwrap()).is_empty());
    }

    #[test]
    fn synthesized_templates_use_live_vars() {
        let c = compile("int i = 0; int j = 0; while (i < 10) i++; while (j < 10) j++; assert(j <= 10);").unwrap();
        let live = live_variables(&c);
        let cfg = TemplateConfig {
            preset: Preset::Rich,
            from_assertions: true,
            explicit: None,
        };
        let ts = synthesize(&c, &live, &cfg);
        for n in c.nodes() {
            for t in &ts[n] {
                assert!(t.vars().is_subset(&live[n]));
            }
        }
    }
}
