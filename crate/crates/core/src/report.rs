//! Text and JSON rendering of an analysis result.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::engine::{AnalysisConfig, AnalysisResult, IntegerMode, Stats, Verdict};
use crate::linear::fmt_rational;
use crate::templates::Preset;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub template: String,
    pub bound: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeReport {
    pub node: String,
    pub reachable: bool,
    pub constraints: Vec<ConstraintReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parities: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssertionReport {
    pub line: usize,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub domain: String,
    pub unroll: usize,
    pub congruence: bool,
    pub integer_mode: String,
    pub disabled_heuristics: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates: Option<Vec<String>>,
    pub assertion_templates: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement_step: Option<usize>,
}

impl ConfigEcho {
    pub fn new(cfg: &AnalysisConfig, refinement_step: Option<usize>) -> Self {
        let domain = match cfg.templates.preset {
            Preset::Intervals => "intervals",
            Preset::Octagons => "octagons",
            Preset::Rich => "rich",
        };
        let t = cfg.toggles;
        let disabled = [
            (t.input_independence, "input-independence"),
            (t.syntactic_skip, "syntactic-skip"),
            (t.redundant_lemma, "redundant-lemma"),
        ]
        .into_iter()
        .filter(|(on, _)| !on)
        .map(|(_, n)| n.to_string())
        .collect();
        ConfigEcho {
            domain: domain.into(),
            unroll: cfg.unroll,
            congruence: cfg.congruence,
            integer_mode: match cfg.integer_mode {
                IntegerMode::Exact => "exact".into(),
                IntegerMode::Relaxed => "relaxed".into(),
            },
            disabled_heuristics: disabled,
            templates: cfg.templates.explicit.as_ref().map(|ts| ts.iter().map(|t| t.to_string()).collect()),
            assertion_templates: cfg.templates.from_assertions,
            refinement_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub invariants: Vec<NodeReport>,
    pub assertions: Vec<AssertionReport>,
    pub complete: bool,
    pub stats: Stats,
    pub config: ConfigEcho,
    pub wall_ms: u64,
}

impl Report {
    pub fn new(r: &AnalysisResult, refinement_step: Option<usize>, wall_ms: u64) -> Report {
        let invariants = r
            .ordered_points()
            .into_iter()
            .filter(|p| *p != r.cfa.entry)
            .map(|p| match r.invariants.get(&p) {
                None => NodeReport {
                    node: format!("n{p}"),
                    reachable: false,
                    constraints: Vec::new(),
                    parities: Vec::new(),
                },
                Some(s) => NodeReport {
                    node: format!("n{p}"),
                    reachable: true,
                    constraints: s
                        .entries
                        .iter()
                        .map(|(t, e)| ConstraintReport {
                            template: t.to_string(),
                            bound: fmt_rational(&e.bound),
                        })
                        .collect(),
                    parities: s
                        .congruence
                        .iter()
                        .flat_map(|c| c.iter().map(|(v, p)| format!("{v}: {p:?}").to_lowercase()))
                        .collect(),
                },
            })
            .collect();
        let assertions = r
            .verdicts
            .iter()
            .map(|v| AssertionReport {
                line: v.line,
                status: match v.verdict {
                    Verdict::Proved => "proved".into(),
                    Verdict::Unknown => "unknown".into(),
                },
            })
            .collect();
        Report {
            invariants,
            assertions,
            complete: r.complete,
            stats: r.stats.clone(),
            config: ConfigEcho::new(&r.config, refinement_step),
            wall_ms,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn to_text(&self, with_stats: bool) -> String {
        let mut out = String::new();
        for n in &self.invariants {
            if !n.reachable {
                let _ = writeln!(out, "{}: unreachable", n.node);
                continue;
            }
            let mut parts: Vec<String> = n.constraints.iter().map(|c| format!("{} <= {}", c.template, c.bound)).collect();
            parts.extend(n.parities.iter().cloned());
            let body = if parts.is_empty() { "true".to_string() } else { parts.join(", ") };
            let _ = writeln!(out, "{}: {body}", n.node);
        }
        for a in &self.assertions {
            let _ = writeln!(out, "assertion at line {}: {}", a.line, a.status);
        }
        if !self.complete {
            let _ = writeln!(out, "analysis stopped early: budget exhausted");
        }
        if let Some(step) = self.config.refinement_step {
            let _ = writeln!(out, "refinement step: {step}");
        }
        if with_stats {
            let s = &self.stats;
            for (k, v) in [
                ("abstractions", s.abstractions),
                ("value_determinations", s.value_determinations),
                ("opt_queries", s.opt_queries),
                ("lp_queries", s.lp_queries),
                ("opt_branches", s.opt_branches),
                ("sat_checks", s.sat_checks),
                ("skipped_by_syntactic_check", s.skipped_by_syntactic_check),
                ("reused_from_value_determination", s.reused_from_value_determination),
                ("input_independent", s.input_independent),
                ("overflow_abstractions", s.overflow_abstractions),
            ] {
                let _ = writeln!(out, "{k}: {v}");
            }
            let _ = writeln!(out, "wall_ms: {}", self.wall_ms);
        }
        out
    }
}
