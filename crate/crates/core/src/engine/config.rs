use serde::Serialize;

use crate::templates::{Preset, TemplateConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegerMode {
    /// Integer variables: MILP for abstraction and value determination.
    Exact,
    /// Rational relaxation.
    Relaxed,
}

/// The search heuristics; none of them changes the computed bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Toggles {
    pub input_independence: bool,
    pub syntactic_skip: bool,
    pub redundant_lemma: bool,
}

impl Toggles {
    pub const NAMES: [&'static str; 3] = ["input-independence", "syntactic-skip", "redundant-lemma"];

    pub fn all_on() -> Self {
        Toggles {
            input_independence: true,
            syntactic_skip: true,
            redundant_lemma: true,
        }
    }

    pub fn all_off() -> Self {
        Toggles {
            input_independence: false,
            syntactic_skip: false,
            redundant_lemma: false,
        }
    }

    /// All eight on/off combinations.
    pub fn combinations() -> Vec<Toggles> {
        (0..8)
            .map(|b| Toggles {
                input_independence: b & 1 != 0,
                syntactic_skip: b & 2 != 0,
                redundant_lemma: b & 4 != 0,
            })
            .collect()
    }

    /// Turns off the named heuristic; false for an unknown name.
    pub fn disable(&mut self, name: &str) -> bool {
        match name {
            "input-independence" => self.input_independence = false,
            "syntactic-skip" => self.syntactic_skip = false,
            "redundant-lemma" => self.redundant_lemma = false,
            _ => return false,
        }
        true
    }
}

impl Default for Toggles {
    fn default() -> Self {
        Self::all_on()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budgets {
    pub max_abstractions: usize,
    pub max_steps: usize,
    /// Branch-and-bound nodes per LP call.
    pub lp_nodes: usize,
    /// Marker branches per optimization call.
    pub opt_branches: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_abstractions: 20_000,
            max_steps: 200_000,
            lp_nodes: crate::lp::DEFAULT_NODE_BUDGET,
            opt_branches: crate::opt::DEFAULT_MAX_BRANCHES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisConfig {
    pub templates: TemplateConfig,
    pub unroll: usize,
    pub congruence: bool,
    pub integer_mode: IntegerMode,
    pub toggles: Toggles,
    pub budgets: Budgets,
    /// Keep every committed bound change in the result.
    pub record_trace: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            templates: TemplateConfig::default(),
            unroll: 0,
            congruence: false,
            integer_mode: IntegerMode::Exact,
            toggles: Toggles::default(),
            budgets: Budgets::default(),
            record_trace: false,
        }
    }
}

impl AnalysisConfig {
    pub fn integer(&self) -> bool {
        self.integer_mode == IntegerMode::Exact
    }

    pub fn with_preset(mut self, p: Preset) -> Self {
        self.templates.preset = p;
        self
    }

    /// The five refinement steps, most abstract first.
    pub fn ladder(&self) -> Vec<AnalysisConfig> {
        let mut out = Vec::new();
        let mut c = self.clone();
        c.templates.explicit = None;
        c.unroll = 0;
        c.congruence = false;
        c.templates.preset = Preset::Intervals;
        out.push(c.clone());
        c.templates.preset = Preset::Octagons;
        out.push(c.clone());
        c.unroll = 2;
        out.push(c.clone());
        c.templates.preset = Preset::Rich;
        out.push(c.clone());
        c.congruence = true;
        out.push(c);
        out
    }
}
