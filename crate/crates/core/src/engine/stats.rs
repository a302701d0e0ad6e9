use serde::{Deserialize, Serialize};

/// Work counters of one analysis run.
///
/// `opt_queries` counts template maximizations during abstraction plus one
/// per value determination, whatever number of templates it solves for.
/// `lp_queries` counts every call into the LP layer, including feasibility
/// checks and the per-template problems of value determination.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub abstractions: usize,
    pub value_determinations: usize,
    pub opt_queries: usize,
    pub lp_queries: usize,
    pub opt_branches: usize,
    pub sat_checks: usize,
    pub skipped_by_syntactic_check: usize,
    pub reused_from_value_determination: usize,
    pub input_independent: usize,
    pub overflow_abstractions: usize,
    pub steps: usize,
}
