use crate::cfa::Cfa;
use crate::error::Result;

use super::{run, AnalysisConfig, AnalysisResult};

/// Tries the refinement steps in order; returns the index of the step used
/// and its result: the first that proves every assertion, else the last.
pub fn refine_ladder(cfa: &Cfa, base: &AnalysisConfig) -> Result<(usize, AnalysisResult)> {
    let steps = base.ladder();
    let last = steps.len() - 1;
    for (i, cfg) in steps.into_iter().enumerate() {
        let r = run(cfa, &cfg)?;
        log::info!("refinement step {i}: {}", if r.all_proved() { "proved" } else { "not proved" });
        if r.all_proved() || i == last {
            return Ok((i, r));
        }
    }
    unreachable!("the ladder has five steps")
}
