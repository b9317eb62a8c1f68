//! Maximum-k-coverage algorithms: the subsampled multi-pass thresholding
//! family and the streaming greedy reference.

mod greedy;
mod mach;
mod params;

use std::collections::HashSet;
use std::time::Duration;

use serde::Serialize;

use crate::error::Result;
use crate::hashing::OpCounter;
use crate::setstream::SetStream;
use crate::space::SpaceBreakdown;

pub use greedy::run_greedy;
pub use mach::{
    find_guess, run_mach, run_mach_observed, Admission, GuessState, GuessTrace, MachObserver,
};
pub use params::{
    delta_eps, derive_params, guess_ladder, lambda, log_m, num_passes, original_gamma,
    reduced_gamma, DerivedParams, GammaMode, MachParams,
};

/// Outcome of one algorithm run.
#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    /// Selected set indices, in admission order.
    pub solution: Vec<usize>,
    /// `|∪_{i∈I} S_i|`, computed exactly.
    pub coverage_exact: u64,
    /// Streaming passes charged to the algorithm (the evaluation pass is not).
    pub passes_used: u64,
    pub peak_elements_stored: u64,
    pub peak_breakdown: SpaceBreakdown,
    pub hash_ops: OpCounter,
    pub wall_time: Duration,
    pub selected_guess: Option<u64>,
    /// No guess met the selection criterion; the fallback guess was used.
    pub no_qualifying_guess: bool,
    /// An extra, unaccounted pass was used to score the solution.
    pub eval_pass: bool,
    pub gamma: Option<usize>,
    pub lambda: Option<f64>,
    pub guesses: Vec<GuessTrace>,
}

impl RunResult {
    pub fn hash_mulmod_count(&self) -> u64 {
        self.hash_ops.mulmods
    }

    pub(crate) fn baseline(solution: Vec<usize>, coverage_exact: u64, passes_used: u64) -> Self {
        RunResult {
            solution,
            coverage_exact,
            passes_used,
            peak_elements_stored: 0,
            peak_breakdown: SpaceBreakdown::default(),
            hash_ops: OpCounter::default(),
            wall_time: Duration::ZERO,
            selected_guess: None,
            no_qualifying_guess: false,
            eval_pass: false,
            gamma: None,
            lambda: None,
            guesses: Vec::new(),
        }
    }
}

/// Exact size of the union of the chosen sets, in one pass.
pub fn exact_coverage(stream: &SetStream, solution: &[usize]) -> Result<u64> {
    let wanted: HashSet<usize> = solution.iter().copied().collect();
    let mut covered = HashSet::new();
    for rec in stream.pass()? {
        let rec = rec?;
        if wanted.contains(&rec.index) {
            covered.extend(rec.elements);
        }
    }
    Ok(covered.len() as u64)
}
