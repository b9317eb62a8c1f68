//! Multi-pass subsampled thresholding with parallel guesses.
//!
//! One [`GuessState`] runs per guess `v` of the optimal coverage. Each keeps
//! only the subsampled coverage `C′`, admits a set when its subsampled
//! contribution reaches the current threshold, and is deactivated for good
//! once `C′` would outgrow its budget `2(1+ε)λ`. The threshold shrinks by
//! `1+ε` after every pass. At the end one guess is picked, either by F₀
//! sketch estimates or by [`find_guess`].

use std::collections::HashSet;
use std::f64::consts::E;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::hashing::{sample_hash, OpCounter, Subsampler};
use crate::maxcover::params::{derive_params, DerivedParams, MachParams};
use crate::maxcover::{exact_coverage, RunResult};
use crate::setstream::SetStream;
use crate::sketch::F0Sketch;
use crate::space::{SpaceAccount, Structure};

/// A set admitted into a guess's solution, with the values that justified it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Admission {
    pub pass: usize,
    pub index: usize,
    pub contribution: usize,
    pub threshold: f64,
}

#[derive(Debug)]
pub struct GuessState {
    v: u64,
    lambda_eff: f64,
    budget: f64,
    threshold: f64,
    subsampler: Subsampler,
    coverage: HashSet<u64>,
    solution: Vec<usize>,
    admissions: Vec<Admission>,
    active: bool,
    sketch: Option<F0Sketch>,
}

impl GuessState {
    pub fn v(&self) -> u64 {
        self.v
    }

    /// Expected subsample scale `v·p`, i.e. `min(λ, v)`, or `v` under full
    /// sampling. Thresholds and budgets are expressed in this scale.
    pub fn lambda_eff(&self) -> f64 {
        self.lambda_eff
    }

    /// Deactivation bound `2(1+ε)·lambda_eff`.
    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn subsampler(&self) -> &Subsampler {
        &self.subsampler
    }

    pub fn coverage(&self) -> &HashSet<u64> {
        &self.coverage
    }

    pub fn solution(&self) -> &[usize] {
        &self.solution
    }

    pub fn admissions(&self) -> &[Admission] {
        &self.admissions
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    pub fn sketch(&self) -> Option<&F0Sketch> {
        self.sketch.as_ref()
    }

    /// Element instances held by this guess.
    pub fn stored_elements(&self) -> u64 {
        (self.coverage.len()
            + self.solution.len()
            + self.subsampler.stored_coeffs()
            + self.sketch.as_ref().map_or(0, F0Sketch::retained_len)) as u64
    }

    fn trace(&self) -> GuessTrace {
        GuessTrace {
            v: self.v,
            lambda_eff: self.lambda_eff,
            sample_prob: self.subsampler.sample_prob(),
            active: self.active,
            coverage_sampled: self.coverage.len(),
            solution: self.solution.clone(),
            f0_estimate: self.sketch.as_ref().map(F0Sketch::estimate),
            admissions: self.admissions.clone(),
        }
    }
}

/// Final per-guess diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuessTrace {
    pub v: u64,
    pub lambda_eff: f64,
    pub sample_prob: f64,
    pub active: bool,
    pub coverage_sampled: usize,
    pub solution: Vec<usize>,
    pub f0_estimate: Option<f64>,
    pub admissions: Vec<Admission>,
}

/// Hooks into a MACH run, for instrumentation and invariant checks.
pub trait MachObserver {
    /// Called after guess `guess` has processed set `set_index`.
    fn after_step(
        &mut self,
        _pass: usize,
        _set_index: usize,
        _guess: usize,
        _state: &GuessState,
        _space: &SpaceAccount,
    ) {
    }

    /// Called at the end of each thresholding pass.
    fn after_pass(&mut self, _pass: usize, _states: &[GuessState]) {}
}

impl MachObserver for () {}

/// FindGuess: the largest index whose guess is active and whose sampled
/// coverage reaches `(1−ε)(1−1/e−ε)·lambda_eff`. `None` when no guess
/// qualifies.
pub fn find_guess(traces: &[GuessTrace], eps: f64) -> Option<usize> {
    let factor = (1.0 - eps) * (1.0 - 1.0 / E - eps);
    traces
        .iter()
        .rposition(|t| t.active && t.coverage_sampled as f64 >= factor * t.lambda_eff)
}

/// Largest sampled coverage, preferring active guesses; ties go to the
/// lower index.
fn fallback_guess(traces: &[GuessTrace]) -> usize {
    let best = |only_active: bool| {
        traces
            .iter()
            .enumerate()
            .filter(|(_, t)| t.active || !only_active)
            .fold(None, |best: Option<(usize, usize)>, (i, t)| match best {
                Some((_, c)) if c >= t.coverage_sampled => best,
                _ => Some((i, t.coverage_sampled)),
            })
            .map(|(i, _)| i)
    };
    best(true).or_else(|| best(false)).unwrap_or(0)
}

/// Largest F₀ estimate among active guesses, ties to the lower index.
fn argmax_f0(traces: &[GuessTrace]) -> Option<usize> {
    traces
        .iter()
        .enumerate()
        .filter(|(_, t)| t.active)
        .fold(None, |best: Option<(usize, f64)>, (i, t)| {
            let est = t.f0_estimate.unwrap_or(0.0);
            match best {
                Some((_, b)) if b >= est => best,
                _ => Some((i, est)),
            }
        })
        .map(|(i, _)| i)
}

pub fn run_mach(stream: &SetStream, params: &MachParams) -> Result<RunResult> {
    run_mach_observed(stream, params, &mut ())
}

fn init_states(
    params: &MachParams,
    derived: &DerivedParams,
    n_bound: u64,
    space: &mut SpaceAccount,
) -> Result<Vec<GuessState>> {
    let mut seeds = ChaCha8Rng::seed_from_u64(params.seed);
    let grow = 2.0 * (1.0 + params.eps);
    derived
        .guesses
        .iter()
        .map(|&v| {
            let hash_seed = seeds.next_u64();
            let sketch_seed = seeds.next_u64();
            let (subsampler, lambda_eff) = match derived.gamma {
                None => (Subsampler::full(), v as f64),
                Some(gamma) => {
                    let hash = sample_hash(gamma, v, hash_seed, n_bound)?;
                    (
                        Subsampler::new(hash, derived.lambda),
                        derived.lambda.min(v as f64),
                    )
                }
            };
            let sketch = if params.use_f0_selection {
                Some(F0Sketch::new(params.eps, params.f0_delta, sketch_seed)?)
            } else {
                None
            };
            space.add(
                Structure::HashCoefficients,
                subsampler.stored_coeffs() as u64,
            );
            Ok(GuessState {
                v,
                lambda_eff,
                budget: grow * lambda_eff,
                threshold: grow * lambda_eff / params.k as f64,
                subsampler,
                coverage: HashSet::new(),
                solution: Vec::new(),
                admissions: Vec::new(),
                active: true,
                sketch,
            })
        })
        .collect()
}

/// Runs MACH with an observer attached.
pub fn run_mach_observed<O: MachObserver>(
    stream: &SetStream,
    params: &MachParams,
    observer: &mut O,
) -> Result<RunResult> {
    params.validate()?;
    let start = Instant::now();
    let stats = stream.stats()?;
    let n_bound = stream.universe_bound(&stats);
    let derived = derive_params(params, &stats, n_bound)?;

    let mut space = SpaceAccount::new();
    let mut ops = OpCounter::default();
    let mut states = init_states(params, &derived, n_bound, &mut space)?;
    let mut fresh: Vec<u64> = Vec::new();

    for pass in 0..derived.num_passes {
        for rec in stream.pass()? {
            let rec = rec?;
            for (g, st) in states.iter_mut().enumerate() {
                if !st.active {
                    continue;
                }
                // R = S′ \ C′; every element is hashed whether or not covered
                fresh.clear();
                fresh.extend(rec.elements.iter().copied().filter(|&x| {
                    st.subsampler.is_sampled(x, &mut ops) && !st.coverage.contains(&x)
                }));
                if (st.coverage.len() + fresh.len()) as f64 > st.budget {
                    st.active = false;
                } else if st.solution.len() < params.k && fresh.len() as f64 >= st.threshold {
                    st.coverage.extend(fresh.iter().copied());
                    st.solution.push(rec.index);
                    st.admissions.push(Admission {
                        pass,
                        index: rec.index,
                        contribution: fresh.len(),
                        threshold: st.threshold,
                    });
                    space.add(Structure::Coverage, fresh.len() as u64);
                    space.add(Structure::SolutionIndices, 1);
                    if let Some(sk) = st.sketch.as_mut() {
                        let before = sk.retained_len() as u64;
                        for &x in &rec.elements {
                            sk.insert(x);
                        }
                        space.resize(Structure::Sketch, before, sk.retained_len() as u64);
                    }
                    assert!(
                        st.coverage.len() as f64 <= st.budget,
                        "active guess {} exceeded its budget",
                        st.v
                    );
                }
                observer.after_step(pass, rec.index, g, st, &space);
            }
        }
        for st in &mut states {
            st.threshold /= 1.0 + params.eps;
        }
        observer.after_pass(pass, &states);
    }

    let traces: Vec<GuessTrace> = states.iter().map(GuessState::trace).collect();
    let chosen = if params.use_f0_selection {
        argmax_f0(&traces)
    } else {
        find_guess(&traces, params.eps)
    };
    let no_qualifying_guess = chosen.is_none();
    let s = chosen.unwrap_or_else(|| fallback_guess(&traces));
    let solution = traces[s].solution.clone();
    let wall_time = start.elapsed();

    let coverage_exact = exact_coverage(stream, &solution)?;
    Ok(RunResult {
        solution,
        coverage_exact,
        passes_used: 1 + derived.num_passes as u64,
        peak_elements_stored: space.peak(),
        peak_breakdown: space.peak_breakdown(),
        hash_ops: ops,
        wall_time,
        selected_guess: Some(traces[s].v),
        no_qualifying_guess,
        eval_pass: true,
        gamma: derived.gamma,
        lambda: Some(derived.lambda),
        guesses: traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(cov_over_lambda: f64, active: bool) -> GuessTrace {
        GuessTrace {
            v: 0,
            lambda_eff: 1000.0,
            sample_prob: 1.0,
            active,
            coverage_sampled: (cov_over_lambda * 1000.0).round() as usize,
            solution: vec![],
            f0_estimate: None,
            admissions: vec![],
        }
    }

    #[test]
    fn find_guess_single_full_coverage() {
        assert_eq!(find_guess(&[trace(1.0, true)], 0.25), Some(0));
    }

    #[test]
    fn find_guess_hand_case() {
        // bound = 0.875 * (1 - 1/e - 0.125) = 0.4438
        let ts = [trace(0.9, true), trace(0.4, true), trace(0.1, false)];
        assert_eq!(find_guess(&ts, 0.125), Some(0));
        let ts = [trace(0.9, true), trace(0.45, true), trace(0.1, false)];
        assert_eq!(find_guess(&ts, 0.125), Some(1));
    }

    #[test]
    fn find_guess_exhausted() {
        let ts = [trace(0.9, false), trace(0.8, false)];
        assert_eq!(find_guess(&ts, 0.125), None);
        assert_eq!(find_guess(&[], 0.125), None);
    }

    #[test]
    fn fallback_prefers_active_then_largest() {
        let ts = [
            trace(0.1, true),
            trace(0.3, true),
            trace(0.3, true),
            trace(0.9, false),
        ];
        assert_eq!(fallback_guess(&ts), 1);
        let ts = [trace(0.1, false), trace(0.3, false)];
        assert_eq!(fallback_guess(&ts), 1);
    }
}
