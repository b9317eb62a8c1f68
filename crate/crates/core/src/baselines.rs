//! Comparator streaming algorithms that keep exact coverage.
//!
//! * [`run_sg`]: one pass, keeps `k` full sets and swaps out the set with
//!   the fewest uniquely covered elements when a newcomer is worth twice as
//!   much.
//! * [`run_bmkk`]: one pass, one sieve instance per guess `v = (1+ε)^j`
//!   admitting sets whose gain reaches `(v/2 − |C|)/(k − |I|)`.
//! * [`run_2p`]: two passes per guess, fixed threshold `v/(2k)` then the
//!   adaptive `(v − |C|)/(2(k − |I|))`.
//!
//! No rule admits a set with zero gain. Every result counts the shared
//! stats pass in `passes_used`.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::maxcover::RunResult;
use crate::setstream::SetStream;
use crate::space::{SpaceAccount, Structure};

/// Baselines report the same shape as MACH runs.
pub type BaselineResult = RunResult;

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps {eps} not in (0,1)")));
    }
    Ok(())
}

struct Slot {
    index: usize,
    elements: HashSet<u64>,
    unique: usize,
}

/// Swap-based one-pass algorithm.
pub fn run_sg(stream: &SetStream, k: usize) -> Result<BaselineResult> {
    check_k(k)?;
    let start = Instant::now();
    stream.stats()?;
    let mut space = SpaceAccount::new();
    let mut slots: Vec<Slot> = Vec::with_capacity(k);
    // element -> number of stored sets containing it
    let mut counts: HashMap<u64, u32> = HashMap::new();

    fn owner(slots: &[Slot], x: u64, skip: usize) -> usize {
        slots
            .iter()
            .enumerate()
            .position(|(j, s)| j != skip && s.elements.contains(&x))
            .expect("counted element has an owner")
    }

    fn insert(
        slots: &mut Vec<Slot>,
        counts: &mut HashMap<u64, u32>,
        at: usize,
        index: usize,
        elements: Vec<u64>,
    ) {
        let mut unique = 0;
        for &x in &elements {
            let c = counts.entry(x).or_insert(0);
            match *c {
                0 => unique += 1,
                1 => {
                    let o = owner(slots, x, at);
                    slots[o].unique -= 1;
                }
                _ => {}
            }
            *c += 1;
        }
        let slot = Slot {
            index,
            elements: elements.into_iter().collect(),
            unique,
        };
        if at == slots.len() {
            slots.push(slot);
        } else {
            slots[at] = slot;
        }
    }

    fn evict(slots: &mut [Slot], counts: &mut HashMap<u64, u32>, at: usize) -> usize {
        let elements = std::mem::take(&mut slots[at].elements);
        slots[at].unique = 0;
        for &x in &elements {
            let c = counts.get_mut(&x).expect("stored element is counted");
            *c -= 1;
            match *c {
                0 => {
                    counts.remove(&x);
                }
                1 => {
                    let o = owner(slots, x, at);
                    slots[o].unique += 1;
                }
                _ => {}
            }
        }
        elements.len()
    }

    for rec in stream.pass()? {
        let rec = rec?;
        if rec.is_empty() {
            continue;
        }
        let covered_before = counts.len() as u64;
        if slots.len() < k {
            let len = rec.len() as u64;
            let at = slots.len();
            insert(&mut slots, &mut counts, at, rec.index, rec.elements);
            space.add(Structure::StoredSets, len);
            space.add(Structure::SolutionIndices, 1);
            space.resize(Structure::Coverage, covered_before, counts.len() as u64);
            continue;
        }
        let (victim, u) = slots
            .iter()
            .enumerate()
            .fold((0, usize::MAX), |best, (j, s)| {
                if s.unique < best.1 {
                    (j, s.unique)
                } else {
                    best
                }
            });
        let gain = rec
            .elements
            .iter()
            .filter(|x| match counts.get(x) {
                None => true,
                Some(1) => slots[victim].elements.contains(x),
                Some(_) => false,
            })
            .count();
        // swap when the total grows by more than the victim's unique count
        if gain > 2 * u {
            let len = rec.len() as u64;
            let removed = evict(&mut slots, &mut counts, victim) as u64;
            insert(&mut slots, &mut counts, victim, rec.index, rec.elements);
            space.resize(Structure::StoredSets, removed, len);
            space.resize(Structure::Coverage, covered_before, counts.len() as u64);
        }
    }

    let solution: Vec<usize> = slots.iter().map(|s| s.index).collect();
    let mut result = RunResult::baseline(solution, counts.len() as u64, 2);
    result.peak_elements_stored = space.peak();
    result.peak_breakdown = space.peak_breakdown();
    result.wall_time = start.elapsed();
    Ok(result)
}

/// Guesses `(1+ε)^j` from just below `max_set_size` to just above
/// `k·max_set_size`.
pub fn geometric_ladder(max_set_size: usize, k: usize, eps: f64) -> Vec<f64> {
    if max_set_size == 0 {
        return Vec::new();
    }
    let base = (1.0 + eps).ln();
    let lo = ((max_set_size as f64).ln() / base).floor() as i64;
    let hi = ((max_set_size as f64 * k as f64).ln() / base).ceil() as i64;
    (lo..=hi).map(|j| (1.0 + eps).powi(j as i32)).collect()
}

struct Instance {
    v: f64,
    covered: HashSet<u64>,
    solution: Vec<usize>,
}

impl Instance {
    fn new(v: f64) -> Self {
        Instance {
            v,
            covered: HashSet::new(),
            solution: Vec::new(),
        }
    }

    /// Admits `elements` if its gain is positive and reaches `threshold(self)`.
    fn offer(
        &mut self,
        index: usize,
        elements: &[u64],
        k: usize,
        threshold: impl Fn(&Instance) -> f64,
        space: &mut SpaceAccount,
    ) {
        if self.solution.len() >= k {
            return;
        }
        let gain = elements
            .iter()
            .filter(|x| !self.covered.contains(x))
            .count();
        if gain > 0 && gain as f64 >= threshold(self) {
            self.covered.extend(elements.iter().copied());
            self.solution.push(index);
            space.add(Structure::Coverage, gain as u64);
            space.add(Structure::SolutionIndices, 1);
        }
    }
}

fn best_instance(instances: Vec<Instance>) -> Instance {
    instances
        .into_iter()
        .reduce(|best, inst| {
            if inst.covered.len() > best.covered.len() {
                inst
            } else {
                best
            }
        })
        .expect("non-empty ladder")
}

fn finish(best: Instance, passes: u64, space: &SpaceAccount, start: Instant) -> BaselineResult {
    let mut result = RunResult::baseline(best.solution, best.covered.len() as u64, passes);
    result.selected_guess = Some(best.v.round() as u64);
    result.peak_elements_stored = space.peak();
    result.peak_breakdown = space.peak_breakdown();
    result.wall_time = start.elapsed();
    result
}

fn ladder_for(stream: &SetStream, k: usize, eps: f64) -> Result<Vec<Instance>> {
    let stats = stream.stats()?;
    let ladder = geometric_ladder(stats.max_set_size, k, eps);
    if ladder.is_empty() {
        return Err(Error::EmptyGuessLadder);
    }
    Ok(ladder.into_iter().map(Instance::new).collect())
}

/// One-pass sieve over a geometric ladder of guesses.
pub fn run_bmkk(stream: &SetStream, k: usize, eps: f64) -> Result<BaselineResult> {
    check_k(k)?;
    check_eps(eps)?;
    let start = Instant::now();
    let mut instances = ladder_for(stream, k, eps)?;
    let mut space = SpaceAccount::new();
    for rec in stream.pass()? {
        let rec = rec?;
        for inst in &mut instances {
            inst.offer(
                rec.index,
                &rec.elements,
                k,
                |i| (i.v / 2.0 - i.covered.len() as f64) / (k - i.solution.len()) as f64,
                &mut space,
            );
        }
    }
    Ok(finish(best_instance(instances), 2, &space, start))
}

fn two_pass(stream: &SetStream, k: usize, eps: f64, passes: usize) -> Result<BaselineResult> {
    check_k(k)?;
    check_eps(eps)?;
    let start = Instant::now();
    let mut instances = ladder_for(stream, k, eps)?;
    let mut space = SpaceAccount::new();
    for pass in 0..passes {
        for rec in stream.pass()? {
            let rec = rec?;
            for inst in &mut instances {
                if pass == 0 {
                    inst.offer(
                        rec.index,
                        &rec.elements,
                        k,
                        |i| i.v / (2.0 * k as f64),
                        &mut space,
                    );
                } else {
                    inst.offer(
                        rec.index,
                        &rec.elements,
                        k,
                        |i| (i.v - i.covered.len() as f64) / (2.0 * (k - i.solution.len()) as f64),
                        &mut space,
                    );
                }
            }
        }
    }
    Ok(finish(
        best_instance(instances),
        1 + passes as u64,
        &space,
        start,
    ))
}

/// Two-pass thresholding over a geometric ladder of guesses.
pub fn run_2p(stream: &SetStream, k: usize, eps: f64) -> Result<BaselineResult> {
    two_pass(stream, k, eps, 2)
}
