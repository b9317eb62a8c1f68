use std::collections::HashSet;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::maxcover::RunResult;
use crate::setstream::SetStream;
use crate::space::{SpaceAccount, Structure};

/// Streaming greedy: each pass picks the first set with the largest
/// contribution `|S \ C|`. Stops early once no set adds anything.
///
/// Keeps the full coverage, so space is linear in the covered universe.
pub fn run_greedy(stream: &SetStream, k: usize) -> Result<RunResult> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let start = Instant::now();
    let mut space = SpaceAccount::new();
    let mut covered: HashSet<u64> = HashSet::new();
    let mut solution = Vec::with_capacity(k);
    let mut passes = 0;

    for _ in 0..k {
        passes += 1;
        let mut best: Option<(usize, usize, Vec<u64>)> = None;
        for rec in stream.pass()? {
            let rec = rec?;
            let gain = rec.elements.iter().filter(|x| !covered.contains(x)).count();
            if gain > best.as_ref().map_or(0, |b| b.1) {
                let old = best.as_ref().map_or(0, |b| b.2.len() as u64);
                space.resize(Structure::StoredSets, old, rec.elements.len() as u64);
                best = Some((rec.index, gain, rec.elements));
            }
        }
        let Some((index, _, elements)) = best else {
            break;
        };
        space.remove(Structure::StoredSets, elements.len() as u64);
        let before = covered.len();
        covered.extend(elements);
        space.add(Structure::Coverage, (covered.len() - before) as u64);
        space.add(Structure::SolutionIndices, 1);
        solution.push(index);
    }

    let mut result = RunResult::baseline(solution, covered.len() as u64, passes);
    result.peak_elements_stored = space.peak();
    result.peak_breakdown = space.peak_breakdown();
    result.wall_time = start.elapsed();
    Ok(result)
}
