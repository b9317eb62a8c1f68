//! Element-instance space accounting.
//!
//! Space is measured by counting stored element instances: one element id
//! held in any structure counts 1, as does each hash coefficient, each
//! retained sketch value and each solution index.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    /// Covered (or subsampled covered) elements.
    Coverage,
    /// Retained F₀ sketch values.
    Sketch,
    HashCoefficients,
    SolutionIndices,
    /// Full set contents kept by swap-based baselines and greedy.
    StoredSets,
}

impl Structure {
    pub const ALL: [Structure; 5] = [
        Structure::Coverage,
        Structure::Sketch,
        Structure::HashCoefficients,
        Structure::SolutionIndices,
        Structure::StoredSets,
    ];

    fn slot(self) -> usize {
        self as usize
    }
}

/// Per-structure tallies at one instant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SpaceBreakdown {
    pub coverage: u64,
    pub sketch: u64,
    pub hash_coefficients: u64,
    pub solution_indices: u64,
    pub stored_sets: u64,
}

impl SpaceBreakdown {
    pub fn total(&self) -> u64 {
        self.coverage
            + self.sketch
            + self.hash_coefficients
            + self.solution_indices
            + self.stored_sets
    }

    pub fn get(&self, s: Structure) -> u64 {
        match s {
            Structure::Coverage => self.coverage,
            Structure::Sketch => self.sketch,
            Structure::HashCoefficients => self.hash_coefficients,
            Structure::SolutionIndices => self.solution_indices,
            Structure::StoredSets => self.stored_sets,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SpaceAccount {
    current: [u64; 5],
    total: u64,
    peak: u64,
    peak_breakdown: [u64; 5],
}

impl SpaceAccount {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, s: Structure, n: u64) {
        self.current[s.slot()] += n;
        self.total += n;
        if self.total > self.peak {
            self.peak = self.total;
            self.peak_breakdown = self.current;
        }
    }

    pub fn remove(&mut self, s: Structure, n: u64) {
        let slot = &mut self.current[s.slot()];
        assert!(
            *slot >= n,
            "space account underflow on {s:?}: {} - {n}",
            *slot
        );
        *slot -= n;
        self.total -= n;
    }

    /// Moves the tally of `s` from `old` to `new` instances.
    pub fn resize(&mut self, s: Structure, old: u64, new: u64) {
        if new >= old {
            self.add(s, new - old);
        } else {
            self.remove(s, old - new);
        }
    }

    pub fn current(&self) -> u64 {
        self.total
    }

    pub fn peak(&self) -> u64 {
        self.peak
    }

    /// Current per-structure counts.
    pub fn snapshot(&self) -> SpaceBreakdown {
        breakdown(&self.current)
    }

    /// Per-structure counts at the moment the peak was reached.
    pub fn peak_breakdown(&self) -> SpaceBreakdown {
        breakdown(&self.peak_breakdown)
    }
}

fn breakdown(c: &[u64; 5]) -> SpaceBreakdown {
    SpaceBreakdown {
        coverage: c[0],
        sketch: c[1],
        hash_coefficients: c[2],
        solution_indices: c[3],
        stored_sets: c[4],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_account_is_zero() {
        let acc = SpaceAccount::new();
        assert_eq!(acc.snapshot(), SpaceBreakdown::default());
        assert_eq!((acc.current(), acc.peak()), (0, 0));
    }

    #[test]
    fn tracks_current_and_peak() {
        let mut acc = SpaceAccount::new();
        acc.add(Structure::HashCoefficients, 2);
        acc.add(Structure::Coverage, 5);
        acc.add(Structure::SolutionIndices, 1);
        assert_eq!(acc.snapshot().coverage, 5);
        assert_eq!(acc.current(), 8);
        acc.remove(Structure::Coverage, 5);
        acc.resize(Structure::StoredSets, 0, 3);
        assert_eq!(acc.current(), 6);
        assert_eq!(acc.peak(), 8);
        assert_eq!(acc.peak_breakdown().coverage, 5);
        assert_eq!(acc.peak_breakdown().total(), 8);
        for s in Structure::ALL {
            assert!(acc.snapshot().get(s) <= acc.peak());
        }
    }

    #[test]
    #[should_panic(expected = "underflow")]
    fn underflow_panics() {
        let mut acc = SpaceAccount::new();
        acc.remove(Structure::Sketch, 1);
    }
}
