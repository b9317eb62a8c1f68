//! Distinct-count estimation with k-minimum-values sketches.
//!
//! Each [`Kmv`] keeps the `t` smallest distinct hash values seen under a
//! pairwise-independent polynomial hash into the full 61-bit field. An
//! [`F0Sketch`] takes the median over several independent KMV instances
//! when a failure probability below 1/8 is requested.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hashing::{sample_hash, PolyHash, MERSENNE_61};

/// KMV capacity constant: `t = ⌈C_KMV / ε²⌉`.
pub const C_KMV: f64 = 3.0;

pub fn kmv_capacity(eps: f64) -> usize {
    (C_KMV / (eps * eps)).ceil() as usize
}

/// Number of median-combined instances for failure probability `delta`.
pub fn instances_for_delta(delta: f64) -> usize {
    if delta < 0.125 {
        (1.0 / delta).log2().ceil() as usize
    } else {
        1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kmv {
    capacity: usize,
    hash: PolyHash,
    retained: BTreeSet<u64>,
}

impl Kmv {
    pub fn new(capacity: usize, seed: u64) -> Result<Self> {
        if capacity < 2 {
            return Err(Error::InvalidParameter("KMV capacity must be >= 2".into()));
        }
        let hash = sample_hash(2, MERSENNE_61, seed, 0)?;
        Ok(Self::with_hash(capacity, hash))
    }

    pub fn with_hash(capacity: usize, hash: PolyHash) -> Self {
        Kmv {
            capacity,
            hash,
            retained: BTreeSet::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn retained(&self) -> &BTreeSet<u64> {
        &self.retained
    }

    pub fn insert(&mut self, x: u64) {
        let key = if x >= self.hash.prime() {
            x % self.hash.prime()
        } else {
            x
        };
        self.insert_hash(self.hash.eval(key));
    }

    /// Inserts an already-hashed value.
    pub fn insert_hash(&mut self, h: u64) {
        if self.retained.len() < self.capacity {
            self.retained.insert(h);
            return;
        }
        let &max = self.retained.last().expect("full sketch is non-empty");
        if h < max && self.retained.insert(h) {
            self.retained.pop_last();
        }
    }

    pub fn estimate(&self) -> f64 {
        if self.retained.len() < self.capacity {
            return self.retained.len() as f64;
        }
        let kth = (*self.retained.last().expect("full sketch")).max(1);
        (self.capacity as f64 - 1.0) * self.hash.range() as f64 / kth as f64
    }

    pub fn merge(&self, other: &Kmv) -> Result<Kmv> {
        if self.capacity != other.capacity {
            return Err(Error::SketchMismatch("capacities differ"));
        }
        if self.hash != other.hash {
            return Err(Error::SketchMismatch("hash functions differ"));
        }
        let retained = self
            .retained
            .union(&other.retained)
            .copied()
            .take(self.capacity)
            .collect();
        Ok(Kmv {
            capacity: self.capacity,
            hash: self.hash.clone(),
            retained,
        })
    }
}

/// An (ε, δ) distinct-count estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct F0Sketch {
    eps: f64,
    delta: f64,
    instances: Vec<Kmv>,
}

impl F0Sketch {
    pub fn new(eps: f64, delta: f64, seed: u64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sketch eps {eps} not in (0,1)"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sketch delta {delta} not in (0,1)"
            )));
        }
        let capacity = kmv_capacity(eps);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let instances = (0..instances_for_delta(delta))
            .map(|_| Kmv::new(capacity, rng.next_u64()))
            .collect::<Result<_>>()?;
        Ok(F0Sketch {
            eps,
            delta,
            instances,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn capacity(&self) -> usize {
        self.instances[0].capacity
    }

    pub fn instances(&self) -> &[Kmv] {
        &self.instances
    }

    /// Total number of retained hash values across instances.
    pub fn retained_len(&self) -> usize {
        self.instances.iter().map(|k| k.retained.len()).sum()
    }

    pub fn insert(&mut self, x: u64) {
        for kmv in &mut self.instances {
            kmv.insert(x);
        }
    }

    pub fn estimate(&self) -> f64 {
        let mut ests: Vec<f64> = self.instances.iter().map(Kmv::estimate).collect();
        ests.sort_by(f64::total_cmp);
        let mid = ests.len() / 2;
        if ests.len() % 2 == 1 {
            ests[mid]
        } else {
            (ests[mid - 1] + ests[mid]) / 2.0
        }
    }

    pub fn merge(&self, other: &F0Sketch) -> Result<F0Sketch> {
        if self.instances.len() != other.instances.len() {
            return Err(Error::SketchMismatch("instance counts differ"));
        }
        let instances = self
            .instances
            .iter()
            .zip(&other.instances)
            .map(|(a, b)| a.merge(b))
            .collect::<Result<_>>()?;
        Ok(F0Sketch {
            eps: self.eps,
            delta: self.delta,
            instances,
        })
    }
}
