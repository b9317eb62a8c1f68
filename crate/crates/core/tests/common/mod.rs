#![allow(dead_code)]

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small random instance with a brute-forced optimum.
#[derive(Debug, Clone)]
pub struct Instance {
    pub sets: Vec<Vec<u64>>,
    pub k: usize,
    pub opt: u64,
}

/// Union size of the chosen sets.
pub fn union_size(sets: &[Vec<u64>], chosen: &[usize]) -> u64 {
    chosen
        .iter()
        .flat_map(|&i| &sets[i])
        .collect::<std::collections::BTreeSet<_>>()
        .len() as u64
}

/// Exhaustive search over every `min(k, m)`-subset. Elements must be < 128.
pub fn brute_force_opt(sets: &[Vec<u64>], k: usize) -> u64 {
    let masks: Vec<u128> = sets
        .iter()
        .map(|s| s.iter().fold(0u128, |m, &x| m | (1u128 << x)))
        .collect();
    fn go(masks: &[u128], from: usize, left: usize, acc: u128) -> u32 {
        if left == 0 || from == masks.len() {
            return acc.count_ones();
        }
        let mut best = acc.count_ones();
        for i in from..masks.len() {
            best = best.max(go(masks, i + 1, left - 1, acc | masks[i]));
        }
        best
    }
    go(&masks, 0, k.min(sets.len()), 0) as u64
}

/// `count` instances with m ≤ `max_m`, n ≤ 30 and k ≤ 4. Set sizes are
/// uniform in `[1, n/3]`.
pub fn instance_family(count: usize, max_m: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = rng.random_range(4..=max_m);
            let n = rng.random_range(10..=30u64);
            let k = rng.random_range(1..=4usize);
            let sets: Vec<Vec<u64>> = (0..m)
                .map(|_| {
                    let size = rng.random_range(1..=n / 3) as usize;
                    let mut s: Vec<u64> = rand::seq::index::sample(&mut rng, n as usize, size)
                        .into_iter()
                        .map(|x| x as u64)
                        .collect();
                    s.sort_unstable();
                    s
                })
                .collect();
            let opt = brute_force_opt(&sets, k);
            Instance { sets, k, opt }
        })
        .collect()
}
