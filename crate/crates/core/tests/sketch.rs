use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use streamcover::sketch::{F0Sketch, Kmv};
use streamcover::Error;

fn retained(sk: &F0Sketch) -> Vec<Vec<u64>> {
    sk.instances()
        .iter()
        .map(|i| i.retained().iter().copied().collect())
        .collect()
}

fn distinct_keys(rng: &mut ChaCha8Rng, count: usize) -> impl Iterator<Item = u64> {
    rand::seq::index::sample(rng, 1 << 44, count)
        .into_iter()
        .map(|x| x as u64)
}

fn failure_rate(eps: f64, f0: usize, trials: u64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for t in 0..trials {
        let mut sk = F0Sketch::new(eps, 0.05, seed ^ (t << 8)).unwrap();
        distinct_keys(&mut rng, f0).for_each(|x| sk.insert(x));
        if (sk.estimate() - f0 as f64).abs() > eps * f0 as f64 {
            failures += 1;
        }
    }
    failures as f64 / trials as f64
}

#[test]
fn contract_holds_at_quarter_eps() {
    let rate = failure_rate(0.25, 100_000, 200, 21);
    assert!(rate <= 0.05, "{rate}");
}

#[test]
fn contract_holds_on_consecutive_keys() {
    let mut failures = 0;
    for t in 0..200u64 {
        let mut sk = F0Sketch::new(0.125, 0.05, t).unwrap();
        let base = t * 1_000_000;
        (base..base + 100_000).for_each(|x| sk.insert(x));
        if (sk.estimate() - 1e5).abs() > 0.125 * 1e5 {
            failures += 1;
        }
    }
    assert!(failures <= 10, "{failures}/200");
}

#[test]
fn disjoint_merge_estimates_the_sum() {
    let eps = 0.125;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut good = 0;
    for t in 0..100 {
        let keys: Vec<u64> = distinct_keys(&mut rng, 20_000).collect();
        let mut a = F0Sketch::new(eps, 0.05, t).unwrap();
        let mut b = F0Sketch::new(eps, 0.05, t).unwrap();
        keys[..10_000].iter().for_each(|&x| a.insert(x));
        keys[10_000..].iter().for_each(|&x| b.insert(x));
        let est = a.merge(&b).unwrap().estimate();
        if (est - 2e4).abs() <= 2.0 * eps * 2e4 {
            good += 1;
        }
    }
    assert!(good >= 95, "{good}/100");
}

#[test]
fn merge_requires_matching_sketches() {
    let a = F0Sketch::new(0.125, 0.05, 1).unwrap();
    assert!(matches!(
        a.merge(&F0Sketch::new(0.125, 0.05, 2).unwrap()),
        Err(Error::SketchMismatch(_))
    ));
    assert!(matches!(
        a.merge(&F0Sketch::new(0.25, 0.05, 1).unwrap()),
        Err(Error::SketchMismatch(_))
    ));
    let k = Kmv::new(16, 3).unwrap();
    assert!(k.merge(&Kmv::new(32, 3).unwrap()).is_err());
}

proptest! {
    #[test]
    fn merge_is_commutative_and_matches_concatenation(
        left in prop::collection::vec(0u64..5_000, 0..600),
        right in prop::collection::vec(0u64..5_000, 0..600),
        seed in any::<u64>(),
    ) {
        let build = |ks: &[u64]| {
            let mut sk = F0Sketch::new(0.25, 0.01, seed).unwrap();
            ks.iter().for_each(|&x| sk.insert(x));
            sk
        };
        let (a, b) = (build(&left), build(&right));
        let ab = a.merge(&b).unwrap();
        prop_assert_eq!(retained(&ab), retained(&b.merge(&a).unwrap()));
        let both: Vec<u64> = left.iter().chain(&right).copied().collect();
        prop_assert_eq!(retained(&ab), retained(&build(&both)));
        prop_assert_eq!(retained(&a.merge(&build(&[])).unwrap()), retained(&a));
    }

    #[test]
    fn insertion_order_does_not_matter(
        keys in prop::collection::vec(0u64..3_000, 0..800),
        seed in any::<u64>(),
        shuffle_seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let mut shuffled = keys.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));
        let mut a = F0Sketch::new(0.125, 0.05, seed).unwrap();
        let mut b = F0Sketch::new(0.125, 0.05, seed).unwrap();
        keys.iter().for_each(|&x| a.insert(x));
        shuffled.iter().for_each(|&x| b.insert(x));
        prop_assert_eq!(retained(&a), retained(&b));
    }

    #[test]
    fn exact_below_capacity(keys in prop::collection::btree_set(any::<u64>(), 0..190), seed in any::<u64>()) {
        // capacity at eps = 0.125 is 192
        let mut sk = F0Sketch::new(0.125, 0.05, seed).unwrap();
        keys.iter().for_each(|&x| sk.insert(x));
        prop_assert_eq!(sk.estimate(), keys.len() as f64);
    }
}
