//! Polynomial hash families over a prime field and the subsampling
//! predicate built on them.
//!
//! A [`PolyHash`] with `γ` coefficients is `γ`-wise independent:
//! `x ↦ (Σ aᵢ xⁱ mod P) mod v`. Evaluation is Horner's rule, so it costs
//! exactly `γ − 1` field multiplications; [`OpCounter`] tallies them.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// 2⁶¹ − 1.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

#[inline]
fn mul_mod_mersenne(a: u64, b: u64) -> u64 {
    let prod = a as u128 * b as u128;
    let lo = (prod as u64) & MERSENNE_61;
    let hi = (prod >> 61) as u64;
    let s = lo + hi;
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

#[inline]
fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Tally of hash work: evaluations and field multiplications.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OpCounter {
    pub evals: u64,
    pub mulmods: u64,
}

impl OpCounter {
    pub fn merge(&mut self, other: &OpCounter) {
        self.evals += other.evals;
        self.mulmods += other.mulmods;
    }
}

/// A member of the polynomial hash family `H_{γ,v}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyHash {
    coeffs: Vec<u64>,
    prime: u64,
    range: u64,
}

impl PolyHash {
    /// Builds a hash from explicit coefficients `a₀, …, a_{γ−1}`.
    pub fn from_coeffs(coeffs: Vec<u64>, prime: u64, range: u64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "hash independence must be >= 1".into(),
            ));
        }
        if range == 0 {
            return Err(Error::InvalidParameter("hash range must be >= 1".into()));
        }
        if !is_prime(prime) || prime > MERSENNE_61 {
            return Err(Error::InvalidParameter(format!(
                "field modulus {prime} must be a prime no larger than 2^61-1"
            )));
        }
        if let Some(&bad) = coeffs.iter().find(|&&a| a >= prime) {
            return Err(Error::InvalidParameter(format!(
                "coefficient {bad} is not below the prime {prime}"
            )));
        }
        Ok(PolyHash {
            coeffs,
            prime,
            range,
        })
    }

    pub fn independence(&self) -> usize {
        self.coeffs.len()
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn range(&self) -> u64 {
        self.range
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// The polynomial value in the field, before reduction into the range.
    #[inline]
    pub fn eval_field(&self, x: u64) -> u64 {
        debug_assert!(x < self.prime, "key {x} outside the field");
        let (&top, rest) = self.coeffs.split_last().expect("non-empty coefficients");
        let p = self.prime;
        if p == MERSENNE_61 {
            rest.iter()
                .rev()
                .fold(top, |acc, &a| add_mod(mul_mod_mersenne(acc, x), a, p))
        } else {
            rest.iter()
                .rev()
                .fold(top, |acc, &a| add_mod(mul_mod(acc, x, p), a, p))
        }
    }

    /// Hash value in `[0, range)`.
    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        self.eval_field(x) % self.range
    }

    /// Like [`eval`](Self::eval), charging `γ − 1` multiplications to `ops`.
    #[inline]
    pub fn eval_counted(&self, x: u64, ops: &mut OpCounter) -> u64 {
        ops.evals += 1;
        ops.mulmods += self.coeffs.len() as u64 - 1;
        self.eval(x)
    }
}

/// Draws a hash from `H_{γ,v}` over the default field `2⁶¹ − 1`.
pub fn sample_hash(gamma: usize, range: u64, seed: u64, universe_bound: u64) -> Result<PolyHash> {
    sample_hash_with_prime(gamma, range, seed, universe_bound, MERSENNE_61)
}

/// Draws a hash with coefficients uniform in `[0, prime)`.
pub fn sample_hash_with_prime(
    gamma: usize,
    range: u64,
    seed: u64,
    universe_bound: u64,
    prime: u64,
) -> Result<PolyHash> {
    if gamma == 0 {
        return Err(Error::InvalidParameter(
            "hash independence must be >= 1".into(),
        ));
    }
    if universe_bound >= prime {
        return Err(Error::UniverseTooLarge {
            bound: universe_bound,
            prime,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..gamma).map(|_| rng.random_range(0..prime)).collect();
    PolyHash::from_coeffs(coeffs, prime, range)
}

/// The subsampling predicate `h(x) = [f(x) < λ]`, or the degenerate
/// full sampler that keeps every element without hashing.
#[derive(Debug, Clone)]
pub struct Subsampler {
    hash: Option<PolyHash>,
    threshold: u64,
}

impl Subsampler {
    /// Keeps `x` iff `hash(x) < min(v, ⌈λ⌉)`.
    pub fn new(hash: PolyHash, lambda: f64) -> Self {
        let threshold = if lambda <= 0.0 {
            0
        } else if lambda >= hash.range() as f64 {
            hash.range()
        } else {
            (lambda.ceil() as u64).min(hash.range())
        };
        Subsampler {
            hash: Some(hash),
            threshold,
        }
    }

    /// Samples everything; no hash is stored or evaluated.
    pub fn full() -> Self {
        Subsampler {
            hash: None,
            threshold: 1,
        }
    }

    pub fn hash(&self) -> Option<&PolyHash> {
        self.hash.as_ref()
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    /// Sampling probability `λ_int / v` (1 for the full sampler).
    pub fn sample_prob(&self) -> f64 {
        match &self.hash {
            Some(h) => self.threshold as f64 / h.range() as f64,
            None => 1.0,
        }
    }

    /// Number of stored hash coefficients.
    pub fn stored_coeffs(&self) -> usize {
        self.hash.as_ref().map_or(0, PolyHash::independence)
    }

    #[inline]
    pub fn is_sampled(&self, x: u64, ops: &mut OpCounter) -> bool {
        match &self.hash {
            Some(h) => h.eval_counted(x, ops) < self.threshold,
            None => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mersenne_reduction_matches_generic() {
        let vals = [0, 1, 2, 12345, MERSENNE_61 - 1, MERSENNE_61 / 3, 1 << 60];
        for &a in &vals {
            for &b in &vals {
                assert_eq!(
                    mul_mod_mersenne(a, b),
                    mul_mod(a, b, MERSENNE_61),
                    "{a} * {b}"
                );
            }
        }
    }

    #[test]
    fn primality() {
        let primes = [2, 3, 5, 11, 13, 97, 7919, MERSENNE_61, 1_000_000_007];
        let composites = [0, 1, 4, 9, 91, 561, 7917, (1 << 61) + 1, 3_215_031_751];
        assert!(primes.iter().all(|&p| is_prime(p)));
        assert!(composites.iter().all(|&c| !is_prime(c)));
    }

    #[test]
    fn constant_polynomial() {
        let h = PolyHash::from_coeffs(vec![3], MERSENNE_61, 4).unwrap();
        for x in [0, 1, 17, 1 << 40] {
            assert_eq!(h.eval(x), 3);
        }
        let h = PolyHash::from_coeffs(vec![5], 11, 3).unwrap();
        assert_eq!(h.eval(7), 2);
    }

    #[test]
    fn hand_evaluated_polynomials() {
        // (2 + 3*4) mod 11 mod 5 = 3
        let h = PolyHash::from_coeffs(vec![2, 3], 11, 5).unwrap();
        assert_eq!(h.eval(4), 3);
        // (1 + 3 + 9) mod 13 = 0
        let h = PolyHash::from_coeffs(vec![1, 1, 1], 13, 13).unwrap();
        assert_eq!(h.eval(3), 0);
    }

    #[test]
    fn mersenne_path_matches_naive_sum() {
        let h = sample_hash(7, 1000, 42, 1 << 40).unwrap();
        for x in [0u64, 1, 2, 999, 1 << 39] {
            let mut acc: u128 = 0;
            let mut pow: u128 = 1;
            for &a in h.coeffs() {
                acc = (acc + a as u128 * pow) % MERSENNE_61 as u128;
                pow = pow * x as u128 % MERSENNE_61 as u128;
            }
            assert_eq!(h.eval(x), (acc % 1000) as u64);
        }
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let a = sample_hash(5, 64, 9, 100).unwrap();
        let b = sample_hash(5, 64, 9, 100).unwrap();
        let c = sample_hash(5, 64, 10, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.coeffs().iter().all(|&x| x < MERSENNE_61));
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            sample_hash_with_prime(2, 5, 0, 11, 11),
            Err(Error::UniverseTooLarge {
                bound: 11,
                prime: 11
            })
        ));
        assert!(sample_hash(0, 5, 0, 10).is_err());
        assert!(sample_hash(2, 0, 0, 10).is_err());
        assert!(PolyHash::from_coeffs(vec![1, 2], 12, 5).is_err());
        assert!(PolyHash::from_coeffs(vec![11], 11, 5).is_err());
    }

    #[test]
    fn counter_charges_gamma_minus_one() {
        let mut ops = OpCounter::default();
        let h = sample_hash(6, 64, 1, 1000).unwrap();
        for x in 0..250 {
            h.eval_counted(x, &mut ops);
        }
        assert_eq!(
            ops,
            OpCounter {
                evals: 250,
                mulmods: 250 * 5
            }
        );
    }

    #[test]
    fn subsampler_extremes() {
        let mut ops = OpCounter::default();
        let h = sample_hash(2, 100, 3, 10_000).unwrap();
        let all = Subsampler::new(h.clone(), 500.0);
        assert_eq!(all.threshold(), 100);
        assert_eq!(all.sample_prob(), 1.0);
        let none = Subsampler::new(h.clone(), 0.0);
        assert_eq!(none.threshold(), 0);
        for x in 0..1000 {
            assert!(all.is_sampled(x, &mut ops));
            assert!(!none.is_sampled(x, &mut ops));
        }
        let quarter = Subsampler::new(h, 24.2);
        assert_eq!(quarter.threshold(), 25);
        assert_eq!(quarter.sample_prob(), 0.25);

        let full = Subsampler::full();
        let before = ops;
        assert!(full.is_sampled(123, &mut ops));
        assert_eq!(ops, before);
        assert_eq!(full.stored_coeffs(), 0);
    }
}
