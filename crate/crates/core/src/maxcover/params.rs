use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::setstream::StreamStats;

/// How the per-guess subsampling hash is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaMode {
    /// γ = 2.
    Pairwise,
    /// γ = ⌊(c/3)·k·ln m⌋.
    Reduced,
    /// γ = ⌈2λ⌉.
    Original,
    /// No subsampling at all.
    Full,
}

impl GammaMode {
    pub const ALL: [GammaMode; 4] = [
        GammaMode::Pairwise,
        GammaMode::Reduced,
        GammaMode::Original,
        GammaMode::Full,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GammaMode::Pairwise => "pairwise",
            GammaMode::Reduced => "reduced",
            GammaMode::Original => "original",
            GammaMode::Full => "full",
        }
    }
}

impl fmt::Display for GammaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GammaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GammaMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown gamma mode {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MachParams {
    pub k: usize,
    pub eps: f64,
    /// Constant in λ = c·ε⁻²·k·ln m.
    pub c: f64,
    pub gamma_mode: GammaMode,
    pub seed: u64,
    /// Select the final guess by F₀ sketch estimates instead of FindGuess.
    pub use_f0_selection: bool,
    /// Failure probability of the per-guess F₀ sketches.
    pub f0_delta: f64,
}

impl MachParams {
    pub fn new(k: usize, eps: f64) -> Self {
        MachParams {
            k,
            eps,
            c: 1.0,
            gamma_mode: GammaMode::Pairwise,
            seed: 0,
            use_f0_selection: false,
            f0_delta: 0.05,
        }
    }

    pub fn gamma_mode(mut self, mode: GammaMode) -> Self {
        self.gamma_mode = mode;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn f0_selection(mut self, on: bool) -> Self {
        self.use_f0_selection = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps {} not in (0,1)",
                self.eps
            )));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "c {} must be positive",
                self.c
            )));
        }
        if !(self.f0_delta > 0.0 && self.f0_delta < 1.0) {
            return Err(Error::InvalidParameter("f0_delta not in (0,1)".into()));
        }
        Ok(())
    }
}

/// Quantities computed from the parameters and the stream statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedParams {
    /// Space budget λ = c·ε⁻²·k·ln m.
    pub lambda: f64,
    /// Hash independence; `None` under full sampling.
    pub gamma: Option<usize>,
    /// Number of thresholding passes, 1 + ⌈log_{1+ε}(4e)⌉.
    pub num_passes: usize,
    /// Initial threshold 2(1+ε)λ/k.
    pub r0: f64,
    /// Guess ladder, increasing.
    pub guesses: Vec<u64>,
}

/// Natural log of m, floored at 1 so that λ stays positive for m ≤ 2.
pub fn log_m(m: usize) -> f64 {
    (m as f64).ln().max(1.0)
}

pub fn lambda(k: usize, eps: f64, c: f64, m: usize) -> f64 {
    c * k as f64 * log_m(m) / (eps * eps)
}

pub fn num_passes(eps: f64) -> usize {
    1 + ((4.0 * E).ln() / (1.0 + eps).ln()).ceil() as usize
}

/// ⌊(c/3)·k·ln m⌋, clamped to at least 2.
pub fn reduced_gamma(k: usize, c: f64, m: usize) -> usize {
    ((c / 3.0 * k as f64 * log_m(m)).floor() as usize).max(2)
}

pub fn original_gamma(lambda: f64) -> usize {
    (2.0 * lambda).ceil() as usize
}

/// Guesses `2^{g−1}·max_set_size` for g ≥ 1 that do not exceed
/// `min(n_bound, k·max_set_size)`.
pub fn guess_ladder(max_set_size: usize, k: usize, n_bound: u64) -> Vec<u64> {
    let base = max_set_size as u64;
    if base == 0 {
        return Vec::new();
    }
    let cap = n_bound.min(base.saturating_mul(k as u64));
    std::iter::successors(Some(base), |v| v.checked_mul(2))
        .take_while(|&v| v <= cap)
        .collect()
}

/// Approximation slack δ(ε) = ε(3 − 1/e − ε).
pub fn delta_eps(eps: f64) -> f64 {
    eps * (3.0 - 1.0 / E - eps)
}

pub fn derive_params(
    params: &MachParams,
    stats: &StreamStats,
    n_bound: u64,
) -> Result<DerivedParams> {
    params.validate()?;
    let lambda = lambda(params.k, params.eps, params.c, stats.m);
    let gamma = match params.gamma_mode {
        GammaMode::Pairwise => Some(2),
        GammaMode::Reduced => Some(reduced_gamma(params.k, params.c, stats.m)),
        GammaMode::Original => Some(original_gamma(lambda)),
        GammaMode::Full => None,
    };
    let guesses = guess_ladder(stats.max_set_size, params.k, n_bound);
    if guesses.is_empty() {
        return Err(Error::EmptyGuessLadder);
    }
    Ok(DerivedParams {
        lambda,
        gamma,
        num_passes: num_passes(params.eps),
        r0: 2.0 * (1.0 + params.eps) * lambda / params.k as f64,
        guesses,
    })
}
