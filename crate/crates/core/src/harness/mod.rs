//! Experiment grid runner and reporting.

mod experiment;
mod report;

use std::fmt;
use std::str::FromStr;

use crate::baselines::{run_2p, run_bmkk, run_sg};
use crate::error::{Error, Result};
use crate::maxcover::{run_greedy, run_mach, GammaMode, MachParams, RunResult};
use crate::setstream::SetStream;

pub use experiment::{run_experiment, ExperimentSpec};
pub use report::{emit_report, make_row, Flags, ReportRow, ReportWriter, CSV_COLUMNS};

/// An algorithm selectable by name in the CLI and in experiment grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Greedy,
    Sg,
    Bmkk,
    TwoPass,
    Mach {
        gamma: GammaMode,
        f0_selection: bool,
    },
}

impl Algorithm {
    pub fn gamma_mode(&self) -> Option<GammaMode> {
        match self {
            Algorithm::Mach { gamma, .. } => Some(*gamma),
            _ => None,
        }
    }

    pub fn is_mach(&self) -> bool {
        matches!(self, Algorithm::Mach { .. })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Greedy => f.write_str("greedy"),
            Algorithm::Sg => f.write_str("sg"),
            Algorithm::Bmkk => f.write_str("bmkk"),
            Algorithm::TwoPass => f.write_str("2p"),
            Algorithm::Mach {
                gamma,
                f0_selection,
            } => {
                write!(f, "mach-{gamma}")?;
                if *f0_selection {
                    f.write_str("-f0")?;
                }
                Ok(())
            }
        }
    }
}

/// Names: `greedy`, `sg`, `bmkk`, `2p`, `mach-<gamma>` and `mach-<gamma>-f0`.
impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownAlgorithm(s.to_string());
        Ok(match s {
            "greedy" => Algorithm::Greedy,
            "sg" => Algorithm::Sg,
            "bmkk" => Algorithm::Bmkk,
            "2p" => Algorithm::TwoPass,
            _ => {
                let rest = s.strip_prefix("mach-").ok_or_else(unknown)?;
                let (gamma, f0_selection) = match rest.strip_suffix("-f0") {
                    Some(g) => (g, true),
                    None => (rest, false),
                };
                Algorithm::Mach {
                    gamma: gamma.parse().map_err(|_| unknown())?,
                    f0_selection,
                }
            }
        })
    }
}

/// Runs one algorithm. `eps`, `c` and `seed` are ignored where unused.
pub fn run_algorithm(
    stream: &SetStream,
    algo: Algorithm,
    k: usize,
    eps: f64,
    c: f64,
    seed: u64,
) -> Result<RunResult> {
    match algo {
        Algorithm::Greedy => run_greedy(stream, k),
        Algorithm::Sg => run_sg(stream, k),
        Algorithm::Bmkk => run_bmkk(stream, k, eps),
        Algorithm::TwoPass => run_2p(stream, k, eps),
        Algorithm::Mach {
            gamma,
            f0_selection,
        } => {
            let params = MachParams::new(k, eps)
                .c(c)
                .gamma_mode(gamma)
                .seed(seed)
                .f0_selection(f0_selection);
            run_mach(stream, &params)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        let mut all = vec![
            Algorithm::Greedy,
            Algorithm::Sg,
            Algorithm::Bmkk,
            Algorithm::TwoPass,
        ];
        for gamma in GammaMode::ALL {
            for f0_selection in [false, true] {
                all.push(Algorithm::Mach {
                    gamma,
                    f0_selection,
                });
            }
        }
        for a in all {
            assert_eq!(a.to_string().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!(
            "mach-reduced-f0".parse::<Algorithm>().unwrap(),
            Algorithm::Mach {
                gamma: GammaMode::Reduced,
                f0_selection: true
            }
        );
        for bad in ["mach", "mach-", "mach-cubic", "op", "greedy-f0"] {
            assert!(
                matches!(bad.parse::<Algorithm>(), Err(Error::UnknownAlgorithm(_))),
                "{bad}"
            );
        }
    }
}
