//! Streaming maximum-k-coverage in sublinear space.
//!
//! The central algorithm runs multi-pass thresholding over a subsampled
//! universe, one instance per geometric guess of the optimum, with a
//! configurable independence for the subsampling hash. Greedy and three
//! linear-space streaming comparators are included, together with an
//! instrumented experiment harness.

pub mod baselines;
pub mod error;
pub mod harness;
pub mod hashing;
pub mod maxcover;
pub mod setstream;
pub mod sketch;
pub mod space;

pub use error::{Error, Result};
pub use maxcover::{run_greedy, run_mach, GammaMode, MachParams, RunResult};
pub use setstream::{SetRecord, SetStream, StreamStats};
