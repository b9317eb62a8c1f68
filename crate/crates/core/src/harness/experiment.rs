use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::harness::report::{json_path_for, make_row, ReportRow, ReportWriter};
use crate::harness::{run_algorithm, Algorithm};
use crate::maxcover::run_greedy;
use crate::setstream::SetStream;

fn default_c() -> f64 {
    1.0
}

fn default_reps() -> usize {
    1
}

/// A parameter grid over one dataset, read from TOML:
///
/// ```toml
/// dataset = "synth:n=100000,m=10000,size=zipf:1.1:200,seed=7"
/// algorithms = ["greedy", "mach-pairwise", "mach-reduced"]
/// k = [4, 16]
/// eps = [0.25, 0.125]
/// c = 1.0
/// repetitions = 5
/// seed_base = 0
/// output = "results.csv"
/// time_limit_secs = 600
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// FIMI path or `synth:` descriptor.
    pub dataset: String,
    #[serde(default)]
    pub universe_bound: Option<u64>,
    pub algorithms: Vec<String>,
    pub k: Vec<usize>,
    pub eps: Vec<f64>,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed_base: u64,
    /// CSV output; the JSON mirror goes next to it with a `.json` extension.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub time_limit_secs: Option<f64>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Checks the grid and resolves algorithm names.
    pub fn algorithms(&self) -> Result<Vec<Algorithm>> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.algorithms.is_empty() || self.k.is_empty() || self.eps.is_empty() {
            return Err(Error::Config(
                "algorithm, k and eps grids must be non-empty".into(),
            ));
        }
        if self.k.contains(&0) {
            return Err(Error::Config("k values must be at least 1".into()));
        }
        if let Some(e) = self.eps.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return Err(Error::Config(format!("eps {e} not in (0,1)")));
        }
        self.algorithms.iter().map(|a| a.parse()).collect()
    }

    fn time_limit(&self) -> Option<Duration> {
        self.time_limit_secs.map(Duration::from_secs_f64)
    }
}

fn handle(base: &SetStream, limit: Option<Duration>) -> SetStream {
    let h = base.reopen();
    match limit {
        Some(d) => h.with_deadline(Instant::now() + d),
        None => h,
    }
}

/// Runs every cell of the grid `repetitions` times (seed `seed_base + rep`).
/// Rows are appended to the CSV output as they complete; runs over the time
/// limit are recorded with the `timed_out` flag.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ReportRow>> {
    let algos = spec.algorithms()?;
    let mut base = SetStream::open(&spec.dataset)?;
    if let Some(b) = spec.universe_bound {
        base = base.with_universe_bound(b);
    }
    if spec.dataset.starts_with("synth:") {
        base = base.materialize()?;
    }
    base.stats()?;
    let limit = spec.time_limit();

    let mut writer = spec
        .output
        .as_deref()
        .map(ReportWriter::create)
        .transpose()?;

    let mut greedy: HashMap<usize, Option<u64>> = HashMap::new();
    for &k in &spec.k {
        if greedy.contains_key(&k) {
            continue;
        }
        let cov = match run_greedy(&handle(&base, limit), k) {
            Ok(r) => Some(r.coverage_exact),
            Err(Error::TimedOut) => None,
            Err(e) => return Err(e),
        };
        greedy.insert(k, cov);
    }

    let mut rows = Vec::new();
    for &algo in &algos {
        for &k in &spec.k {
            for &eps in &spec.eps {
                for rep in 0..spec.repetitions {
                    let seed = spec.seed_base + rep as u64;
                    let started = Instant::now();
                    let outcome = run_algorithm(&handle(&base, limit), algo, k, eps, spec.c, seed);
                    let result = match outcome {
                        Ok(r) => Some(r),
                        Err(Error::TimedOut) => None,
                        Err(e) => return Err(e),
                    };
                    let wall_ms = match &result {
                        Some(r) => r.wall_time.as_secs_f64() * 1e3,
                        None => started.elapsed().as_secs_f64() * 1e3,
                    };
                    let row = make_row(
                        &spec.dataset,
                        algo,
                        k,
                        eps,
                        spec.c,
                        seed,
                        result.as_ref(),
                        greedy[&k],
                        wall_ms,
                    );
                    if let Some(w) = writer.as_mut() {
                        w.append(&row)?;
                    }
                    rows.push(row);
                }
            }
        }
    }

    if let Some(out) = &spec.output {
        let json = json_path_for(out);
        let file = std::fs::File::create(&json).map_err(|e| Error::io(&json, e))?;
        serde_json::to_writer_pretty(file, &rows).map_err(|e| Error::Report(e.to_string()))?;
    }
    Ok(rows)
}
