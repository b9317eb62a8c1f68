//! Re-iterable set streams.
//!
//! A [`SetStream`] replays the same sequence of sets on every pass, whether
//! it is backed by a FIMI text file, a seeded synthetic generator, or an
//! in-memory family. Each call to [`SetStream::pass`] is one streaming pass
//! and is tallied, so algorithms can be audited for the number of passes
//! they consume.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One set of the stream, normalized to sorted distinct element ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetRecord {
    pub index: usize,
    pub elements: Vec<u64>,
}

impl SetRecord {
    pub fn new(index: usize, mut elements: Vec<u64>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        SetRecord { index, elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamStats {
    /// Number of sets.
    pub m: usize,
    /// Size of the largest set.
    pub max_set_size: usize,
    /// Sum of all set sizes.
    pub total_elements: u64,
    /// Largest element id plus one (0 when every set is empty).
    pub observed_universe_bound: u64,
}

impl StreamStats {
    pub fn avg_set_size(&self) -> f64 {
        if self.m == 0 {
            0.0
        } else {
            self.total_elements as f64 / self.m as f64
        }
    }
}

impl fmt::Display for StreamStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "m={} max_set_size={} total_elements={} avg_set_size={:.2} universe_bound={}",
            self.m,
            self.max_set_size,
            self.total_elements,
            self.avg_set_size(),
            self.observed_universe_bound
        )
    }
}

/// Distribution of set sizes for synthetic streams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SizeDist {
    /// Sizes uniform in `min..=max`.
    Uniform { min: usize, max: usize },
    /// Sizes Zipf-distributed over `1..=max` with the given exponent.
    Zipf { exponent: f64, max: usize },
}

impl fmt::Display for SizeDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeDist::Uniform { min, max } => write!(f, "uniform:{min}:{max}"),
            SizeDist::Zipf { exponent, max } => write!(f, "zipf:{exponent}:{max}"),
        }
    }
}

impl FromStr for SizeDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSynthetic(format!("size distribution {s:?}"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["uniform", a, b] => Ok(SizeDist::Uniform {
                min: a.parse().map_err(|_| bad())?,
                max: b.parse().map_err(|_| bad())?,
            }),
            ["zipf", s, max] => Ok(SizeDist::Zipf {
                exponent: s.parse().map_err(|_| bad())?,
                max: max.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

/// Parameters of a seeded synthetic stream. Element ids are drawn uniformly
/// without replacement from `[0, n)` within each set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: u64,
    pub m: usize,
    pub size_dist: SizeDist,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSynthetic(msg.to_string()));
        if self.n == 0 {
            return bad("n must be at least 1");
        }
        if self.m == 0 {
            return bad("m must be at least 1");
        }
        match self.size_dist {
            SizeDist::Uniform { min, max } => {
                if min == 0 || min > max {
                    return bad("uniform sizes need 1 <= min <= max");
                }
                if min as u64 > self.n {
                    return bad("uniform min size exceeds the universe size");
                }
            }
            SizeDist::Zipf { exponent, max } => {
                if !(exponent > 0.0 && exponent.is_finite()) {
                    return bad("zipf exponent must be positive");
                }
                if max == 0 {
                    return bad("zipf max size must be at least 1");
                }
            }
        }
        Ok(())
    }

    /// Reads a spec from a small key=value file (`#` starts a comment).
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }
}

impl fmt::Display for SynthSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={},m={},size={},seed={}",
            self.n, self.m, self.size_dist, self.seed
        )
    }
}

/// Parses `key=value` pairs separated by commas or newlines. Keys: `n`, `m`,
/// `size` (`uniform:A:B` or `zipf:S:MAX`), `seed` (default 0).
impl FromStr for SynthSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut n = None;
        let mut m = None;
        let mut size_dist = None;
        let mut seed = 0u64;
        for item in s
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(|l| l.split(','))
            .map(str::trim)
            .filter(|l| !l.is_empty())
        {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                Error::InvalidSynthetic(format!("expected key=value, got {item:?}"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let num_err = || Error::InvalidSynthetic(format!("bad value for {key}: {value:?}"));
            match key {
                "n" => n = Some(value.parse().map_err(|_| num_err())?),
                "m" => m = Some(value.parse().map_err(|_| num_err())?),
                "size" => size_dist = Some(value.parse()?),
                "seed" => seed = value.parse().map_err(|_| num_err())?,
                _ => return Err(Error::InvalidSynthetic(format!("unknown key {key:?}"))),
            }
        }
        let spec = SynthSpec {
            n: n.ok_or_else(|| Error::InvalidSynthetic("missing n".into()))?,
            m: m.ok_or_else(|| Error::InvalidSynthetic("missing m".into()))?,
            size_dist: size_dist.ok_or_else(|| Error::InvalidSynthetic("missing size".into()))?,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone)]
enum Source {
    Fimi(PathBuf),
    Synthetic(SynthSpec),
    Memory(Arc<[Vec<u64>]>),
}

/// A replayable stream of sets.
#[derive(Debug)]
pub struct SetStream {
    source: Source,
    declared_bound: Option<u64>,
    deadline: Option<Instant>,
    stats: OnceLock<StreamStats>,
    passes: AtomicU64,
}

/// Opens a FIMI file: one set per line, whitespace-separated unsigned ids.
pub fn open_fimi(path: impl AsRef<Path>) -> Result<SetStream> {
    let path = path.as_ref();
    File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(SetStream::new(Source::Fimi(path.to_path_buf())))
}

pub fn generate_synthetic(spec: SynthSpec) -> Result<SetStream> {
    spec.validate()?;
    Ok(SetStream::new(Source::Synthetic(spec)))
}

impl SetStream {
    fn new(source: Source) -> Self {
        SetStream {
            source,
            declared_bound: None,
            deadline: None,
            stats: OnceLock::new(),
            passes: AtomicU64::new(0),
        }
    }

    /// An in-memory stream; each set is deduplicated.
    pub fn from_sets<I, S>(sets: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = u64>,
    {
        let sets: Vec<Vec<u64>> = sets
            .into_iter()
            .enumerate()
            .map(|(i, s)| SetRecord::new(i, s.into_iter().collect()).elements)
            .collect();
        SetStream::new(Source::Memory(sets.into()))
    }

    /// Parses a dataset descriptor: `synth:<spec>`, `synth:@<file>`, or a
    /// FIMI file path.
    pub fn open(descriptor: &str) -> Result<Self> {
        match descriptor.strip_prefix("synth:") {
            Some(rest) => {
                let spec = match rest.strip_prefix('@') {
                    Some(path) => SynthSpec::from_file(Path::new(path))?,
                    None => rest.parse()?,
                };
                generate_synthetic(spec)
            }
            None => open_fimi(descriptor),
        }
    }

    /// Declares a universe bound; ids at or above it are rejected during
    /// iteration and the bound replaces the observed one for guess ladders.
    pub fn with_universe_bound(mut self, bound: u64) -> Self {
        self.declared_bound = Some(bound);
        self
    }

    /// Every pass started after `deadline` fails with [`Error::TimedOut`]
    /// at its next record.
    pub fn with_deadline(mut self, deadline: Instant) -> Self {
        self.deadline = Some(deadline);
        self
    }

    /// A fresh handle on the same source, sharing cached stats but with its
    /// own pass tally and no deadline.
    pub fn reopen(&self) -> Self {
        SetStream {
            source: self.source.clone(),
            declared_bound: self.declared_bound,
            deadline: None,
            stats: self.stats.clone(),
            passes: AtomicU64::new(0),
        }
    }

    /// Reads the whole stream into memory. Costs one pass on `self`.
    pub fn materialize(&self) -> Result<Self> {
        let sets = self
            .pass()?
            .map(|r| r.map(|rec| rec.elements))
            .collect::<Result<Vec<_>>>()?;
        let mut out = SetStream::new(Source::Memory(sets.into()));
        out.declared_bound = self.declared_bound;
        Ok(out)
    }

    /// Short human-readable name for reports.
    pub fn label(&self) -> String {
        match &self.source {
            Source::Fimi(p) => p
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
            Source::Synthetic(spec) => format!("synth:{spec}"),
            Source::Memory(sets) => format!("memory:{}", sets.len()),
        }
    }

    /// Number of passes started on this handle.
    pub fn passes_started(&self) -> u64 {
        self.passes.load(Ordering::Relaxed)
    }

    pub fn declared_universe_bound(&self) -> Option<u64> {
        self.declared_bound
    }

    /// Universe bound used for hashing and guess ladders: the declared
    /// bound if any, else the observed one.
    pub fn universe_bound(&self, stats: &StreamStats) -> u64 {
        self.declared_bound.unwrap_or(stats.observed_universe_bound)
    }

    /// Starts a new pass.
    pub fn pass(&self) -> Result<Pass<'_>> {
        self.passes.fetch_add(1, Ordering::Relaxed);
        let inner = match &self.source {
            Source::Fimi(path) => {
                let file = File::open(path).map_err(|e| Error::io(path, e))?;
                PassInner::Fimi {
                    path,
                    reader: BufReader::with_capacity(1 << 16, file),
                    line: String::new(),
                    line_no: 0,
                    index: 0,
                }
            }
            Source::Synthetic(spec) => PassInner::Synthetic {
                spec,
                rng: ChaCha8Rng::seed_from_u64(spec.seed),
                index: 0,
            },
            Source::Memory(sets) => PassInner::Memory { sets, index: 0 },
        };
        Ok(Pass {
            inner,
            bound: self.declared_bound,
            deadline: self.deadline,
            done: false,
        })
    }

    /// Runs a full pass computing exact statistics and caches them.
    pub fn stats_pass(&self) -> Result<StreamStats> {
        let mut stats = StreamStats {
            m: 0,
            max_set_size: 0,
            total_elements: 0,
            observed_universe_bound: 0,
        };
        for rec in self.pass()? {
            let rec = rec?;
            stats.m += 1;
            stats.max_set_size = stats.max_set_size.max(rec.len());
            stats.total_elements += rec.len() as u64;
            if let Some(&last) = rec.elements.last() {
                stats.observed_universe_bound = stats.observed_universe_bound.max(last + 1);
            }
        }
        if stats.m == 0 {
            return Err(Error::EmptyStream);
        }
        let _ = self.stats.set(stats);
        Ok(stats)
    }

    pub fn cached_stats(&self) -> Option<StreamStats> {
        self.stats.get().copied()
    }

    /// Cached statistics, running the stats pass if needed.
    pub fn stats(&self) -> Result<StreamStats> {
        match self.cached_stats() {
            Some(s) => Ok(s),
            None => self.stats_pass(),
        }
    }

    /// Writes the stream in FIMI format. Empty sets cannot be represented and
    /// are rejected.
    pub fn write_fimi(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for rec in self.pass()? {
            let rec = rec?;
            if rec.is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "set {} is empty and has no FIMI representation",
                    rec.index
                )));
            }
            let line = rec
                .elements
                .iter()
                .map(u64::to_string)
                .collect::<Vec<_>>()
                .join(" ");
            writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

/// One pass over a [`SetStream`].
pub struct Pass<'a> {
    inner: PassInner<'a>,
    bound: Option<u64>,
    deadline: Option<Instant>,
    done: bool,
}

#[allow(clippy::large_enum_variant)]
enum PassInner<'a> {
    Fimi {
        path: &'a Path,
        reader: BufReader<File>,
        line: String,
        line_no: usize,
        index: usize,
    },
    Synthetic {
        spec: &'a SynthSpec,
        rng: ChaCha8Rng,
        index: usize,
    },
    Memory {
        sets: &'a [Vec<u64>],
        index: usize,
    },
}

fn parse_fimi_line(text: &str, line_no: usize) -> Result<Vec<u64>> {
    text.split_ascii_whitespace()
        .map(|tok| {
            tok.parse::<u64>().map_err(|_| {
                if !tok.is_empty() && tok.bytes().all(|b| b.is_ascii_digit()) {
                    Error::Overflow {
                        line: line_no,
                        token: tok.to_string(),
                    }
                } else {
                    Error::Parse {
                        line: line_no,
                        token: tok.to_string(),
                    }
                }
            })
        })
        .collect()
}

fn synth_set(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let size = match spec.size_dist {
        SizeDist::Uniform { min, max } => rng.random_range(min..=max),
        SizeDist::Zipf { exponent, max } => {
            // validated: max >= 1, exponent > 0
            let zipf = Zipf::new(max as f64, exponent).expect("validated zipf parameters");
            zipf.sample(rng) as usize
        }
    };
    let size = size.min(usize::try_from(spec.n).unwrap_or(usize::MAX));
    let n = usize::try_from(spec.n).unwrap_or(usize::MAX);
    let mut elements: Vec<u64> = rand::seq::index::sample(rng, n, size)
        .into_iter()
        .map(|i| i as u64)
        .collect();
    elements.sort_unstable();
    elements
}

impl Pass<'_> {
    fn next_raw(&mut self) -> Option<Result<(usize, Vec<u64>, usize)>> {
        match &mut self.inner {
            PassInner::Fimi {
                path,
                reader,
                line,
                line_no,
                index,
            } => loop {
                line.clear();
                match reader.read_line(line) {
                    Ok(0) => return None,
                    Ok(_) => {
                        *line_no += 1;
                        if line.trim().is_empty() {
                            continue;
                        }
                        let parsed = parse_fimi_line(line, *line_no);
                        let i = *index;
                        *index += 1;
                        return Some(parsed.map(|els| (i, els, *line_no)));
                    }
                    Err(e) => return Some(Err(Error::io(*path, e))),
                }
            },
            PassInner::Synthetic { spec, rng, index } => {
                if *index >= spec.m {
                    return None;
                }
                let i = *index;
                *index += 1;
                Some(Ok((i, synth_set(spec, rng), i + 1)))
            }
            PassInner::Memory { sets, index } => {
                let set = sets.get(*index)?;
                let i = *index;
                *index += 1;
                Some(Ok((i, set.clone(), i + 1)))
            }
        }
    }
}

impl Iterator for Pass<'_> {
    type Item = Result<SetRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if let Some(deadline) = self.deadline {
            if Instant::now() >= deadline {
                self.done = true;
                return Some(Err(Error::TimedOut));
            }
        }
        let item = match self.next_raw()? {
            Ok((index, elements, line)) => {
                let rec = SetRecord::new(index, elements);
                match (self.bound, rec.elements.last()) {
                    (Some(bound), Some(&id)) if id >= bound => {
                        Err(Error::OutOfUniverse { line, id, bound })
                    }
                    _ => Ok(rec),
                }
            }
            Err(e) => Err(e),
        };
        if item.is_err() {
            self.done = true;
        }
        Some(item)
    }
}
