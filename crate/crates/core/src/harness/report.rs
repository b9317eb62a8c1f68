use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::Algorithm;
use crate::maxcover::{delta_eps, RunResult};

/// CSV header, in output order.
pub const CSV_COLUMNS: [&str; 16] = [
    "dataset",
    "algo",
    "gamma_mode",
    "k",
    "eps",
    "c",
    "seed",
    "coverage",
    "coverage_rel_greedy",
    "passes",
    "peak_elements",
    "hash_mulmod",
    "wall_ms",
    "selected_guess",
    "solution_size",
    "flags",
];

/// One result line. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub algo: String,
    pub gamma_mode: Option<String>,
    pub k: usize,
    pub eps: f64,
    pub c: f64,
    pub seed: u64,
    pub coverage: Option<u64>,
    pub coverage_rel_greedy: Option<f64>,
    pub passes: Option<u64>,
    pub peak_elements: Option<u64>,
    pub hash_mulmod: Option<u64>,
    pub wall_ms: f64,
    pub selected_guess: Option<u64>,
    pub solution_size: Option<usize>,
    pub flags: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    pub no_qualifying_guess: bool,
    /// Fewer than k sets returned.
    pub short_solution: bool,
    /// MACH coverage relative to greedy fell under `1 − δ(ε)/(1−1/e)`.
    pub below_admissible: bool,
    pub timed_out: bool,
    /// Coverage was scored with an extra, unaccounted pass.
    pub eval_pass: bool,
}

impl Flags {
    pub fn render(&self) -> String {
        let mut out = Vec::new();
        if self.no_qualifying_guess {
            out.push("no_qualifying_guess");
        }
        if self.short_solution {
            out.push("short_solution");
        }
        if self.below_admissible {
            out.push("below_admissible");
        }
        if self.timed_out {
            out.push("timed_out");
        }
        if self.eval_pass {
            out.push("eval_pass=1");
        }
        out.join("|")
    }

    /// Inverse of [`render`](Self::render).
    pub fn parse(s: &str) -> Flags {
        let has = |f: &str| s.split('|').any(|x| x == f);
        Flags {
            no_qualifying_guess: has("no_qualifying_guess"),
            short_solution: has("short_solution"),
            below_admissible: has("below_admissible"),
            timed_out: has("timed_out"),
            eval_pass: has("eval_pass=1"),
        }
    }
}

/// Smallest coverage/greedy ratio that still certifies the `1−1/e−δ(ε)`
/// guarantee, given greedy's `1−1/e` guarantee.
pub fn admissible_ratio(eps: f64) -> f64 {
    1.0 - delta_eps(eps) / (1.0 - (-1.0f64).exp())
}

/// Builds a row; `result` is `None` for a run that timed out.
#[allow(clippy::too_many_arguments)]
pub fn make_row(
    dataset: &str,
    algo: Algorithm,
    k: usize,
    eps: f64,
    c: f64,
    seed: u64,
    result: Option<&RunResult>,
    greedy_coverage: Option<u64>,
    wall_ms: f64,
) -> ReportRow {
    let mut flags = Flags::default();
    let mut row = ReportRow {
        dataset: dataset.to_string(),
        algo: algo.to_string(),
        gamma_mode: algo.gamma_mode().map(|g| g.to_string()),
        k,
        eps,
        c,
        seed,
        coverage: None,
        coverage_rel_greedy: None,
        passes: None,
        peak_elements: None,
        hash_mulmod: None,
        wall_ms,
        selected_guess: None,
        solution_size: None,
        flags: String::new(),
    };
    match result {
        None => flags.timed_out = true,
        Some(r) => {
            let rel = greedy_coverage.map(|g| {
                if g == 0 {
                    1.0
                } else {
                    r.coverage_exact as f64 / g as f64
                }
            });
            flags.no_qualifying_guess = r.no_qualifying_guess;
            flags.short_solution = r.solution.len() < k;
            flags.eval_pass = r.eval_pass;
            flags.below_admissible =
                algo.is_mach() && rel.is_some_and(|x| x < admissible_ratio(eps));
            row.coverage = Some(r.coverage_exact);
            row.coverage_rel_greedy = rel;
            row.passes = Some(r.passes_used);
            row.peak_elements = Some(r.peak_elements_stored);
            row.hash_mulmod = Some(r.hash_mulmod_count());
            row.selected_guess = r.selected_guess;
            row.solution_size = Some(r.solution.len());
        }
    }
    row.flags = flags.render();
    row
}

/// Appends rows to a CSV file, flushing after each one.
pub struct ReportWriter {
    csv: csv::Writer<File>,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Report(e.to_string())
}

impl ReportWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut csv = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(file);
        csv.write_record(CSV_COLUMNS).map_err(csv_err)?;
        csv.flush().map_err(|e| Error::io(path, e))?;
        Ok(ReportWriter { csv })
    }

    pub fn append(&mut self, row: &ReportRow) -> Result<()> {
        self.csv.serialize(row).map_err(csv_err)?;
        self.csv.flush().map_err(|e| Error::Report(e.to_string()))
    }
}

/// The JSON path paired with a CSV output path.
pub fn json_path_for(csv_path: &Path) -> std::path::PathBuf {
    csv_path.with_extension("json")
}

/// Writes `rows` as CSV to `csv_path` and as a JSON array to `json_path`.
pub fn emit_report(rows: &[ReportRow], csv_path: &Path, json_path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Report("no rows to report".into()));
    }
    let mut writer = ReportWriter::create(csv_path)?;
    for row in rows {
        writer.append(row)?;
    }
    let file = File::create(json_path).map_err(|e| Error::io(json_path, e))?;
    serde_json::to_writer_pretty(file, rows).map_err(|e| Error::Report(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxcover::GammaMode;
    use crate::setstream::SetStream;

    fn row_for(algo: Algorithm, greedy: u64) -> ReportRow {
        let s = SetStream::from_sets([vec![1u64, 2, 3], vec![3, 4], vec![4, 5]]);
        let r = crate::harness::run_algorithm(&s, algo, 2, 0.25, 1.0, 3).unwrap();
        make_row("toy", algo, 2, 0.25, 1.0, 3, Some(&r), Some(greedy), 1.5)
    }

    #[test]
    fn one_row_one_line_all_columns() {
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("r.csv");
        let json_path = dir.path().join("r.json");
        let row = row_for(
            Algorithm::Mach {
                gamma: GammaMode::Pairwise,
                f0_selection: false,
            },
            5,
        );
        emit_report(std::slice::from_ref(&row), &csv_path, &json_path).unwrap();
        let text = std::fs::read_to_string(&csv_path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(lines[1].split(',').count(), CSV_COLUMNS.len());
        let json: Vec<ReportRow> =
            serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
        assert_eq!(json, vec![row]);
    }

    #[test]
    fn greedy_relative_to_itself_is_one() {
        let row = row_for(Algorithm::Greedy, 5);
        assert_eq!(row.coverage, Some(5));
        assert_eq!(row.coverage_rel_greedy, Some(1.0));
        assert_eq!(row.gamma_mode, None);
        assert_eq!(row.flags, "");
    }

    #[test]
    fn admissible_flag_threshold() {
        // 1 - δ(1/8)/(1-1/e) = 1 - 0.31339/0.63212 = 0.5042
        assert!((admissible_ratio(0.125) - 0.5042).abs() < 1e-4);
        assert!(admissible_ratio(0.5) < 0.0);
        let algo = Algorithm::Mach {
            gamma: GammaMode::Full,
            f0_selection: false,
        };
        let s = SetStream::from_sets([vec![1u64, 2], vec![3]]);
        let r = run_mach_like(&s, algo);
        let low = make_row(
            "t",
            algo,
            1,
            0.125,
            1.0,
            0,
            Some(&r),
            Some(r.coverage_exact * 2 + 1),
            0.0,
        );
        assert!(Flags::parse(&low.flags).below_admissible);
        let ok = make_row(
            "t",
            algo,
            1,
            0.125,
            1.0,
            0,
            Some(&r),
            Some(r.coverage_exact),
            0.0,
        );
        assert!(!Flags::parse(&ok.flags).below_admissible);
        let greedy = make_row(
            "t",
            Algorithm::Greedy,
            1,
            0.125,
            1.0,
            0,
            Some(&r),
            Some(100),
            0.0,
        );
        assert!(!Flags::parse(&greedy.flags).below_admissible);
    }

    fn run_mach_like(s: &SetStream, algo: Algorithm) -> RunResult {
        crate::harness::run_algorithm(s, algo, 1, 0.125, 1.0, 0).unwrap()
    }

    #[test]
    fn timed_out_row() {
        let row = make_row("t", Algorithm::Sg, 3, 0.5, 1.0, 0, None, Some(10), 12.0);
        assert_eq!(row.flags, "timed_out");
        assert_eq!(row.coverage, None);
    }

    #[test]
    fn flags_round_trip() {
        let f = Flags {
            no_qualifying_guess: true,
            short_solution: false,
            below_admissible: true,
            timed_out: false,
            eval_pass: true,
        };
        assert_eq!(Flags::parse(&f.render()), f);
    }
}
