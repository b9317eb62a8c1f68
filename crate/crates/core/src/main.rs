use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};

use streamcover::harness::{
    emit_report, make_row, run_algorithm, run_experiment, Algorithm, ExperimentSpec, ReportRow,
    CSV_COLUMNS,
};
use streamcover::maxcover::{run_greedy, GammaMode};
use streamcover::{Error, Result, SetStream};

#[derive(Parser)]
#[command(
    name = "streamcover",
    version,
    about = "Streaming maximum-k-coverage benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Greedy,
    Sg,
    Bmkk,
    #[value(name = "2p")]
    TwoPass,
    Mach,
}

#[derive(Clone, Copy, ValueEnum)]
enum GammaArg {
    Pairwise,
    Reduced,
    Original,
    Full,
}

impl From<GammaArg> for GammaMode {
    fn from(g: GammaArg) -> Self {
        match g {
            GammaArg::Pairwise => GammaMode::Pairwise,
            GammaArg::Reduced => GammaMode::Reduced,
            GammaArg::Original => GammaMode::Original,
            GammaArg::Full => GammaMode::Full,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the statistics pass and print the stream statistics.
    Stats {
        /// FIMI file or `synth:n=..,m=..,size=..,seed=..`
        dataset: String,
        #[arg(long)]
        universe_bound: Option<u64>,
    },
    /// Run one algorithm once.
    Run {
        #[arg(long)]
        dataset: String,
        #[arg(long, value_enum)]
        algo: AlgoArg,
        #[arg(long, value_enum, default_value = "pairwise")]
        gamma: GammaArg,
        /// Pick the final guess by F0 sketch estimates.
        #[arg(long)]
        f0_selection: bool,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV output; a JSON copy is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seconds before the run is abandoned.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        universe_bound: Option<u64>,
    },
    /// Execute an experiment grid described by a TOML file.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a synthetic stream as a FIMI file.
    Generate {
        /// `n=..,m=..,size=uniform:A:B|zipf:S:MAX,seed=..`
        #[arg(long)]
        synth: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn open(dataset: &str, bound: Option<u64>) -> Result<SetStream> {
    let s = SetStream::open(dataset)?;
    Ok(match bound {
        Some(b) => s.with_universe_bound(b),
        None => s,
    })
}

fn print_row(row: &ReportRow) -> Result<()> {
    let err = |e: csv::Error| Error::Report(e.to_string());
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(std::io::stdout());
    w.write_record(CSV_COLUMNS).map_err(err)?;
    w.serialize(row).map_err(err)?;
    w.flush().map_err(|e| Error::Report(e.to_string()))
}

fn real_main(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats {
            dataset,
            universe_bound,
        } => {
            let s = open(&dataset, universe_bound)?;
            println!("{}", s.stats_pass()?);
        }
        Command::Run {
            dataset,
            algo,
            gamma,
            f0_selection,
            k,
            eps,
            c,
            seed,
            out,
            time_limit,
            universe_bound,
        } => {
            let algo = match algo {
                AlgoArg::Greedy => Algorithm::Greedy,
                AlgoArg::Sg => Algorithm::Sg,
                AlgoArg::Bmkk => Algorithm::Bmkk,
                AlgoArg::TwoPass => Algorithm::TwoPass,
                AlgoArg::Mach => Algorithm::Mach {
                    gamma: gamma.into(),
                    f0_selection,
                },
            };
            let mut stream = open(&dataset, universe_bound)?;
            if dataset.starts_with("synth:") {
                stream = stream.materialize()?;
            }
            stream.stats()?;
            let handle = || {
                let h = stream.reopen();
                match time_limit {
                    Some(t) => h.with_deadline(Instant::now() + Duration::from_secs_f64(t)),
                    None => h,
                }
            };
            let greedy = match run_greedy(&handle(), k) {
                Ok(r) => Some(r.coverage_exact),
                Err(Error::TimedOut) => None,
                Err(e) => return Err(e),
            };
            let started = Instant::now();
            let result = match run_algorithm(&handle(), algo, k, eps, c, seed) {
                Ok(r) => Some(r),
                Err(Error::TimedOut) => None,
                Err(e) => return Err(e),
            };
            let wall_ms = result
                .as_ref()
                .map_or(started.elapsed(), |r| r.wall_time)
                .as_secs_f64()
                * 1e3;
            let row = make_row(
                &dataset,
                algo,
                k,
                eps,
                c,
                seed,
                result.as_ref(),
                greedy,
                wall_ms,
            );
            if let Some(r) = &result {
                eprintln!("solution: {:?}", r.solution);
            }
            print_row(&row)?;
            if let Some(out) = out {
                emit_report(
                    std::slice::from_ref(&row),
                    &out,
                    &out.with_extension("json"),
                )?;
            }
        }
        Command::Bench { config } => {
            let spec = ExperimentSpec::from_file(&config)?;
            let rows = run_experiment(&spec)?;
            for row in &rows {
                println!(
                    "{:<22} k={:<4} eps={:<6} seed={:<4} coverage={:<10} rel={:<8} passes={:<4} peak={:<10} {}",
                    row.algo,
                    row.k,
                    row.eps,
                    row.seed,
                    row.coverage.map_or("-".into(), |c| c.to_string()),
                    row.coverage_rel_greedy.map_or("-".into(), |r| format!("{r:.4}")),
                    row.passes.map_or("-".into(), |p| p.to_string()),
                    row.peak_elements.map_or("-".into(), |p| p.to_string()),
                    row.flags
                );
            }
        }
        Command::Generate { synth, out } => {
            let s = SetStream::open(&format!("synth:{synth}"))?;
            s.write_fimi(&out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
