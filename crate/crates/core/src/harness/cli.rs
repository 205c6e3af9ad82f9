//! Command-line front end. `run` returns the process exit code.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Deserialize;

use crate::bits::BitString;
use crate::channel::{capacity_solve, Dmc, DEFAULT_CAPACITY_MAX_ITER, DEFAULT_CAPACITY_TOL};
use crate::interactive_hashing::{ih_run, HonestResponder};
use crate::subset_codec::{preimage_histogram, CodecParams};

use super::{run_campaign, CampaignReport, ExperimentConfig, HarnessError, Mode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "otcap",
    version,
    about = "String OT over generalized erasure channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Capacity and optimal input law of a channel file.
    Capacity { channel: PathBuf },
    /// Run the campaign described by a config file.
    Run { config: PathBuf },
    /// Run an attack campaign: case1, case2, good_subset or privacy.
    Attack { name: String, config: PathBuf },
    /// Subset codec parameters and preimage histogram for `L`-subsets of `N` slots.
    Codec {
        #[arg(value_name = "N")]
        n_items: usize,
        #[arg(value_name = "L")]
        subset_size: usize,
    },
    /// One honest interactive-hashing run on `m`-bit input.
    IhDemo {
        m: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// A bare transition matrix or a full channel document.
#[derive(Deserialize)]
#[serde(untagged)]
enum CapacityDoc {
    Matrix(Vec<Vec<f64>>),
    Doc {
        inner: Vec<Vec<f64>>,
        #[serde(default)]
        p_star: Option<f64>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure {
            code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

fn runtime_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_RUNTIME,
        message: message.into(),
    }
}

fn capacity(path: &Path) -> Result<String, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let doc: CapacityDoc = serde_json::from_str(&text)
        .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let (rows, p_star) = match doc {
        CapacityDoc::Matrix(rows) => (rows, None),
        CapacityDoc::Doc { inner, p_star } => (inner, p_star),
    };
    let dmc = Dmc::new(rows).map_err(|e| config_error(e.to_string()))?;
    let (p, stats) = capacity_solve(&dmc, DEFAULT_CAPACITY_TOL, DEFAULT_CAPACITY_MAX_ITER)
        .map_err(|e| runtime_error(e.to_string()))?;
    let mut out = String::new();
    writeln!(out, "capacity {:.6}", stats.capacity_bits).unwrap();
    let probs: Vec<String> = p.probs().iter().map(|v| format!("{v:.6}")).collect();
    writeln!(out, "input_distribution [{}]", probs.join(", ")).unwrap();
    writeln!(out, "h_x {:.6}", stats.h_x).unwrap();
    writeln!(out, "h_x_given_y0 {:.6}", stats.h_x_given_y0).unwrap();
    if let Some(ps) = p_star {
        writeln!(out, "p_star {ps:.6}").unwrap();
        writeln!(out, "rate_bound {:.6}", ps * stats.capacity_bits).unwrap();
    }
    Ok(out)
}

fn summarize(report: &CampaignReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "capacity {:.6}  p_star {:.6}  bound {:.6}",
        report.channel.capacity, report.channel.p_star, report.channel.bound
    )
    .unwrap();
    if !report.rate.rows.is_empty() {
        writeln!(
            out,
            "{:>6} {:>4} {:>8} {:>8} {:>8} {:>8}",
            "n", "k", "rate", "bound", "abort", "fail"
        )
        .unwrap();
        for r in &report.rate.rows {
            writeln!(
                out,
                "{:>6} {:>4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
                r.n, r.k, r.rate, r.bound, r.abort_rate, r.correctness_failure_rate
            )
            .unwrap();
        }
    }
    for a in &report.attacks {
        let bound = a
            .bound
            .map_or_else(|| "-".to_string(), |b| format!("{b:.4}"));
        writeln!(
            out,
            "{} n={} success {}/{} = {:.4} [{:.4}, {:.4}] bound {}",
            a.strategy, a.n, a.successes, a.applicable, a.estimate, a.lower, a.upper, bound
        )
        .unwrap();
    }
    out
}

fn campaign(path: &Path, mode: Option<&str>) -> Result<String, Failure> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(name) = mode {
        cfg.mode = match Mode::parse(name) {
            Some(m) if m != Mode::Honest => m,
            _ => return Err(config_error(format!("unknown attack {name}"))),
        };
    }
    let report = run_campaign(&cfg)?;
    Ok(summarize(&report))
}

fn codec(n_items: usize, subset_size: usize) -> Result<String, Failure> {
    let p = CodecParams::new(n_items, subset_size).map_err(|e| config_error(e.to_string()))?;
    let [_, single, double] = preimage_histogram(&p);
    let mut out = String::new();
    writeln!(out, "m={}", p.m_bits).unwrap();
    writeln!(out, "total={}", p.total).unwrap();
    writeln!(out, "preimages=1: {single}").unwrap();
    writeln!(out, "preimages=2: {double}").unwrap();
    Ok(out)
}

fn ih_demo(m: usize, seed: u64) -> Result<String, Failure> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let w: BitString = (0..m).map(|_| rng.gen::<bool>()).collect();
    let mut bob = HonestResponder { w: w.clone() };
    let (transcript, outcome) =
        ih_run(m, Some(&w), &mut rng, &mut bob).map_err(|e| config_error(e.to_string()))?;
    let mut out = String::new();
    writeln!(out, "w  {w}").unwrap();
    for (q, b) in transcript.queries.iter().zip(&transcript.responses) {
        writeln!(out, "q  {q}  -> {}", u8::from(*b)).unwrap();
    }
    writeln!(out, "w0 {}", outcome.w0).unwrap();
    writeln!(out, "w1 {}", outcome.w1).unwrap();
    match outcome.d {
        Some(d) => writeln!(out, "d  {}", u8::from(d)).unwrap(),
        None => return Err(runtime_error("input not among the outputs")),
    }
    Ok(out)
}

/// Parse `args` (program name first) and execute; text goes to `out`/`err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match &cli.command {
        Command::Capacity { channel } => capacity(channel),
        Command::Run { config } => campaign(config, None),
        Command::Attack { name, config } => campaign(config, Some(name)),
        Command::Codec {
            n_items,
            subset_size,
        } => codec(*n_items, *subset_size),
        Command::IhDemo { m, seed } => ih_demo(*m, *seed),
    };
    match result {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            EXIT_OK
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
