//! Experiment driver: configuration, Monte-Carlo campaigns, reports and the CLI.

pub mod cli;
mod config;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{
    attack_case1, attack_case2_entropy, attack_good_subset_fraction, bob_privacy_advantage,
    AliceGuess, AttackError, AttackReport,
};
use crate::channel::{load_channel, ChannelError};
use crate::protocol::{
    derive_params, run_session, ChannelSetup, ParamError, ProtocolParams, SessionError, SessionRngs,
};
use crate::seeds::{child_seed, mix64, trial_seed};
use crate::stats::Proportion;

pub use config::{ExperimentConfig, Mode, Outputs, Schedule, SEED_ENV};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("channel: {0}")]
    Channel(#[from] ChannelError),
    #[error("parameters at n={n}: {source}")]
    Params { n: usize, source: ParamError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Attack(#[from] AttackError),
}

impl HarnessError {
    /// 2 for anything a corrected config would fix, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Channel(_) | HarnessError::Params { .. } => 2,
            HarnessError::Attack(AttackError::Params(_) | AttackError::UnknownAttack(_)) => 2,
            _ => 3,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Honest-session statistics at one block length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub alpha: f64,
    pub eps_typ: f64,
    pub gamma: f64,
    pub beta_n: usize,
    pub m_bits: usize,
    pub delta_n: f64,
    pub k: usize,
    /// `k / n`.
    pub rate: f64,
    /// `p* C(W0)`.
    pub bound: f64,
    pub trials: u64,
    pub completed: u64,
    pub aborted: u64,
    pub abort_rate: f64,
    /// Aborts keyed by protocol step.
    pub abort_steps: BTreeMap<String, u64>,
    /// Completed sessions where Bob's string differs from Alice's `S_c`.
    pub failures: u64,
    /// `failures / completed`.
    pub correctness_failure_rate: f64,
    pub correctness_failure_upper: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub rows: Vec<RateRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSummary {
    pub capacity: f64,
    pub p_star: f64,
    pub bound: f64,
    pub input_distribution: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub mode: Mode,
    pub seed: u64,
    pub trials: u64,
    pub channel: ChannelSummary,
    pub rate: RateReport,
    pub attacks: Vec<AttackReport>,
}

impl CampaignReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Per-block-length master seed.
fn grid_seed(seed: u64, n: usize) -> u64 {
    child_seed(seed, &format!("n={n}"))
}

/// Bob's choice bit for a trial, independent of the session streams.
fn choice_bit(trial: u64) -> bool {
    ChaCha20Rng::seed_from_u64(mix64(trial)).gen()
}

fn params_at(
    config: &ExperimentConfig,
    setup: &ChannelSetup,
    n: usize,
) -> Result<ProtocolParams, HarnessError> {
    let (alpha, eps, gamma) = config.constants(n);
    derive_params(n, setup, alpha, eps, gamma).map_err(|source| HarnessError::Params { n, source })
}

struct TrialResult {
    completed: bool,
    abort_step: Option<u8>,
    failed: bool,
    transcript: Option<String>,
}

fn honest_row(
    config: &ExperimentConfig,
    setup: &ChannelSetup,
    params: &ProtocolParams,
) -> Result<RateRow, HarnessError> {
    let master = grid_seed(config.seed, params.n);
    let keep = if config.outputs.transcripts.is_some() {
        config.outputs.transcript_limit as u64
    } else {
        0
    };
    let results = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let s = trial_seed(master, i);
            let res = run_session(
                setup,
                params,
                SessionRngs::from_seed(s),
                choice_bit(s),
                config.decode,
            )?;
            Ok(TrialResult {
                completed: res.outcome.is_completed(),
                abort_step: res.outcome.abort_step(),
                failed: res.outcome.is_completed() && res.correct != Some(true),
                transcript: (i < keep).then(|| res.transcript.to_jsonl()),
            })
        })
        .collect::<Result<Vec<_>, SessionError>>()?;

    if let Some(dir) = &config.outputs.transcripts {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        for (i, r) in results.iter().enumerate() {
            if let Some(t) = &r.transcript {
                let path = dir.join(format!("n{:04}_t{:06}.jsonl", params.n, i));
                fs::write(&path, t).map_err(|e| HarnessError::io(&path, e))?;
            }
        }
    }

    let completed = results.iter().filter(|r| r.completed).count() as u64;
    let failures = results.iter().filter(|r| r.failed).count() as u64;
    let mut abort_steps = BTreeMap::new();
    for step in results.iter().filter_map(|r| r.abort_step) {
        *abort_steps.entry(format!("step{step}")).or_insert(0) += 1;
    }
    let aborted = config.trials - completed;
    let fail = Proportion::new(failures, completed);
    Ok(RateRow {
        n: params.n,
        alpha: params.alpha,
        eps_typ: params.eps_typ,
        gamma: params.gamma,
        beta_n: params.beta_n,
        m_bits: params.m_bits,
        delta_n: params.delta_n,
        k: params.k,
        rate: params.rate(),
        bound: setup.rate_bound(),
        trials: config.trials,
        completed,
        aborted,
        abort_rate: aborted as f64 / config.trials as f64,
        abort_steps,
        failures,
        correctness_failure_rate: fail.estimate,
        correctness_failure_upper: fail.upper,
    })
}

fn attack_reports(
    config: &ExperimentConfig,
    setup: &ChannelSetup,
    params: &ProtocolParams,
) -> Result<Vec<AttackReport>, HarnessError> {
    let seed = grid_seed(config.seed, params.n);
    let t = config.trials;
    Ok(match config.mode {
        Mode::Honest => Vec::new(),
        Mode::Case1 => vec![attack_case1(setup, params, t, seed)?],
        Mode::Case2 => vec![attack_case2_entropy(setup, params, t, seed)?],
        Mode::GoodSubset => {
            // A set with exactly 2 alpha n erasures, the largest count a
            // Case-2 Bob can place in R0 unnoticed.
            let u = ((2.0 * params.alpha_n()).ceil() as usize).min(params.half());
            let slots: Vec<usize> = (0..u).collect();
            vec![attack_good_subset_fraction(params, &slots, t, seed)?]
        }
        Mode::Privacy => AliceGuess::ALL
            .iter()
            .map(|g| bob_privacy_advantage(setup, params, *g, t, child_seed(seed, g.name())))
            .collect::<Result<_, _>>()?,
    })
}

pub fn channel_summary(setup: &ChannelSetup) -> ChannelSummary {
    ChannelSummary {
        capacity: setup.stats.capacity_bits,
        p_star: setup.p_star(),
        bound: setup.rate_bound(),
        input_distribution: setup.input_dist.probs().to_vec(),
    }
}

/// Run every configured trial. Output depends only on the config (seed included).
pub fn run_campaign(config: &ExperimentConfig) -> Result<CampaignReport, HarnessError> {
    let setup = ChannelSetup::solve(load_channel(&config.channel)?)?;
    let mut report = CampaignReport {
        mode: config.mode,
        seed: config.seed,
        trials: config.trials,
        channel: channel_summary(&setup),
        rate: RateReport::default(),
        attacks: Vec::new(),
    };
    if config.trials > 0 {
        for &n in &config.n_grid {
            let params = params_at(config, &setup, n)?;
            if config.mode == Mode::Honest {
                report.rate.rows.push(honest_row(config, &setup, &params)?);
            } else {
                report
                    .attacks
                    .extend(attack_reports(config, &setup, &params)?);
            }
        }
    }
    if let Some(path) = &config.outputs.report {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        }
        fs::write(path, report.to_json()).map_err(|e| HarnessError::io(path, e))?;
    }
    Ok(report)
}
