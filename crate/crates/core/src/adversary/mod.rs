//! Malicious strategies and the measurements built on them.

mod case1;
mod case2;
mod istat;
mod privacy;
mod subsets;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::protocol::{ParamError, SessionError};
use crate::stats::Proportion;

pub use case1::{attack_case1, case1_bound, Case1Bob};
pub use case2::{attack_case2_entropy, Case2Bob, EntropyBudget};
pub use istat::{istat_exact_tiny, IstatError, Joint3};
pub use privacy::{
    bob_privacy_advantage, exhaustive_alice_views, AliceGuess, GuessingAlice, ViewDistributions,
};
pub use subsets::{attack_good_subset_fraction, good_subset_fraction_exact, GoodSubsetFraction};

#[derive(Debug, thiserror::Error)]
pub enum AttackError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("invalid attack instance: {0}")]
    Instance(String),
    #[error("unknown attack {0}")]
    UnknownAttack(String),
}

/// Outcome of a Monte-Carlo attack campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub strategy: String,
    pub n: usize,
    pub trials: u64,
    /// Trials in which the attack could be mounted.
    pub applicable: u64,
    pub successes: u64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    /// Reference bound at these parameters, when one exists.
    pub bound: Option<f64>,
    pub extras: BTreeMap<String, f64>,
}

impl AttackReport {
    pub fn new(strategy: &str, n: usize, trials: u64, applicable: u64, successes: u64) -> Self {
        let p = Proportion::new(successes, applicable);
        Self {
            strategy: strategy.to_string(),
            n,
            trials,
            applicable,
            successes,
            estimate: p.estimate,
            lower: p.lower,
            upper: p.upper,
            bound: None,
            extras: BTreeMap::new(),
        }
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn extra(mut self, key: &str, value: f64) -> Self {
        self.extras.insert(key.to_string(), value);
        self
    }

    pub fn proportion(&self) -> Proportion {
        Proportion::new(self.successes, self.applicable)
    }
}

/// Per-trial integer counters; merging is exact, so results do not depend on
/// how trials are split across workers.
#[derive(Debug, Clone, Default)]
pub(crate) struct Tally {
    pub applicable: u64,
    pub successes: u64,
    pub counters: BTreeMap<String, u64>,
}

impl Tally {
    pub fn add(&mut self, key: impl Into<String>, v: u64) {
        *self.counters.entry(key.into()).or_insert(0) += v;
    }

    pub fn get(&self, key: &str) -> u64 {
        self.counters.get(key).copied().unwrap_or(0)
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.applicable += other.applicable;
        self.successes += other.successes;
        for (k, v) in other.counters {
            *self.counters.entry(k).or_insert(0) += v;
        }
        self
    }
}

/// Run `trial` on seeds split from `seed` in parallel and merge the tallies.
pub(crate) fn run_trials<F>(trials: u64, seed: u64, trial: F) -> Result<Tally, AttackError>
where
    F: Fn(u64) -> Result<Tally, AttackError> + Sync,
{
    use rayon::prelude::*;
    (0..trials)
        .into_par_iter()
        .map(|i| trial(crate::seeds::trial_seed(seed, i)))
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
}
