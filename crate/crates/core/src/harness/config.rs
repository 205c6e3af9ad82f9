use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::protocol::DecodeMode;

use super::HarnessError;

/// Environment variable that replaces the configured seed.
pub const SEED_ENV: &str = "OTCAP_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Honest,
    Case1,
    Case2,
    GoodSubset,
    Privacy,
}

impl Mode {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "honest" => Mode::Honest,
            "case1" => Mode::Case1,
            "case2" => Mode::Case2,
            "good_subset" | "good-subset" => Mode::GoodSubset,
            "privacy" => Mode::Privacy,
            _ => return None,
        })
    }
}

/// `alpha(n) = c1 / sqrt(n)`, `eps(n) = gamma(n) = c2 / sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub c1: f64,
    pub c2: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Self { c1: 0.2, c2: 0.1 }
    }
}

impl Schedule {
    pub fn at(&self, n: usize) -> (f64, f64, f64) {
        let s = (n as f64).sqrt();
        (self.c1 / s, self.c2 / s, self.c2 / s)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Campaign report (JSON).
    pub report: Option<PathBuf>,
    /// Directory for per-session transcripts (JSON lines).
    pub transcripts: Option<PathBuf>,
    /// Sessions per block length whose transcripts are kept.
    #[serde(default = "default_transcript_limit")]
    pub transcript_limit: usize,
}

fn default_transcript_limit() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Channel document, relative to the config file.
    pub channel: PathBuf,
    pub n_grid: Vec<usize>,
    /// Fixed constants; when absent the schedule supplies them.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub eps_typ: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub schedule: Schedule,
    pub trials: u64,
    pub seed: u64,
    pub mode: Mode,
    #[serde(default)]
    pub decode: DecodeMode,
    #[serde(default)]
    pub outputs: Outputs,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Read, resolve relative paths against the file's directory, apply the
    /// seed override and validate.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        cfg.apply_env()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.channel);
        if let Some(p) = self.outputs.report.as_mut() {
            fix(p);
        }
        if let Some(p) = self.outputs.transcripts.as_mut() {
            fix(p);
        }
    }

    pub fn apply_env(&mut self) -> Result<(), HarnessError> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| HarnessError::Config(format!("{SEED_ENV}={v} is not a u64")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !self.channel.is_file() {
            return Err(HarnessError::Config(format!(
                "channel file {} not found",
                self.channel.display()
            )));
        }
        if let Some(n) = self.n_grid.iter().find(|n| **n == 0 || **n % 2 != 0) {
            return Err(HarnessError::Config(format!(
                "block length {n} must be even and positive"
            )));
        }
        Ok(())
    }

    /// `(alpha, eps_typ, gamma)` at block length `n`.
    pub fn constants(&self, n: usize) -> (f64, f64, f64) {
        let (a, e, g) = self.schedule.at(n);
        (
            self.alpha.unwrap_or(a),
            self.eps_typ.unwrap_or(e),
            self.gamma.unwrap_or(g),
        )
    }
}
