use serde::{Deserialize, Serialize};

use crate::channel::{
    capacity_solve, ChannelError, ChannelStats, GecSpec, InputDistribution,
    DEFAULT_CAPACITY_MAX_ITER, DEFAULT_CAPACITY_TOL,
};
use crate::subset_codec::{CodecError, CodecParams};
use crate::uhash::symbol_width;

/// Slack for floor/ceil of products that are integers in exact arithmetic.
const ROUNDING_SLACK: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum ParamError {
    #[error("parameter violation: {0}")]
    ParamViolation(String),
    #[error("extracted length is not positive (delta*n = {delta_n})")]
    RateNonpositive { delta_n: f64 },
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// The channel together with Alice's capacity-achieving input law and its entropies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelSetup {
    pub gec: GecSpec<f64>,
    pub input_dist: InputDistribution<f64>,
    pub stats: ChannelStats<f64>,
}

impl ChannelSetup {
    pub fn solve(gec: GecSpec<f64>) -> Result<Self, ChannelError> {
        let (input_dist, stats) =
            capacity_solve(&gec.inner, DEFAULT_CAPACITY_TOL, DEFAULT_CAPACITY_MAX_ITER)?;
        Ok(Self {
            gec,
            input_dist,
            stats,
        })
    }

    pub fn p_star(&self) -> f64 {
        self.gec.erasure_prob
    }

    /// `p* C(W0)`, the rate the construction approaches.
    pub fn rate_bound(&self) -> f64 {
        self.p_star() * self.stats.capacity_bits
    }
}

/// Integer-adjusted constants for one block length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub n: usize,
    pub p_star: f64,
    pub alpha: f64,
    /// `beta_n / n` after rounding `beta_n` down.
    pub beta: f64,
    pub beta_n: usize,
    /// `mu_n / n` with `mu_n = n/2 - beta_n`.
    pub mu: f64,
    pub mu_n: usize,
    pub eps_typ: f64,
    pub gamma: f64,
    pub codec: CodecParams,
    pub m_bits: usize,
    pub g_len: usize,
    /// Unrounded `delta n`.
    pub delta_n: f64,
    pub k: usize,
    pub input_alphabet: usize,
    pub output_alphabet: usize,
    pub symbol_width: usize,
    pub h_x: f64,
    pub h_x_given_y0: f64,
    pub capacity: f64,
}

impl ProtocolParams {
    pub fn half(&self) -> usize {
        self.n / 2
    }

    pub fn alpha_n(&self) -> f64 {
        self.alpha * self.n as f64
    }

    /// Bits fed to each hash: `mu_n` symbols of `symbol_width` bits.
    pub fn hash_in_bits(&self) -> usize {
        self.mu_n * self.symbol_width
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Whether `beta > 2 alpha` survives rounding `beta_n` down.
    pub fn beta_margin_ok(&self) -> bool {
        self.beta > 2.0 * self.alpha
    }

    /// Step-3 threshold `(1 - p* - alpha) n`.
    pub fn good_threshold(&self) -> f64 {
        (1.0 - self.p_star - self.alpha) * self.n as f64
    }
}

pub fn derive_params(
    n: usize,
    setup: &ChannelSetup,
    alpha: f64,
    eps_typ: f64,
    gamma: f64,
) -> Result<ProtocolParams, ParamError> {
    let p_star = setup.p_star();
    if n == 0 || !n.is_multiple_of(2) {
        return Err(ParamError::ParamViolation(format!(
            "n = {n} must be even and positive"
        )));
    }
    if !(alpha > 0.0 && eps_typ > 0.0 && gamma > 0.0) {
        return Err(ParamError::ParamViolation(
            "alpha, eps_typ and gamma must be positive".into(),
        ));
    }
    if 3.0 * alpha >= 0.5 - p_star {
        return Err(ParamError::ParamViolation(format!(
            "3 alpha = {} must be below 1/2 - p* = {}",
            3.0 * alpha,
            0.5 - p_star
        )));
    }
    let nf = n as f64;
    let beta_n = ((0.5 - p_star - alpha) * nf + ROUNDING_SLACK).floor() as usize;
    if beta_n == 0 {
        return Err(ParamError::ParamViolation(format!(
            "beta n rounds to 0 at n = {n}"
        )));
    }
    let half = n / 2;
    let mu_n = half - beta_n;
    let codec = CodecParams::new(half, beta_n)?;
    if codec.m_bits < 2 {
        return Err(ParamError::ParamViolation(format!(
            "interactive hashing needs m >= 2, got {}",
            codec.m_bits
        )));
    }
    let stats = &setup.stats;
    let mu_nf = mu_n as f64;
    let g_len = (mu_nf * (stats.h_x_given_y0 + eps_typ) - ROUNDING_SLACK)
        .ceil()
        .max(0.0) as usize;
    let delta_n = (mu_nf - 5.0 * alpha * nf) * stats.h_x
        - mu_nf * (stats.h_x_given_y0 + eps_typ)
        - gamma * nf;
    let k_floor = (delta_n + ROUNDING_SLACK).floor();
    if k_floor < 1.0 {
        return Err(ParamError::RateNonpositive { delta_n });
    }
    let k = k_floor as usize;
    let input_alphabet = setup.gec.input_size();
    let width = symbol_width(input_alphabet);
    let in_bits = mu_n * width;
    if g_len > in_bits || k > in_bits {
        return Err(ParamError::ParamViolation(format!(
            "hash outputs ({g_len}, {k}) exceed the {in_bits}-bit input"
        )));
    }
    Ok(ProtocolParams {
        n,
        p_star,
        alpha,
        beta: beta_n as f64 / nf,
        beta_n,
        mu: mu_nf / nf,
        mu_n,
        eps_typ,
        gamma,
        m_bits: codec.m_bits,
        codec,
        g_len,
        delta_n,
        k,
        input_alphabet,
        output_alphabet: setup.gec.inner.output_size(),
        symbol_width: width,
        h_x: stats.h_x,
        h_x_given_y0: stats.h_x_given_y0,
        capacity: stats.capacity_bits,
    })
}
