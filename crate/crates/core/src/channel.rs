//! Generalized erasure channels.
//!
//! A [`GecSpec`] is an inner discrete memoryless channel [`Dmc`] preceded by an
//! input-independent erasure with probability `erasure_prob`. The erasure is a
//! single output symbol with index `inner.output_size()`.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::real::Real;

#[derive(Debug, thiserror::Error)]
pub enum ChannelError {
    #[error("malformed channel: {0}")]
    MalformedChannel(String),
    #[error("symbol {symbol} out of range for alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },
    #[error("capacity iteration did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("channel document: {0}")]
    Document(String),
}

/// Discrete memoryless channel with transition rows `W(y|x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Dmc<T> {
    transition: Vec<Vec<T>>,
}

impl<T: Real> Dmc<T> {
    /// Validated constructor.
    pub fn new(transition: Vec<Vec<T>>) -> Result<Self, ChannelError> {
        let dmc = Self { transition };
        dmc.validate()?;
        Ok(dmc)
    }

    /// Build without checking; pair with [`Dmc::validate`].
    pub fn from_rows_unchecked(transition: Vec<Vec<T>>) -> Self {
        Self { transition }
    }

    pub fn identity(size: usize) -> Self {
        Self {
            transition: (0..size)
                .map(|x| {
                    (0..size)
                        .map(|y| if x == y { T::one() } else { T::zero() })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn binary_symmetric(crossover: T) -> Self {
        let keep = T::one() - crossover;
        Self {
            transition: vec![vec![keep, crossover], vec![crossover, keep]],
        }
    }

    /// Every input row equal to `row`; the output carries no information.
    pub fn constant_rows(inputs: usize, row: Vec<T>) -> Self {
        Self {
            transition: vec![row; inputs],
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.transition.is_empty() {
            return Err(ChannelError::MalformedChannel("no input symbols".into()));
        }
        let width = self.transition[0].len();
        if width == 0 {
            return Err(ChannelError::MalformedChannel("no output symbols".into()));
        }
        let tol = T::stochastic_tol();
        for (x, row) in self.transition.iter().enumerate() {
            if row.len() != width {
                return Err(ChannelError::MalformedChannel(format!(
                    "row {x} has {} entries, expected {width}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
                return Err(ChannelError::MalformedChannel(format!(
                    "row {x} has entry {v} outside [0,1]"
                )));
            }
            let sum: T = row.iter().copied().sum();
            if (sum - T::one()).abs() > tol {
                return Err(ChannelError::MalformedChannel(format!(
                    "row {x} sums to {sum}"
                )));
            }
        }
        Ok(())
    }

    pub fn input_size(&self) -> usize {
        self.transition.len()
    }

    pub fn output_size(&self) -> usize {
        self.transition.first().map_or(0, Vec::len)
    }

    pub fn prob(&self, y: usize, x: usize) -> T {
        self.transition[x][y]
    }

    pub fn row(&self, x: usize) -> &[T] {
        &self.transition[x]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.transition
    }

    /// Draw an output for input `x`.
    pub fn sample<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let row = &self.transition[x];
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (y, p) in row.iter().enumerate() {
            let p = p.as_f64();
            if p > 0.0 {
                last_nonzero = y;
                acc += p;
                if u < acc {
                    return y;
                }
            }
        }
        last_nonzero
    }
}

/// Generalized erasure channel: erasure with probability `erasure_prob`, else `inner`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct GecSpec<T> {
    pub inner: Dmc<T>,
    pub erasure_prob: T,
}

impl<T: Real> GecSpec<T> {
    pub fn new(inner: Dmc<T>, erasure_prob: T) -> Result<Self, ChannelError> {
        let spec = Self {
            inner,
            erasure_prob,
        };
        validate_gec(&spec)?;
        Ok(spec)
    }

    pub fn erasure_symbol(&self) -> usize {
        self.inner.output_size()
    }

    pub fn input_size(&self) -> usize {
        self.inner.input_size()
    }

    /// Send `x` through the channel. The erasure decision at each position uses
    /// its own draw, taken before and independently of the symbol draw.
    pub fn transmit<R: Rng + ?Sized>(
        &self,
        x: &[usize],
        rng: &mut R,
    ) -> Result<Vec<usize>, ChannelError> {
        let p = self.erasure_prob.as_f64();
        if !(0.0..=1.0).contains(&p) {
            return Err(ChannelError::MalformedChannel(format!(
                "erasure probability {p} outside [0,1]"
            )));
        }
        check_symbols(x, self.input_size())?;
        let erasure = self.erasure_symbol();
        Ok(x.iter()
            .map(|&xi| {
                let u: f64 = rng.gen();
                if u < p {
                    erasure
                } else {
                    self.inner.sample(xi, rng)
                }
            })
            .collect())
    }
}

pub(crate) fn check_symbols(x: &[usize], alphabet: usize) -> Result<(), ChannelError> {
    match x.iter().find(|&&s| s >= alphabet) {
        Some(&symbol) => Err(ChannelError::SymbolOutOfRange { symbol, alphabet }),
        None => Ok(()),
    }
}

/// Check row stochasticity and `0 < p* < 1`.
pub fn validate_gec<T: Real>(spec: &GecSpec<T>) -> Result<(), ChannelError> {
    spec.inner.validate()?;
    let p = spec.erasure_prob;
    if !(p > T::zero() && p < T::one()) {
        return Err(ChannelError::MalformedChannel(format!(
            "erasure probability {p} outside (0,1)"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct InputDistribution<T> {
    probs: Vec<T>,
}

impl<T: Real> InputDistribution<T> {
    pub fn new(probs: Vec<T>) -> Result<Self, ChannelError> {
        let bad = probs.iter().any(|p| !(*p >= T::zero() && *p <= T::one()));
        let sum: T = probs.iter().copied().sum();
        if probs.is_empty() || bad || (sum - T::one()).abs() > T::stochastic_tol() {
            return Err(ChannelError::MalformedChannel(format!(
                "input distribution {probs:?} is not a probability vector"
            )));
        }
        Ok(Self { probs })
    }

    pub fn uniform(size: usize) -> Self {
        Self {
            probs: vec![T::one() / T::from_count(size); size],
        }
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, x: usize) -> T {
        self.probs[x]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (x, p) in self.probs.iter().enumerate() {
            let p = p.as_f64();
            if p > 0.0 {
                last_nonzero = x;
                acc += p;
                if u < acc {
                    return x;
                }
            }
        }
        last_nonzero
    }

    pub fn sample_string<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

/// Entropy quantities of the inner channel under an input distribution, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats<T> {
    /// `I(X;Y0) = H(X) - H(X|Y0)`; equals `C(W0)` at the capacity-achieving input.
    pub capacity_bits: T,
    pub h_x: T,
    pub h_x_given_y0: T,
}

fn output_marginal<T: Real>(dmc: &Dmc<T>, p: &InputDistribution<T>) -> Vec<T> {
    (0..dmc.output_size())
        .map(|y| {
            (0..dmc.input_size())
                .map(|x| p.prob(x) * dmc.prob(y, x))
                .sum()
        })
        .collect()
}

/// Exact `H(X)`, `H(X|Y0)` and their difference from the joint `P(x) W0(y|x)`.
pub fn channel_entropies<T: Real>(dmc: &Dmc<T>, p: &InputDistribution<T>) -> ChannelStats<T> {
    let q = output_marginal(dmc, p);
    let h_x: T = p.probs().iter().map(|&px| px.entropy_term()).sum();
    let mut h_x_given_y0 = T::zero();
    for (y, &qy) in q.iter().enumerate() {
        if qy <= T::zero() {
            continue;
        }
        for x in 0..dmc.input_size() {
            let joint = p.prob(x) * dmc.prob(y, x);
            if joint > T::zero() {
                h_x_given_y0 -= joint * (joint / qy).log2();
            }
        }
    }
    ChannelStats {
        capacity_bits: h_x - h_x_given_y0,
        h_x,
        h_x_given_y0,
    }
}

/// `I(X;Y0)` computed as `sum P(x,y) log(W(y|x)/q(y))`, independently of
/// [`channel_entropies`].
pub fn mutual_information<T: Real>(dmc: &Dmc<T>, p: &InputDistribution<T>) -> T {
    let q = output_marginal(dmc, p);
    let mut i = T::zero();
    for x in 0..dmc.input_size() {
        for (y, &qy) in q.iter().enumerate() {
            let w = dmc.prob(y, x);
            let joint = p.prob(x) * w;
            if joint > T::zero() {
                i += joint * (w / qy).log2();
            }
        }
    }
    i
}

/// `H(Y0|X)` and `H(Y0)` in bits.
pub fn output_entropies<T: Real>(dmc: &Dmc<T>, p: &InputDistribution<T>) -> (T, T) {
    let q = output_marginal(dmc, p);
    let h_y: T = q.iter().map(|&v| v.entropy_term()).sum();
    let h_y_given_x: T = (0..dmc.input_size())
        .map(|x| p.prob(x) * dmc.row(x).iter().map(|&w| w.entropy_term()).sum::<T>())
        .sum();
    (h_y_given_x, h_y)
}

pub const DEFAULT_CAPACITY_TOL: f64 = 1e-9;
pub const DEFAULT_CAPACITY_MAX_ITER: usize = 100_000;

fn divergences<T: Real>(dmc: &Dmc<T>, p: &InputDistribution<T>) -> Vec<T> {
    let q = output_marginal(dmc, p);
    (0..dmc.input_size())
        .map(|x| row_divergence(dmc.row(x), &q))
        .collect()
}

fn row_divergence<T: Real>(row: &[T], q: &[T]) -> T {
    row.iter()
        .zip(q)
        .filter(|(w, _)| **w > T::zero())
        .map(|(&w, &qy)| w * (w / qy).log2())
        .sum()
}

/// Moves mass from input `from` to input `to` by the amount that maximises
/// mutual information along that line, found by bisection on the derivative
/// `D(W_to || q) - D(W_from || q)`.
fn pairwise_move<T: Real>(dmc: &Dmc<T>, p: &mut InputDistribution<T>, to: usize, from: usize) {
    let q = output_marginal(dmc, p);
    let shifted = |t: T| -> T {
        let qt: Vec<T> = q
            .iter()
            .zip(dmc.row(to).iter().zip(dmc.row(from)))
            .map(|(&qy, (&wt, &wf))| (qy + t * (wt - wf)).max(T::zero()))
            .collect();
        row_divergence(dmc.row(to), &qt) - row_divergence(dmc.row(from), &qt)
    };
    let limit = p.probs[from];
    let t = if shifted(limit) >= T::zero() {
        limit
    } else {
        let (mut lo, mut hi) = (T::zero(), limit);
        for _ in 0..64 {
            let mid = (lo + hi) / T::lit(2.0);
            if shifted(mid) > T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    p.probs[from] = limit - t;
    p.probs[to] += t;
}

/// Blahut–Arimoto iteration for `C(W0)`.
///
/// Each round applies the classical update `p(x) <- p(x) 2^{D(W_x || q)}`,
/// normalised, and then sweeps over every pair of inputs, moving mass towards
/// the one with the larger divergence by an exact line search. The sweep
/// settles nearly useless channels and channels with nearly equal rows, where
/// the classical update alone needs millions of rounds.
///
/// Stops once `max_x D(W_x || q) - log2 sum_x p(x) 2^{D(W_x || q)}` drops below
/// `tol` (clamped to the precision of `T`); the two terms bracket the capacity.
pub fn capacity_solve<T: Real>(
    dmc: &Dmc<T>,
    tol: T,
    max_iter: usize,
) -> Result<(InputDistribution<T>, ChannelStats<T>), ChannelError> {
    dmc.validate()?;
    let tol = tol.max(T::epsilon() * T::lit(1e3));
    let mut p = InputDistribution::uniform(dmc.input_size());
    let mut divergence = divergences(dmc, &p);
    for _ in 0..max_iter.max(1) {
        let upper = divergence.iter().copied().fold(T::neg_infinity(), T::max);
        let weights: Vec<T> = p
            .probs()
            .iter()
            .zip(&divergence)
            .map(|(&px, &d)| px * (d - upper).exp2())
            .collect();
        let total: T = weights.iter().copied().sum();
        if -total.log2() < tol {
            let stats = channel_entropies(dmc, &p);
            return Ok((p, stats));
        }
        p = InputDistribution {
            probs: weights.into_iter().map(|w| w / total).collect(),
        };
        divergence = divergences(dmc, &p);
        for i in 0..divergence.len() {
            for j in i + 1..divergence.len() {
                let (to, from) = if divergence[i] >= divergence[j] {
                    (i, j)
                } else {
                    (j, i)
                };
                if p.probs[from] > T::zero() && divergence[to] > divergence[from] {
                    pairwise_move(dmc, &mut p, to, from);
                    divergence = divergences(dmc, &p);
                }
            }
        }
    }
    Err(ChannelError::NoConvergence(max_iter))
}

/// On-disk channel description: `{"inner": [[...]], "p_star": r}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelDoc {
    pub inner: Vec<Vec<f64>>,
    pub p_star: f64,
}

impl ChannelDoc {
    pub fn into_spec(self) -> Result<GecSpec<f64>, ChannelError> {
        GecSpec::new(Dmc::new(self.inner)?, self.p_star)
    }
}

impl From<&GecSpec<f64>> for ChannelDoc {
    fn from(spec: &GecSpec<f64>) -> Self {
        Self {
            inner: spec.inner.rows().to_vec(),
            p_star: spec.erasure_prob,
        }
    }
}

pub fn parse_channel_json(text: &str) -> Result<GecSpec<f64>, ChannelError> {
    let doc: ChannelDoc =
        serde_json::from_str(text).map_err(|e| ChannelError::Document(e.to_string()))?;
    doc.into_spec()
}

pub fn load_channel(path: &Path) -> Result<GecSpec<f64>, ChannelError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ChannelError::Document(format!("{}: {e}", path.display())))?;
    parse_channel_json(&text)
}

/// Binary entropy in bits.
pub fn h2<T: Real>(q: T) -> T {
    q.entropy_term() + (T::one() - q).entropy_term()
}
