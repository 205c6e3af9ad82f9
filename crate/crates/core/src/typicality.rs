//! Typical and conditionally typical sequences.
//!
//! All inequalities are inclusive. Counts are compared against `eps * n` with an
//! absolute slack of [`COUNT_SLACK`] per symbol so that exact boundary cases
//! survive floating-point rounding.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::channel::{Dmc, InputDistribution};
use crate::real::Real;

/// Absolute slack, in counts, on every typicality comparison.
pub const COUNT_SLACK: f64 = 1e-9;

/// Default cap on the candidate search space for [`enumerate_cond_typical`].
pub const DEFAULT_SEARCH_LIMIT: u64 = 1 << 24;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TypicalityError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("candidate search space {size} exceeds limit {limit}")]
    SearchSpaceTooLarge { size: u128, limit: u64 },
    #[error("output symbol {symbol} outside alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },
}

/// Symbol counts `N(x|x^n)` of a string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeProfile {
    pub counts: Vec<usize>,
    pub len: usize,
}

impl TypeProfile {
    /// Counts over an alphabet of `alphabet` symbols; `None` if a symbol is out of range.
    pub fn of(x: &[usize], alphabet: usize) -> Option<Self> {
        let mut counts = vec![0; alphabet];
        for &s in x {
            *counts.get_mut(s)? += 1;
        }
        Some(Self {
            counts,
            len: x.len(),
        })
    }

    /// Empirical distribution `P_{x^n}`.
    pub fn frequency(&self, symbol: usize) -> f64 {
        if self.len == 0 {
            0.0
        } else {
            self.counts[symbol] as f64 / self.len as f64
        }
    }
}

fn within<T: Real>(count: usize, expected: T, radius: T) -> bool {
    (T::from_count(count) - expected).abs() <= radius + T::lit(COUNT_SLACK)
}

/// `x` is eps-typical for `p`: `|N(a|x) - n p(a)| <= eps n` and `p(a) = 0 => N(a|x) = 0`.
pub fn is_typical<T: Real>(x: &[usize], p: &InputDistribution<T>, eps: T) -> bool {
    let Some(profile) = TypeProfile::of(x, p.len()) else {
        return false;
    };
    let n = T::from_count(x.len());
    profile.counts.iter().enumerate().all(|(a, &count)| {
        let pa = p.prob(a);
        if pa <= T::zero() {
            count == 0
        } else {
            within(count, n * pa, eps * n)
        }
    })
}

/// Joint counts `N(ab|x y)` indexed `[a][b]`.
fn joint_counts(x: &[usize], y: &[usize], nx: usize, ny: usize) -> Option<Vec<Vec<usize>>> {
    let mut counts = vec![vec![0usize; ny]; nx];
    for (&a, &b) in x.iter().zip(y) {
        *counts.get_mut(a)?.get_mut(b)? += 1;
    }
    Some(counts)
}

fn cond_typical_counts<T: Real>(counts: &[Vec<usize>], w: &Dmc<T>, n: usize, eps: T) -> bool {
    let radius = eps * T::from_count(n);
    counts.iter().enumerate().all(|(a, row)| {
        let n_a: usize = row.iter().sum();
        row.iter().enumerate().all(|(b, &c)| {
            let wba = w.prob(b, a);
            if wba <= T::zero() {
                c == 0
            } else {
                within(c, wba * T::from_count(n_a), radius)
            }
        })
    })
}

/// `y` is conditionally eps-typical given `x` under `w`:
/// `|N(ab|x y) - n W(b|a) P_x(a)| <= eps n` and `W(b|a) = 0 => N(ab|x y) = 0`.
///
/// Out-of-range symbols make the pair atypical.
pub fn is_cond_typical<T: Real>(
    y: &[usize],
    x: &[usize],
    w: &Dmc<T>,
    eps: T,
) -> Result<bool, TypicalityError> {
    if x.len() != y.len() {
        return Err(TypicalityError::LengthMismatch {
            left: y.len(),
            right: x.len(),
        });
    }
    Ok(match joint_counts(x, y, w.input_size(), w.output_size()) {
        Some(counts) => cond_typical_counts(&counts, w, x.len(), eps),
        None => false,
    })
}

/// Closed-form constants and probability lower bounds for typical sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypicalityBounds {
    /// `D = sum_{x: P(x) != 0} -log2 P(x)`.
    pub d_const: f64,
    /// `E = max_x sum_{y: W(y|x) != 0} -log2 W(y|x)`.
    pub e_const: f64,
    /// `max(0, 1 - 2|X| exp(-n eps^2 / 2))`: mass of the eps-typical set.
    pub prob_lower: f64,
    /// `max(0, 1 - 2|X||Y| exp(-n eps^2 / 2))`: mass of the conditional typical set.
    pub cond_prob_lower: f64,
}

pub fn typicality_bounds<T: Real>(
    p: &InputDistribution<T>,
    w: &Dmc<T>,
    n: usize,
    eps: f64,
) -> TypicalityBounds {
    let d_const = p
        .probs()
        .iter()
        .filter(|v| **v > T::zero())
        .map(|v| -v.as_f64().log2())
        .sum();
    let e_const = w
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .filter(|v| **v > T::zero())
                .map(|v| -v.as_f64().log2())
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let tail = (-(n as f64) * eps * eps / 2.0).exp();
    TypicalityBounds {
        d_const,
        e_const,
        prob_lower: (1.0 - 2.0 * p.len() as f64 * tail).max(0.0),
        cond_prob_lower: (1.0 - 2.0 * (w.input_size() * w.output_size()) as f64 * tail).max(0.0),
    }
}

/// Number of input strings whose every position can produce the observed output.
pub fn search_space_size<T: Real>(y: &[usize], w: &Dmc<T>) -> Result<u128, TypicalityError> {
    let mut size: u128 = 1;
    for &b in y {
        if b >= w.output_size() {
            return Err(TypicalityError::SymbolOutOfRange {
                symbol: b,
                alphabet: w.output_size(),
            });
        }
        let support = (0..w.input_size())
            .filter(|&a| w.prob(b, a) > T::zero())
            .count() as u128;
        size = size.saturating_mul(support);
    }
    Ok(size)
}

/// Visit, in lexicographic order, every `x` with `y` conditionally eps-typical
/// given `x` (and, when `input_dist` is given, `x` eps-typical for it).
///
/// Only inputs that can produce each observed output symbol are explored;
/// the size of that space must not exceed `limit`.
pub fn for_each_cond_typical<T, F>(
    y: &[usize],
    w: &Dmc<T>,
    input_dist: Option<&InputDistribution<T>>,
    eps: T,
    limit: u64,
    mut visit: F,
) -> Result<(), TypicalityError>
where
    T: Real,
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    let size = search_space_size(y, w)?;
    if size > limit as u128 {
        return Err(TypicalityError::SearchSpaceTooLarge { size, limit });
    }
    let supports: Vec<Vec<usize>> = y
        .iter()
        .map(|&b| {
            (0..w.input_size())
                .filter(|&a| w.prob(b, a) > T::zero())
                .collect()
        })
        .collect();
    if supports.iter().any(Vec::is_empty) {
        return Ok(());
    }
    let n = y.len();
    let mut counts = vec![vec![0usize; w.output_size()]; w.input_size()];
    let mut cursor = vec![0usize; n];
    let mut x: Vec<usize> = Vec::with_capacity(n);
    // Iterative depth-first walk; `cursor[i]` indexes into `supports[i]`.
    let mut depth = 0usize;
    loop {
        if depth == n {
            let accept = cond_typical_counts(&counts, w, n, eps)
                && input_dist.is_none_or(|p| is_typical(&x, p, eps));
            if accept && visit(&x).is_break() {
                return Ok(());
            }
            if n == 0 {
                return Ok(());
            }
            depth -= 1;
            let a = x.pop().expect("nonempty");
            counts[a][y[depth]] -= 1;
            cursor[depth] += 1;
            continue;
        }
        if cursor[depth] < supports[depth].len() {
            let a = supports[depth][cursor[depth]];
            x.push(a);
            counts[a][y[depth]] += 1;
            depth += 1;
            if depth < n {
                cursor[depth] = 0;
            }
        } else {
            if depth == 0 {
                return Ok(());
            }
            depth -= 1;
            let a = x.pop().expect("nonempty");
            counts[a][y[depth]] -= 1;
            cursor[depth] += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidates {
    pub strings: Vec<Vec<usize>>,
    pub truncated: bool,
}

/// Collect the candidates of [`for_each_cond_typical`], stopping after `cap`.
pub fn enumerate_cond_typical<T: Real>(
    y: &[usize],
    w: &Dmc<T>,
    input_dist: Option<&InputDistribution<T>>,
    eps: T,
    cap: usize,
) -> Result<Candidates, TypicalityError> {
    let mut strings = Vec::new();
    let mut truncated = false;
    for_each_cond_typical(y, w, input_dist, eps, DEFAULT_SEARCH_LIMIT, |x| {
        if strings.len() == cap {
            truncated = true;
            return ControlFlow::Break(());
        }
        strings.push(x.to_vec());
        ControlFlow::Continue(())
    })?;
    Ok(Candidates { strings, truncated })
}

/// `x` restricted to `positions`, in the order given.
pub fn restrict<S: Copy>(x: &[S], positions: &[usize]) -> Vec<S> {
    positions.iter().map(|&i| x[i]).collect()
}
