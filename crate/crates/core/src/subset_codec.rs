//! Ranking of `ℓ`-subsets of `[N]` and their encoding as `m`-bit strings.
//!
//! Subsets are ranked in colexicographic order (the combinatorial number
//! system): for 1-based members `s_1 < ... < s_ℓ`, `rank = sum_i C(s_i - 1, i)`.
//! A string `w` of `m = ceil(log2 C(N, ℓ))` bits encodes the subset of rank
//! `int(w) mod C(N, ℓ)`, reading `w` big-endian, so every string is valid and
//! each subset has one or two preimages.

use num_bigint::BigUint;
use num_integer::Integer;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::BitString;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("invalid parameters: subset size {subset_size} of {n_items} items")]
    InvalidParams { n_items: usize, subset_size: usize },
    #[error("invalid subset: {0}")]
    InvalidSubset(String),
    #[error("rank out of range")]
    RankOutOfRange,
    #[error("string has {got} bits, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
}

/// `C(n, k)` as an arbitrary-precision integer.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodecParams {
    pub n_items: usize,
    pub subset_size: usize,
    pub m_bits: usize,
    #[serde(with = "biguint_dec")]
    pub total: BigUint,
}

impl CodecParams {
    pub fn new(n_items: usize, subset_size: usize) -> Result<Self, CodecError> {
        if subset_size == 0 || subset_size > n_items {
            return Err(CodecError::InvalidParams {
                n_items,
                subset_size,
            });
        }
        let total = binomial(n_items, subset_size);
        let m_bits = (&total - 1u32).bits() as usize;
        Ok(Self {
            n_items,
            subset_size,
            m_bits,
            total,
        })
    }

    /// Number of `m`-bit strings, `2^m`.
    pub fn string_count(&self) -> BigUint {
        BigUint::one() << self.m_bits
    }
}

/// A subset with its rank. Members are 1-based and strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsetHandle {
    pub members: Vec<usize>,
    #[serde(with = "biguint_dec")]
    pub rank: BigUint,
}

impl SubsetHandle {
    /// Zero-based slot indices, for indexing into ordered lists.
    pub fn slots(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().map(|&m| m - 1)
    }
}

fn check_members(params: &CodecParams, members: &[usize]) -> Result<(), CodecError> {
    if members.len() != params.subset_size {
        return Err(CodecError::InvalidSubset(format!(
            "expected {} members, got {}",
            params.subset_size,
            members.len()
        )));
    }
    if members.iter().any(|&m| m == 0 || m > params.n_items) {
        return Err(CodecError::InvalidSubset(format!(
            "member outside 1..={}",
            params.n_items
        )));
    }
    if members.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CodecError::InvalidSubset(
            "members not strictly increasing".into(),
        ));
    }
    Ok(())
}

/// `a * b / d` in machine arithmetic, `None` when the result exceeds `u64`.
fn mul_div(a: u64, b: u64, d: u64) -> Option<u64> {
    match a.checked_mul(b) {
        Some(p) => Some(p / d),
        None => u64::try_from(u128::from(a) * u128::from(b) / u128::from(d)).ok(),
    }
}

/// Rows of Pascal's triangle that fit in `u64` entirely.
const PASCAL_ROWS: usize = 68;

/// `PASCAL[k][n] = C(n, k)` for `n < PASCAL_ROWS`, stored by column so that a
/// colex digit is a binary search over one slice.
static PASCAL: [[u64; PASCAL_ROWS]; PASCAL_ROWS] = pascal();

const fn pascal() -> [[u64; PASCAL_ROWS]; PASCAL_ROWS] {
    let mut t = [[0u64; PASCAL_ROWS]; PASCAL_ROWS];
    let mut n = 0;
    while n < PASCAL_ROWS {
        t[0][n] = 1;
        let mut k = 1;
        while k <= n {
            t[k][n] = t[k - 1][n - 1] + t[k][n - 1];
            k += 1;
        }
        n += 1;
    }
    t
}

/// `C(n, k)` in machine arithmetic, `None` when it exceeds `u64`.
fn binomial_u64(n: usize, k: usize) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    if n < PASCAL_ROWS {
        return Some(PASCAL[k][n]);
    }
    let k = k.min(n - k);
    let n64 = n as u64;
    match k {
        0 => return Some(1),
        1 => return Some(n64),
        2 => return mul_div(n64, n64 - 1, 2),
        _ => {}
    }
    // acc = C(n, i), so acc (n - i) / (i + 1) = C(n, i + 1) exactly.
    (0..k).try_fold(1u64, |acc, i| mul_div(acc, (n - i) as u64, (i + 1) as u64))
}

/// Machine-word fast path, taken when `C(N, l)` fits in `u64`.
fn total_u64(params: &CodecParams) -> Option<u64> {
    (&params.total).try_into().ok()
}

/// Colex rank when `C(N, l)` fits in `u64`; large subsets go through their
/// complement, whose rank is `C(N, l) - 1 - rank`.
fn rank_u64(n_items: usize, members: &[usize], total: u64) -> u64 {
    let colex = |sorted: &mut dyn Iterator<Item = usize>| -> u64 {
        // Every term is below C(N, l).
        sorted
            .enumerate()
            .map(|(i, s)| binomial_u64(s - 1, i + 1).expect("term below total"))
            .sum()
    };
    if 2 * members.len() > n_items {
        let mut next = 1;
        let mut comp = members.iter().copied().chain([n_items + 1]).flat_map(|s| {
            let gap = next..s;
            next = s + 1;
            gap
        });
        total - 1 - colex(&mut comp)
    } else {
        colex(&mut members.iter().copied())
    }
}

pub fn rank(params: &CodecParams, members: &[usize]) -> Result<BigUint, CodecError> {
    check_members(params, members)?;
    if let Some(total) = total_u64(params) {
        return Ok(BigUint::from(rank_u64(params.n_items, members, total)));
    }
    Ok(members
        .iter()
        .enumerate()
        .map(|(i, &s)| binomial(s - 1, i + 1))
        .sum())
}

/// Greedy colex decoding of `rest` in arbitrary precision.
fn unrank_big(n_items: usize, l: usize, mut rest: BigUint) -> Vec<usize> {
    let mut members = vec![0usize; l];
    // c is the zero-based value candidate, coef = C(c, i).
    let mut c = n_items - 1;
    let mut coef = binomial(c, l);
    for i in (1..=l).rev() {
        // Largest c with C(c, i) <= rest; C(c-1, i) = C(c, i) (c - i) / c.
        while coef > rest {
            coef = coef * (c - i) / c;
            c -= 1;
        }
        members[i - 1] = c + 1;
        rest -= &coef;
        if i > 1 {
            // C(c-1, i-1) = C(c, i) * i / c. c >= i here since C(c, i) > 0 or c = i - 1.
            if c == 0 {
                coef = BigUint::zero();
            } else {
                coef = if coef.is_zero() {
                    binomial(c - 1, i - 1)
                } else {
                    coef * i / c
                };
                c -= 1;
            }
        }
    }
    members
}

/// Largest `c <= hi` with `C(c, i) <= rest`, where `C(i - 1, i) = 0 <= rest`.
/// `fact` is `i!` as a float. Returns `c` and `C(c, i)`.
///
/// Searches the tabulated column when `hi` is small. Otherwise starts from
/// `C(c, i) ~ (c - (i - 1) / 2)^i / i!` and corrects exactly.
fn colex_digit(i: usize, rest: u64, hi: usize, fact: f64) -> (usize, u64) {
    if hi < PASCAL_ROWS {
        let column = &PASCAL[i][i - 1..=hi];
        let c = i + column.partition_point(|&v| v <= rest) - 2;
        return (c, column[c + 1 - i]);
    }
    let x = rest as f64;
    let guess = match i {
        _ if rest == 0 => 0.0,
        1 => x,
        2 => (2.0 * x).sqrt() + 0.5,
        3 => (6.0 * x).cbrt() + 1.0,
        _ => (x * fact).powf(1.0 / i as f64) + (i as f64 - 1.0) / 2.0,
    };
    let mut c = (guess as usize).clamp(i - 1, hi);
    // C(hi, i) <= C(N, l) because i <= l <= N / 2.
    let mut coef = binomial_u64(c, i).expect("below total");
    while c < hi {
        // C(c + 1, i) = C(c, i) (c + 1) / (c + 1 - i).
        let next = if coef == 0 {
            u64::from(c + 1 == i)
        } else {
            mul_div(coef, (c + 1) as u64, (c + 1 - i) as u64).expect("below total")
        };
        if next > rest {
            break;
        }
        c += 1;
        coef = next;
    }
    while coef > rest {
        // C(c - 1, i) = C(c, i) (c - i) / c.
        coef = mul_div(coef, (c - i) as u64, c as u64).expect("decreasing");
        c -= 1;
    }
    (c, coef)
}

/// Colex decoding when `C(N, l)` fits in `u64`.
///
/// Complementation reverses colex order, so large subsets are decoded
/// through their complement and every digit search involves at most `N / 2`
/// members.
fn unrank_u64(n_items: usize, l: usize, total: u64, r: u64) -> Vec<usize> {
    if 2 * l > n_items {
        let comp = unrank_u64(n_items, n_items - l, total, total - 1 - r);
        let mut members = Vec::with_capacity(l);
        let mut next = 1;
        for s in comp.into_iter().chain([n_items + 1]) {
            members.extend(next..s);
            next = s + 1;
        }
        return members;
    }
    let mut members = vec![0usize; l];
    let mut rest = r;
    let mut hi = n_items - 1;
    let mut fact: f64 = (2..=l).map(|k| k as f64).product();
    for i in (1..=l).rev() {
        let (c, coef) = colex_digit(i, rest, hi, fact);
        members[i - 1] = c + 1;
        rest -= coef;
        hi = c.saturating_sub(1);
        fact /= i as f64;
    }
    members
}

/// Inverse of [`rank`].
pub fn unrank(params: &CodecParams, r: &BigUint) -> Result<SubsetHandle, CodecError> {
    if r >= &params.total {
        return Err(CodecError::RankOutOfRange);
    }
    let (n, l) = (params.n_items, params.subset_size);
    let members = match (total_u64(params), u64::try_from(r)) {
        (Some(total), Ok(small)) => unrank_u64(n, l, total, small),
        _ => unrank_big(n, l, r.clone()),
    };
    Ok(SubsetHandle {
        members,
        rank: r.clone(),
    })
}

pub fn decode_string(params: &CodecParams, w: &BitString) -> Result<SubsetHandle, CodecError> {
    if w.len() != params.m_bits {
        return Err(CodecError::LengthMismatch {
            got: w.len(),
            expected: params.m_bits,
        });
    }
    if let (Some(total), true) = (total_u64(params), w.len() <= 64) {
        let r = w.to_u64() % total;
        return Ok(SubsetHandle {
            members: unrank_u64(params.n_items, params.subset_size, total, r),
            rank: BigUint::from(r),
        });
    }
    unrank(params, &w.to_biguint().mod_floor(&params.total))
}

/// All `m`-bit strings that decode to `s`, in increasing order.
pub fn preimages(params: &CodecParams, s: &SubsetHandle) -> Vec<BitString> {
    let limit = params.string_count();
    let mut out = Vec::with_capacity(2);
    let mut v = s.rank.clone();
    while v < limit {
        out.push(BitString::from_biguint(&v, params.m_bits).expect("below 2^m"));
        v += &params.total;
    }
    out
}

/// Number of preimages of each subset, indexed by rank. Enumerates all ranks.
pub fn preimage_histogram(params: &CodecParams) -> [u64; 3] {
    // Ranks below 2^m - total have two preimages, the rest one.
    let limit = params.string_count();
    let doubled = &limit - &params.total;
    let doubled: u64 = doubled.try_into().unwrap_or(u64::MAX);
    let total: u64 = (&params.total).try_into().unwrap_or(u64::MAX);
    [0, total - doubled, doubled]
}

mod biguint_dec {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        BigUint::parse_bytes(text.as_bytes(), 10)
            .ok_or_else(|| serde::de::Error::custom("invalid decimal integer"))
    }
}
