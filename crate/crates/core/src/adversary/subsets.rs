use num_traits::ToPrimitive;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::protocol::ProtocolParams;
use crate::subset_codec::{binomial, decode_string, CodecParams};

use super::{run_trials, AttackError, AttackReport, Tally};

/// Largest instance enumerated exhaustively.
const EXHAUSTIVE_LIMIT: u64 = 1 << 22;

/// Exact good fractions of one set `R` with erasures at `erased_slots`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodSubsetFraction {
    pub half: usize,
    pub beta_n: usize,
    pub erased: usize,
    pub alpha_n: f64,
    pub subsets: u64,
    pub good_subsets: u64,
    pub subset_fraction: f64,
    pub strings: u64,
    pub good_strings: u64,
    pub string_fraction: f64,
    /// `(1 - 2 alpha)^{alpha n}`.
    pub lemma_bound: f64,
}

impl GoodSubsetFraction {
    pub fn lemma_holds(&self) -> bool {
        self.subset_fraction < self.lemma_bound
    }
}

fn lemma_bound(alpha: f64, alpha_n: f64) -> f64 {
    (1.0 - 2.0 * alpha).powf(alpha_n)
}

fn erased_mask(half: usize, erased_slots: &[usize]) -> Result<Vec<bool>, AttackError> {
    let mut mask = vec![false; half];
    for &s in erased_slots {
        if s >= half || mask[s] {
            return Err(AttackError::Instance(format!("bad erased slot {s}")));
        }
        mask[s] = true;
    }
    Ok(mask)
}

fn is_good(members: impl Iterator<Item = usize>, mask: &[bool], alpha_n: f64) -> bool {
    (members.filter(|&s| mask[s]).count() as f64) < alpha_n
}

/// Enumerate every `beta n`-subset of the `n/2` slots and every `m`-bit string.
pub fn good_subset_fraction_exact(
    params: &ProtocolParams,
    erased_slots: &[usize],
) -> Result<GoodSubsetFraction, AttackError> {
    let half = params.half();
    let l = params.beta_n;
    let mask = erased_mask(half, erased_slots)?;
    let subsets = binomial(half, l).to_u64().unwrap_or(u64::MAX);
    if subsets > EXHAUSTIVE_LIMIT || params.m_bits > 22 {
        return Err(AttackError::Instance(format!(
            "C({half},{l}) too large to enumerate"
        )));
    }
    let alpha_n = params.alpha_n();
    // Lexicographic walk over l-combinations of 0..half.
    let mut comb: Vec<usize> = (0..l).collect();
    let mut good_subsets = 0u64;
    loop {
        if is_good(comb.iter().copied(), &mask, alpha_n) {
            good_subsets += 1;
        }
        let Some(i) = (0..l).rev().find(|&i| comb[i] < half - l + i) else {
            break;
        };
        comb[i] += 1;
        for j in i + 1..l {
            comb[j] = comb[j - 1] + 1;
        }
    }
    let strings = 1u64 << params.m_bits;
    let good_strings = (0..strings)
        .filter(|&v| {
            let t = decode_string(&params.codec, &BitString::from_u64(v, params.m_bits))
                .expect("m-bit strings decode");
            is_good(t.slots(), &mask, alpha_n)
        })
        .count() as u64;
    Ok(GoodSubsetFraction {
        half,
        beta_n: l,
        erased: erased_slots.len(),
        alpha_n,
        subsets,
        good_subsets,
        subset_fraction: good_subsets as f64 / subsets as f64,
        strings,
        good_strings,
        string_fraction: good_strings as f64 / strings as f64,
        lemma_bound: lemma_bound(params.alpha, alpha_n),
    })
}

/// Sample uniform `m`-bit strings and count those decoding to a good subset.
/// The reference bound is `2 (1 - 2 alpha)^{alpha n}`.
pub fn attack_good_subset_fraction(
    params: &ProtocolParams,
    erased_slots: &[usize],
    trials: u64,
    seed: u64,
) -> Result<AttackReport, AttackError> {
    let mask = erased_mask(params.half(), erased_slots)?;
    let codec: &CodecParams = &params.codec;
    let alpha_n = params.alpha_n();
    let tally = run_trials(trials, seed, |s| {
        let mut rng = ChaCha20Rng::seed_from_u64(s);
        let w: BitString = (0..params.m_bits).map(|_| rng.gen::<bool>()).collect();
        let t = decode_string(codec, &w).expect("m-bit strings decode");
        Ok(Tally {
            applicable: 1,
            successes: is_good(t.slots(), &mask, alpha_n) as u64,
            ..Tally::default()
        })
    })?;
    let bound = lemma_bound(params.alpha, alpha_n);
    let mut rep = AttackReport::new(
        "good_subset_fraction",
        params.n,
        trials,
        tally.applicable,
        tally.successes,
    )
    .with_bound(2.0 * bound)
    .extra("lemma_bound", bound)
    .extra("erased", erased_slots.len() as f64);
    if let Ok(exact) = good_subset_fraction_exact(params, erased_slots) {
        rep = rep
            .extra("exact_subset_fraction", exact.subset_fraction)
            .extra("exact_string_fraction", exact.string_fraction);
    }
    Ok(rep)
}
