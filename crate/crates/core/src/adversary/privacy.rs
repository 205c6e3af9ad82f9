use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_integer::Integer;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::interactive_hashing::{solve, Gf2Basis, IhTranscript};
use crate::protocol::{
    alice_check_partition, arrange_partition, check_slots, good_bad_split, run_session_with,
    AliceStrategy, AliceView, ChannelSetup, HonestBob, ProtocolParams, SessionRngs,
};
use crate::subset_codec::decode_string;
use crate::typicality::restrict;

use super::istat::{istat_exact_tiny, Joint3};
use super::{run_trials, AttackError, AttackReport, Tally};

/// Rules a curious Alice may use to guess Bob's choice bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AliceGuess {
    Constant,
    Coin,
    /// The announced bit `a`.
    Announced,
    /// Whether `R1` has the smaller mean position.
    MeanPosition,
    /// Whether `R1` starts with the smaller position.
    FirstPosition,
}

impl AliceGuess {
    pub const ALL: [AliceGuess; 5] = [
        AliceGuess::Constant,
        AliceGuess::Coin,
        AliceGuess::Announced,
        AliceGuess::MeanPosition,
        AliceGuess::FirstPosition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AliceGuess::Constant => "constant",
            AliceGuess::Coin => "coin",
            AliceGuess::Announced => "announced",
            AliceGuess::MeanPosition => "mean_position",
            AliceGuess::FirstPosition => "first_position",
        }
    }
}

/// Honest Alice that ends with a guess of `c`.
#[derive(Debug, Clone, Copy)]
pub struct GuessingAlice(pub AliceGuess);

impl AliceStrategy for GuessingAlice {
    fn guess_choice(&mut self, view: &AliceView, rng: &mut ChaCha20Rng) -> Option<bool> {
        let mean = |r: &[usize]| r.iter().sum::<usize>() as f64 / r.len().max(1) as f64;
        Some(match self.0 {
            AliceGuess::Constant => false,
            AliceGuess::Coin => rng.gen(),
            AliceGuess::Announced => view.a.unwrap_or(false),
            AliceGuess::MeanPosition => mean(&view.r1) < mean(&view.r0),
            AliceGuess::FirstPosition => match (view.r0.first(), view.r1.first()) {
                (Some(a), Some(b)) => b < a,
                _ => false,
            },
        })
    }
}

/// Honest Bob with uniform `c` against a guessing Alice; success is `c_hat = c`.
pub fn bob_privacy_advantage(
    setup: &ChannelSetup,
    params: &ProtocolParams,
    guess: AliceGuess,
    trials: u64,
    seed: u64,
) -> Result<AttackReport, AttackError> {
    let tally = run_trials(trials, seed, |s| {
        let rngs = SessionRngs::from_seed(s);
        let c = ChaCha20Rng::seed_from_u64(crate::seeds::mix64(s)).gen::<bool>();
        // Decoding does not affect Alice's view, so the genie spares the search.
        let x = setup
            .input_dist
            .sample_string(params.n, &mut rngs.alice.clone());
        let mut bob = HonestBob::with_genie(c, x);
        let res = run_session_with(setup, params, &mut GuessingAlice(guess), &mut bob, rngs)?;
        let c_hat = res.trace.alice_guess.unwrap_or(false);
        Ok(Tally {
            applicable: 1,
            successes: (c_hat == c) as u64,
            ..Tally::default()
        })
    })?;
    let rep = AttackReport::new(
        &format!("bob_privacy:{}", guess.name()),
        params.n,
        trials,
        tally.applicable,
        tally.successes,
    )
    .with_bound(0.0);
    let (est, lo, hi) = (rep.estimate, rep.lower, rep.upper);
    Ok(rep
        .extra("advantage", (est - 0.5).abs())
        .extra("advantage_lower", lo - 0.5)
        .extra("advantage_upper", hi - 0.5)
        .extra(
            "interval_contains_zero",
            (lo <= 0.5 && 0.5 <= hi) as u8 as f64,
        ))
}

/// Alice's view distribution under `c = 0` and `c = 1` for a fixed input.
///
/// Keys are `(view, number of erasures)`; values are exact counts over the
/// common denominator `denominator`, so a view has probability
/// `sum_e count_e / denominator * p*^e (1-p*)^(n-e)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewDistributions {
    pub n: usize,
    pub denominator: u128,
    pub views: [BTreeMap<(String, usize), u128>; 2],
}

impl ViewDistributions {
    pub fn identical(&self) -> bool {
        self.views[0] == self.views[1]
    }

    pub fn probabilities(&self, c: bool, p_star: f64) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for ((v, e), count) in &self.views[c as usize] {
            let w = p_star.powi(*e as i32) * (1.0 - p_star).powi((self.n - e) as i32);
            *out.entry(v.clone()).or_insert(0.0) += *count as f64 / self.denominator as f64 * w;
        }
        out
    }

    /// `I_Stat(C; View)` for uniform `C`.
    pub fn istat(&self, p_star: f64) -> f64 {
        let p = [
            self.probabilities(false, p_star),
            self.probabilities(true, p_star),
        ];
        let keys: Vec<&String> = p[0]
            .keys()
            .chain(p[1].keys())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let joint = Joint3::from_fn([2, keys.len(), 1], |c, v, _| {
            0.5 * p[c].get(keys[v]).copied().unwrap_or(0.0)
        });
        istat_exact_tiny(&joint).expect("small joint")
    }
}

fn factorial(k: usize) -> u128 {
    (1..=k as u128).product()
}

/// Every ordered sequence of `rounds` linearly independent `m`-bit queries.
fn query_sequences(m: usize, rounds: usize) -> Vec<Vec<BitString>> {
    let all: Vec<BitString> = (1..1u64 << m).map(|v| BitString::from_u64(v, m)).collect();
    let mut out = Vec::new();
    let mut stack = vec![(Gf2Basis::default(), Vec::new())];
    while let Some((basis, seq)) = stack.pop() {
        if seq.len() == rounds {
            out.push(seq);
            continue;
        }
        for q in &all {
            let mut b = basis.clone();
            if b.insert(q) {
                let mut s = seq.clone();
                s.push(q.clone());
                stack.push((b, s));
            }
        }
    }
    out
}

/// Enumerate the erasure pattern, Bob's string `w`, both of his shuffles and
/// Alice's queries, and tabulate Alice's view up to the check for each `c`.
/// Needs a noiseless inner channel and a tiny instance.
pub fn exhaustive_alice_views(
    setup: &ChannelSetup,
    params: &ProtocolParams,
    x: &[usize],
) -> Result<ViewDistributions, AttackError> {
    let n = params.n;
    let m = params.m_bits;
    let half = params.half();
    if n > 8 || m > 4 || x.len() != n {
        return Err(AttackError::Instance(format!("n = {n}, m = {m} too large")));
    }
    let w0 = &setup.gec.inner;
    let deterministic: Option<Vec<usize>> = (0..w0.input_size())
        .map(|a| {
            let row = w0.row(a);
            row.iter().position(|&p| p == 1.0)
        })
        .collect();
    let Some(f) = deterministic else {
        return Err(AttackError::Instance(
            "inner channel must be noiseless".into(),
        ));
    };
    let erasure = setup.gec.erasure_symbol();
    let queries = query_sequences(m, m - 1);
    let q_count = queries.len() as u128;
    let strings = 1u128 << m;

    // Common denominator over all erasure patterns.
    let mut denominator: u128 = strings * q_count;
    for g in 0..=n {
        if g >= half + params.beta_n {
            let r = g - half - params.beta_n + (n - g);
            denominator = denominator.lcm(&(strings * factorial(g) * factorial(r) * q_count));
        }
    }

    let mut views: [BTreeMap<(String, usize), u128>; 2] = Default::default();
    for c in [false, true] {
        let table = &mut views[c as usize];
        let mut add = |key: String, e: usize, w: u128| {
            *table.entry((key, e)).or_insert(0) += w;
        };
        for mask in 0u32..1 << n {
            let y: Vec<usize> = (0..n)
                .map(|i| if mask >> i & 1 == 1 { erasure } else { f[x[i]] })
                .collect();
            let e = mask.count_ones() as usize;
            let split = good_bad_split(&y, erasure, params);
            if split.abort {
                add("abort:3".into(), e, denominator);
                continue;
            }
            let g = split.good.len();
            if g < half + params.beta_n {
                add("abort:4".into(), e, denominator);
                continue;
            }
            let r = g - half - params.beta_n + split.bad.len();
            let weight = denominator / (strings * factorial(g) * factorial(r) * q_count);
            for wv in 0..1u64 << m {
                let w = BitString::from_u64(wv, m);
                let t = decode_string(&params.codec, &w).expect("m-bit strings decode");
                for g_order in split.good.iter().copied().permutations(g) {
                    let spare = &g_order[half + params.beta_n..];
                    let rest: Vec<usize> = spare.iter().chain(&split.bad).copied().collect();
                    for rest_order in rest.iter().copied().permutations(r) {
                        let (r0, r1) = arrange_partition(half, &g_order, &rest_order, c, &t);
                        for qs in &queries {
                            let transcript = IhTranscript {
                                queries: qs.clone(),
                                responses: qs.iter().map(|q| q.dot(&w)).collect(),
                            };
                            let (v0, v1) = solve(&transcript, m).expect("independent queries");
                            let d = w == v1;
                            let a = d ^ c;
                            let t0 = decode_string(&params.codec, &v0).expect("decodes");
                            let t1 = decode_string(&params.codec, &v1).expect("decodes");
                            let (ta, tabar) = if a { (&t1, &t0) } else { (&t0, &t1) };
                            let y_r0 = restrict(&y, &check_slots(&r0, tabar));
                            let y_r1 = restrict(&y, &check_slots(&r1, ta));
                            let accepted = alice_check_partition(
                                x,
                                &r0,
                                &r1,
                                &t0,
                                &t1,
                                a,
                                &y_r0,
                                &y_r1,
                                w0,
                                params.eps_typ,
                            );
                            let key = format!(
                                "{r0:?}|{r1:?}|{}|{}|{}|{y_r0:?}|{y_r1:?}|{accepted}",
                                qs.iter().join(","),
                                transcript.responses.iter().map(|b| *b as u8).join(""),
                                a as u8,
                            );
                            add(key, e, weight);
                        }
                    }
                }
            }
        }
    }
    Ok(ViewDistributions {
        n,
        denominator,
        views,
    })
}
