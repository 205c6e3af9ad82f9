use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::protocol::{
    check_slots, erasures_in, remaining_slots, run_session_with, Announcement, BobContext,
    BobOutput, BobStrategy, ChannelSetup, CheckContext, DecodeError, HonestAlice, ProtocolParams,
    SessionRngs, SetChoice, StringsMsg,
};
use crate::subset_codec::decode_string;
use crate::uhash::lhl_bound;

use super::case1::{announce_values, fill_set};
use super::{run_trials, AttackError, AttackReport, Tally};

/// Fills `R0` with good positions and pushes every erasure it can into `R1`,
/// off the slots of its own subset; checks `R1` against that subset.
#[derive(Debug, Clone, Default)]
pub struct Case2Bob;

impl BobStrategy for Case2Bob {
    fn choose_sets(
        &mut self,
        ctx: &BobContext<'_>,
        rng: &mut ChaCha20Rng,
    ) -> Result<SetChoice, (u8, String)> {
        let p = ctx.params;
        let half = p.half();
        let w: BitString = (0..p.m_bits).map(|_| rng.gen::<bool>()).collect();
        let t = decode_string(&p.codec, &w).expect("m-bit strings decode");
        let mut good = ctx.split.good.clone();
        good.shuffle(rng);
        let mut bad = ctx.split.bad.clone();
        bad.shuffle(rng);
        // R1 takes as many erasures as it has slots; the overflow lands in R0.
        let in_r1 = bad.len().min(half);
        let (b1, b0) = bad.split_at(in_r1);
        let keep = half - b0.len();
        let mut r0: Vec<usize> = good[..keep.min(good.len())].to_vec();
        r0.extend_from_slice(b0);
        let mut rest = good[r0.len() - b0.len()..].iter().copied();
        let r1 = fill_set(half, &t, b1, &mut rest);
        Ok(SetChoice { r0, r1, w })
    }

    fn announce(&mut self, ctx: &CheckContext<'_>, rng: &mut ChaCha20Rng) -> Announcement {
        // T_a is Bob's own subset, so R1 is checked where it holds good positions.
        let a = ctx.outcome.d.unwrap_or(false);
        let p0 = check_slots(ctx.r0, ctx.t(!a));
        let p1 = check_slots(ctx.r1, ctx.t(a));
        Announcement {
            a,
            y_r0: announce_values(ctx, &p0, rng),
            y_r1: announce_values(ctx, &p1, rng),
        }
    }

    fn finish(
        &mut self,
        _ctx: &CheckContext<'_>,
        _strings: &StringsMsg,
    ) -> Result<Option<BobOutput>, DecodeError> {
        Ok(None)
    }
}

/// Min-entropy left in `x^{Q1}` against the extracted length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyBudget {
    /// `(mu n - 5 alpha n) H(X) - mu n (H(X|Y0) + eps)`.
    pub unrounded: f64,
    /// The same with the rounded check-hash length `g_len`.
    pub rounded: f64,
    /// `k + gamma n`, which `unrounded` must cover by construction of `k`.
    pub required: f64,
    /// Leftover-hash distance bound for `k` bits from `rounded` min-entropy.
    pub lhl_distance: f64,
}

impl EntropyBudget {
    pub fn of(params: &ProtocolParams) -> Self {
        let n = params.n as f64;
        let mu_n = params.mu_n as f64;
        let base = (mu_n - 5.0 * params.alpha_n()) * params.h_x;
        let unrounded = base - mu_n * (params.h_x_given_y0 + params.eps_typ);
        let rounded = base - params.g_len as f64;
        Self {
            unrounded,
            rounded,
            required: params.k as f64 + params.gamma * n,
            lhl_distance: lhl_bound(rounded, params.k).sd_bound,
        }
    }

    pub fn holds(&self) -> bool {
        self.unrounded + 1e-9 >= self.required
    }
}

/// Success means Alice accepts. Among accepted trials that meet the three
/// premises `u(R0) < 2 alpha n`, `u(R1^{T_a}) < alpha n` and
/// `|B| > (p* - alpha) n`, `u(Q1) >= (p* - 4 alpha) n` is checked;
/// `accepted_claim_violated` counts violations over all accepted trials.
pub fn attack_case2_entropy(
    setup: &ChannelSetup,
    params: &ProtocolParams,
    trials: u64,
    seed: u64,
) -> Result<AttackReport, AttackError> {
    let e = setup.gec.erasure_symbol();
    let n = params.n as f64;
    let alpha_n = params.alpha_n();
    let tally = run_trials(trials, seed, |s| {
        let res = run_session_with(
            setup,
            params,
            &mut HonestAlice,
            &mut Case2Bob,
            SessionRngs::from_seed(s),
        )?;
        let mut t = Tally {
            applicable: 1,
            ..Tally::default()
        };
        let tr = &res.trace;
        if !tr.alice_accepted {
            return Ok(t);
        }
        t.successes = 1;
        let (t0, t1) = tr.subsets.as_ref().expect("accepted after hashing");
        let a = tr.a.expect("accepted after check");
        let t_a = if a { t1 } else { t0 };
        let u_r0 = erasures_in(&tr.y, &tr.r0, e) as f64;
        let u_checked = erasures_in(&tr.y, &check_slots(&tr.r1, t_a), e) as f64;
        let u_q1 = erasures_in(&tr.y, &remaining_slots(&tr.r1, t_a), e) as f64;
        let b = tr.erasures as f64;
        let violated = u_q1 < (params.p_star - 4.0 * params.alpha) * n - 1e-9;
        t.add("accepted_claim_violated", violated as u64);
        let few_erasures = b <= (params.p_star - alpha_n / n) * n;
        t.add(
            "violated_with_few_erasures",
            (violated && few_erasures) as u64,
        );
        if u_r0 >= 2.0 * alpha_n {
            t.add("premise_u_r0_failed", 1);
        } else if u_checked >= alpha_n {
            t.add("premise_checked_failed", 1);
        } else if few_erasures {
            t.add("premise_erasures_failed", 1);
        } else {
            t.add("claim_checked", 1);
            t.add("claim_violated", violated as u64);
        }
        Ok(t)
    })?;
    let budget = EntropyBudget::of(params);
    let mut rep = AttackReport::new("case2", params.n, trials, tally.applicable, tally.successes)
        .with_bound(budget.lhl_distance)
        .extra("budget_unrounded", budget.unrounded)
        .extra("budget_rounded", budget.rounded)
        .extra("budget_required", budget.required)
        .extra("budget_holds", budget.holds() as u8 as f64);
    for key in [
        "claim_checked",
        "claim_violated",
        "accepted_claim_violated",
        "violated_with_few_erasures",
        "premise_u_r0_failed",
        "premise_checked_failed",
        "premise_erasures_failed",
    ] {
        rep = rep.extra(key, tally.get(key) as f64);
    }
    Ok(rep)
}
