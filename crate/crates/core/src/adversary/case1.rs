use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::bits::BitString;
use crate::protocol::{
    check_slots, erasures_in, run_session_with, Announcement, BobContext, BobOutput, BobStrategy,
    ChannelSetup, CheckContext, DecodeError, HonestAlice, ProtocolParams, SessionRngs, SetChoice,
    StringsMsg,
};
use crate::subset_codec::{decode_string, SubsetHandle};

use super::{run_trials, AttackError, AttackReport, Tally};

/// Place `bad` in the non-`T` slots first, then fill with `good`.
pub(crate) fn fill_set(
    half: usize,
    t: &SubsetHandle,
    bad: &[usize],
    good: &mut impl Iterator<Item = usize>,
) -> Vec<usize> {
    let in_t: Vec<bool> = {
        let mut v = vec![false; half];
        t.slots().for_each(|s| v[s] = true);
        v
    };
    let order: Vec<usize> = (0..half)
        .filter(|&s| !in_t[s])
        .chain((0..half).filter(|&s| in_t[s]))
        .collect();
    let mut r = vec![usize::MAX; half];
    let mut bad = bad.iter().copied();
    for s in order {
        r[s] = bad
            .next()
            .or_else(|| good.next())
            .expect("enough positions");
    }
    r
}

/// Guess an output symbol for an erased position from `W0` under `P_X`.
pub(crate) fn guess_symbol(setup: &ChannelSetup, rng: &mut ChaCha20Rng) -> usize {
    let x = setup.input_dist.sample(rng);
    setup.gec.inner.sample(x, rng)
}

pub(crate) fn announce_values(
    ctx: &CheckContext<'_>,
    positions: &[usize],
    rng: &mut ChaCha20Rng,
) -> Vec<usize> {
    let e = ctx.setup.gec.erasure_symbol();
    positions
        .iter()
        .map(|&i| {
            if ctx.y[i] == e {
                guess_symbol(ctx.setup, rng)
            } else {
                ctx.y[i]
            }
        })
        .collect()
}

/// Puts at least `2 alpha n` erasures in each set, keeping them off the
/// slots of its own subset, then picks `a` to minimise checked erasures.
#[derive(Debug, Clone, Default)]
pub struct Case1Bob {
    pub applicable: bool,
    pub erased_checked: Option<usize>,
}

impl BobStrategy for Case1Bob {
    fn choose_sets(
        &mut self,
        ctx: &BobContext<'_>,
        rng: &mut ChaCha20Rng,
    ) -> Result<SetChoice, (u8, String)> {
        let p = ctx.params;
        let u_min = (2.0 * p.alpha_n() - 1e-9).ceil().max(0.0) as usize;
        if ctx.split.bad.len() < 2 * u_min {
            self.applicable = false;
            return Err((4, "not applicable: too few erasures".into()));
        }
        self.applicable = true;
        let w: BitString = (0..p.m_bits).map(|_| rng.gen::<bool>()).collect();
        let t = decode_string(&p.codec, &w).expect("m-bit strings decode");
        let mut bad = ctx.split.bad.clone();
        bad.shuffle(rng);
        let mut good = ctx.split.good.clone();
        good.shuffle(rng);
        let (b0, b1) = bad.split_at(bad.len().div_ceil(2));
        let mut good = good.into_iter();
        let r0 = fill_set(p.half(), &t, b0, &mut good);
        let r1 = fill_set(p.half(), &t, b1, &mut good);
        Ok(SetChoice { r0, r1, w })
    }

    fn announce(&mut self, ctx: &CheckContext<'_>, rng: &mut ChaCha20Rng) -> Announcement {
        let e = ctx.setup.gec.erasure_symbol();
        let checked = |a: bool| {
            (
                check_slots(ctx.r0, ctx.t(!a)),
                check_slots(ctx.r1, ctx.t(a)),
            )
        };
        let cost = |a: bool| {
            let (p0, p1) = checked(a);
            erasures_in(ctx.y, &p0, e) + erasures_in(ctx.y, &p1, e)
        };
        let a = cost(true) < cost(false);
        self.erased_checked = Some(cost(a));
        let (p0, p1) = checked(a);
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

/// `2^{-alpha n (C(W0) - 2 eps)}`.
pub fn case1_bound(params: &ProtocolParams) -> f64 {
    (-params.alpha_n() * (params.capacity - 2.0 * params.eps_typ)).exp2()
}

/// Success means Alice accepts the check; trials with fewer than `4 alpha n`
/// erasures are not applicable.
pub fn attack_case1(
    setup: &ChannelSetup,
    params: &ProtocolParams,
    trials: u64,
    seed: u64,
) -> Result<AttackReport, AttackError> {
    let tally = run_trials(trials, seed, |s| {
        let mut bob = Case1Bob::default();
        let res = run_session_with(
            setup,
            params,
            &mut HonestAlice,
            &mut bob,
            SessionRngs::from_seed(s),
        )?;
        let mut t = Tally::default();
        if bob.applicable {
            t.applicable = 1;
            t.successes = res.trace.alice_accepted as u64;
            if let Some(e) = bob.erased_checked {
                t.add(format!("erased_checked={e:03}"), 1);
            }
        }
        Ok(t)
    })?;
    let mut erased_sum = 0u64;
    let mut pow_sum = 0.0;
    for (k, v) in &tally.counters {
        if let Some(e) = k.strip_prefix("erased_checked=") {
            let e: u64 = e.parse().expect("numeric key");
            erased_sum += e * v;
            pow_sum += *v as f64 * (-(e as f64)).exp2();
        }
    }
    let denom = tally.applicable.max(1) as f64;
    let bound = case1_bound(params);
    Ok(
        AttackReport::new("case1", params.n, trials, tally.applicable, tally.successes)
            .with_bound(bound)
            .extra("mean_erased_checked", erased_sum as f64 / denom)
            .extra("mean_two_pow_neg_erased_checked", pow_sum / denom)
            .extra("bound_times_4", 4.0 * bound),
    )
}
