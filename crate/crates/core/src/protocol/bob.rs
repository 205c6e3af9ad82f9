use std::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::channel::Dmc;
use crate::interactive_hashing::{solve, IhOutcome, IhResponse, IhTranscript};
use crate::subset_codec::{decode_string, SubsetHandle};
use crate::typicality::{for_each_cond_typical, is_cond_typical, restrict, TypicalityError};
use crate::uhash::{serialize_symbols, HashFunction};

use super::message::{Message, StringsMsg};
use super::params::{ChannelSetup, ProtocolParams};
use super::{check_slots, pick, remaining_slots};

/// Good (unerased) and bad (erased) positions of Bob's received string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodBadSplit {
    pub good: Vec<usize>,
    pub bad: Vec<usize>,
    /// Step-3 rule: `|G| < (1 - p* - alpha) n`.
    pub abort: bool,
}

pub fn good_bad_split(y: &[usize], erasure_symbol: usize, params: &ProtocolParams) -> GoodBadSplit {
    let (bad, good): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| y[i] == erasure_symbol);
    // Slack keeps exact-integer thresholds such as 0.65 * 20 = 13 on the non-abort side.
    let abort = (good.len() as f64) < params.good_threshold() - 1e-9;
    GoodBadSplit { good, bad, abort }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{good} good positions cannot fill n/2 + beta n = {needed}")]
pub struct InfeasibleSplit {
    pub good: usize,
    pub needed: usize,
}

/// Step 4: `R_c` is a uniformly ordered `n/2`-sample of `good`; the `T` slots
/// of `R_cbar` take further good positions and the other slots take whatever is left.
pub fn bob_partition<R: Rng + ?Sized>(
    good: &[usize],
    bad: &[usize],
    c: bool,
    t: &SubsetHandle,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>), InfeasibleSplit> {
    let n = good.len() + bad.len();
    let half = n / 2;
    let beta_n = t.members.len();
    if good.len() < half + beta_n {
        return Err(InfeasibleSplit {
            good: good.len(),
            needed: half + beta_n,
        });
    }
    let mut g = good.to_vec();
    g.shuffle(rng);
    let mut rest: Vec<usize> = g[half + beta_n..].iter().chain(bad).copied().collect();
    rest.shuffle(rng);
    Ok(arrange_partition(half, &g, &rest, c, t))
}

/// The deterministic part of [`bob_partition`]: `good_order[..n/2]` becomes
/// `R_c`, the next `beta n` fill the `T` slots of `R_cbar` and `rest_order`
/// fills its other slots.
pub fn arrange_partition(
    half: usize,
    good_order: &[usize],
    rest_order: &[usize],
    c: bool,
    t: &SubsetHandle,
) -> (Vec<usize>, Vec<usize>) {
    let r_c = good_order[..half].to_vec();
    let checked = &good_order[half..half + t.members.len()];
    let mut r_cbar = vec![usize::MAX; half];
    for (slot, &pos) in t.slots().zip(checked) {
        r_cbar[slot] = pos;
    }
    let mut rest = rest_order.iter().copied();
    for cell in r_cbar.iter_mut().filter(|v| **v == usize::MAX) {
        *cell = rest.next().expect("sizes add up to n");
    }
    if c {
        (r_cbar, r_c)
    } else {
        (r_c, r_cbar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeMode {
    /// Search all conditionally typical inputs.
    #[default]
    Exhaustive,
    /// Trust the true input to be the only survivor; skips the search.
    Genie,
}

#[derive(Debug, thiserror::Error)]
pub enum DecodeError {
    #[error(transparent)]
    Typicality(#[from] TypicalityError),
    #[error("hash input is {got} bits, expected {expected}")]
    HashInput { got: usize, expected: usize },
}

fn hash_symbols(h: &HashFunction, x: &[usize], alphabet: usize) -> Option<BitString> {
    let bits = serialize_symbols(x, alphabet).ok()?;
    h.apply(&bits).ok()
}

/// Step 8: the unique typical candidate matching `g` is hashed by `h`; any
/// other count gives the all-zero string.
#[allow(clippy::too_many_arguments)]
pub fn bob_decode(
    y_qc: &[usize],
    g: &HashFunction,
    g_val: &BitString,
    h: &HashFunction,
    w0: &Dmc<f64>,
    eps: f64,
    limit: u64,
) -> Result<BitString, DecodeError> {
    let alphabet = w0.input_size();
    let expected = y_qc.len() * crate::uhash::symbol_width(alphabet);
    for f in [g, h] {
        if f.in_bits() != expected {
            return Err(DecodeError::HashInput {
                got: f.in_bits(),
                expected,
            });
        }
    }
    let mut survivor: Option<Vec<usize>> = None;
    let mut count = 0usize;
    for_each_cond_typical(y_qc, w0, None, eps, limit, |x| {
        if hash_symbols(g, x, alphabet).as_ref() == Some(g_val) {
            count += 1;
            if count > 1 {
                return ControlFlow::Break(());
            }
            survivor = Some(x.to_vec());
        }
        ControlFlow::Continue(())
    })?;
    Ok(match (count, survivor) {
        (1, Some(x)) => {
            hash_symbols(h, &x, alphabet).unwrap_or_else(|| BitString::zeros(h.out_bits()))
        }
        _ => BitString::zeros(h.out_bits()),
    })
}

/// Step 8 with the true input supplied: succeeds iff it is typical and matches `g`.
pub fn genie_decode(
    x_qc: &[usize],
    y_qc: &[usize],
    g: &HashFunction,
    g_val: &BitString,
    h: &HashFunction,
    w0: &Dmc<f64>,
    eps: f64,
) -> BitString {
    let alphabet = w0.input_size();
    let typical = matches!(is_cond_typical(y_qc, x_qc, w0, eps), Ok(true));
    if typical && hash_symbols(g, x_qc, alphabet).as_ref() == Some(g_val) {
        if let Some(s) = hash_symbols(h, x_qc, alphabet) {
            return s;
        }
    }
    BitString::zeros(h.out_bits())
}

/// Bob's view at step 3.
pub struct BobContext<'a> {
    pub params: &'a ProtocolParams,
    pub setup: &'a ChannelSetup,
    pub y: &'a [usize],
    pub split: &'a GoodBadSplit,
}

/// Bob's view after interactive hashing.
pub struct CheckContext<'a> {
    pub params: &'a ProtocolParams,
    pub setup: &'a ChannelSetup,
    pub y: &'a [usize],
    pub split: &'a GoodBadSplit,
    pub r0: &'a [usize],
    pub r1: &'a [usize],
    pub w: &'a BitString,
    /// Outputs with `d` set when `w` is one of them.
    pub outcome: &'a IhOutcome,
    pub t0: &'a SubsetHandle,
    pub t1: &'a SubsetHandle,
}

impl CheckContext<'_> {
    pub fn t(&self, i: bool) -> &SubsetHandle {
        pick(self.t0, self.t1, i)
    }

    pub fn r(&self, i: bool) -> &[usize] {
        if i {
            self.r1
        } else {
            self.r0
        }
    }
}

/// The sets to announce and the interactive-hashing input.
#[derive(Debug, Clone)]
pub struct SetChoice {
    pub r0: Vec<usize>,
    pub r1: Vec<usize>,
    pub w: BitString,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Announcement {
    pub a: bool,
    pub y_r0: Vec<usize>,
    pub y_r1: Vec<usize>,
}

/// What Bob ends the session with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BobOutput {
    pub c: bool,
    pub s: BitString,
}

/// Hooks for a possibly deviating Bob.
pub trait BobStrategy {
    /// Steps 3-4. `Err((step, reason))` aborts.
    fn choose_sets(
        &mut self,
        ctx: &BobContext<'_>,
        rng: &mut ChaCha20Rng,
    ) -> Result<SetChoice, (u8, String)>;

    fn respond(&mut self, query: &BitString, w: &BitString) -> bool {
        query.dot(w)
    }

    /// Step 6.
    fn announce(&mut self, ctx: &CheckContext<'_>, rng: &mut ChaCha20Rng) -> Announcement;

    /// Step 8.
    fn finish(
        &mut self,
        ctx: &CheckContext<'_>,
        strings: &StringsMsg,
    ) -> Result<Option<BobOutput>, DecodeError>;
}

/// The announcement an honest Bob makes for choice `c`.
pub fn honest_announcement(ctx: &CheckContext<'_>, c: bool) -> Announcement {
    // w is always an output of the hashing, so d is set.
    let d = ctx.outcome.d.unwrap_or(false);
    let a = d ^ c;
    let y_r0 = restrict(ctx.y, &check_slots(ctx.r0, ctx.t(!a)));
    let y_r1 = restrict(ctx.y, &check_slots(ctx.r1, ctx.t(a)));
    Announcement { a, y_r0, y_r1 }
}

#[derive(Debug, Clone)]
pub struct HonestBob {
    pub c: bool,
    pub mode: DecodeMode,
    pub search_limit: u64,
    /// Alice's input, read only in genie mode.
    pub genie_input: Option<Vec<usize>>,
    a: Option<bool>,
}

impl HonestBob {
    pub fn new(c: bool) -> Self {
        Self {
            c,
            mode: DecodeMode::Exhaustive,
            search_limit: crate::typicality::DEFAULT_SEARCH_LIMIT,
            genie_input: None,
            a: None,
        }
    }

    pub fn with_genie(c: bool, x: Vec<usize>) -> Self {
        Self {
            mode: DecodeMode::Genie,
            genie_input: Some(x),
            ..Self::new(c)
        }
    }
}

impl BobStrategy for HonestBob {
    fn choose_sets(
        &mut self,
        ctx: &BobContext<'_>,
        rng: &mut ChaCha20Rng,
    ) -> Result<SetChoice, (u8, String)> {
        if ctx.split.abort {
            return Err((3, format!("only {} good positions", ctx.split.good.len())));
        }
        let m = ctx.params.m_bits;
        let w: BitString = (0..m).map(|_| rng.gen::<bool>()).collect();
        let t = decode_string(&ctx.params.codec, &w).expect("m-bit strings decode");
        let (r0, r1) = bob_partition(&ctx.split.good, &ctx.split.bad, self.c, &t, rng)
            .map_err(|e| (4, e.to_string()))?;
        Ok(SetChoice { r0, r1, w })
    }

    fn announce(&mut self, ctx: &CheckContext<'_>, _rng: &mut ChaCha20Rng) -> Announcement {
        let ann = honest_announcement(ctx, self.c);
        self.a = Some(ann.a);
        ann
    }

    fn finish(
        &mut self,
        ctx: &CheckContext<'_>,
        strings: &StringsMsg,
    ) -> Result<Option<BobOutput>, DecodeError> {
        let c = self.c;
        let a = self.a.expect("announced before strings");
        // Q_c drops the slots checked for R_c: T_abar for R0, T_a for R1.
        let q = remaining_slots(ctx.r(c), ctx.t(a ^ !c));
        let y_q = restrict(ctx.y, &q);
        let (g, g_val) = strings.g(c);
        let h = strings.h(c);
        let w0 = &ctx.setup.gec.inner;
        let s = match (self.mode, &self.genie_input) {
            (DecodeMode::Genie, Some(x)) => {
                genie_decode(&restrict(x, &q), &y_q, g, g_val, h, w0, ctx.params.eps_typ)
            }
            _ => bob_decode(&y_q, g, g_val, h, w0, ctx.params.eps_typ, self.search_limit)?,
        };
        Ok(Some(BobOutput { c, s }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BobPhase {
    Start,
    Hashing,
    AwaitStrings,
    Done,
    Aborted,
}

fn context<'s>(
    params: &'s ProtocolParams,
    setup: &'s ChannelSetup,
    y: &'s [usize],
    split: &'s GoodBadSplit,
    st: &'s BobAfterSets,
) -> Option<CheckContext<'s>> {
    let (outcome, t0, t1) = st.checked.as_ref()?;
    Some(CheckContext {
        params,
        setup,
        y,
        split,
        r0: &st.choice.r0,
        r1: &st.choice.r1,
        w: &st.choice.w,
        outcome,
        t0,
        t1,
    })
}

struct BobAfterSets {
    choice: SetChoice,
    ih: IhTranscript,
    checked: Option<(IhOutcome, SubsetHandle, SubsetHandle)>,
}

pub struct BobMachine<'a, S: BobStrategy + ?Sized> {
    params: &'a ProtocolParams,
    setup: &'a ChannelSetup,
    strategy: &'a mut S,
    rng: ChaCha20Rng,
    y: Vec<usize>,
    split: GoodBadSplit,
    phase: BobPhase,
    state: Option<BobAfterSets>,
    output: Option<BobOutput>,
}

impl<'a, S: BobStrategy + ?Sized> BobMachine<'a, S> {
    pub fn new(
        params: &'a ProtocolParams,
        setup: &'a ChannelSetup,
        strategy: &'a mut S,
        rng: ChaCha20Rng,
        y: Vec<usize>,
    ) -> Self {
        let split = good_bad_split(&y, setup.gec.erasure_symbol(), params);
        Self {
            params,
            setup,
            strategy,
            rng,
            y,
            split,
            phase: BobPhase::Start,
            state: None,
            output: None,
        }
    }

    pub fn phase(&self) -> BobPhase {
        self.phase
    }

    pub fn split(&self) -> &GoodBadSplit {
        &self.split
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn output(&self) -> Option<&BobOutput> {
        self.output.as_ref()
    }

    pub fn sets(&self) -> Option<&SetChoice> {
        self.state.as_ref().map(|s| &s.choice)
    }

    pub fn ih_result(&self) -> Option<&(IhOutcome, SubsetHandle, SubsetHandle)> {
        self.state.as_ref().and_then(|s| s.checked.as_ref())
    }

    fn fail(&mut self, step: u8, reason: impl Into<String>) -> Vec<Message> {
        self.phase = BobPhase::Aborted;
        vec![Message::Abort {
            step,
            reason: reason.into(),
        }]
    }

    /// Steps 3-4: announce the sets, or abort.
    pub fn start(&mut self) -> Vec<Message> {
        if self.phase != BobPhase::Start {
            return Vec::new();
        }
        let ctx = BobContext {
            params: self.params,
            setup: self.setup,
            y: &self.y,
            split: &self.split,
        };
        match self.strategy.choose_sets(&ctx, &mut self.rng) {
            Err((step, reason)) => self.fail(step, reason),
            Ok(choice) => {
                let msg = Message::SetsAnnounce {
                    r0: choice.r0.clone(),
                    r1: choice.r1.clone(),
                };
                self.state = Some(BobAfterSets {
                    choice,
                    ih: IhTranscript::default(),
                    checked: None,
                });
                self.phase = BobPhase::Hashing;
                vec![msg]
            }
        }
    }

    pub fn receive(&mut self, msg: &Message) -> Result<Vec<Message>, DecodeError> {
        match (self.phase, msg) {
            (BobPhase::Done | BobPhase::Aborted, _) => Ok(Vec::new()),
            (_, Message::Abort { .. }) => {
                self.phase = BobPhase::Aborted;
                Ok(Vec::new())
            }
            (BobPhase::Hashing, Message::IhQuery(q)) => {
                let mut st = self.state.take().expect("sets announced");
                let m = self.params.m_bits;
                if q.index != st.ih.queries.len() || q.bits.len() != m {
                    self.state = Some(st);
                    return Ok(self.fail(5, "malformed query"));
                }
                let bit = self.strategy.respond(&q.bits, &st.choice.w);
                st.ih.queries.push(q.bits.clone());
                st.ih.responses.push(bit);
                let mut out = vec![Message::IhResponse(IhResponse {
                    index: q.index,
                    bit,
                })];
                if st.ih.responses.len() == m - 1 {
                    let decoded = solve(&st.ih, m).ok().and_then(|(w0, w1)| {
                        let t0 = decode_string(&self.params.codec, &w0).ok()?;
                        let t1 = decode_string(&self.params.codec, &w1).ok()?;
                        let outcome = IhOutcome { w0, w1, d: None }.with_input(&st.choice.w);
                        Some((outcome, t0, t1))
                    });
                    let Some(checked) = decoded else {
                        self.state = Some(st);
                        return Ok(self.fail(5, "queries are dependent"));
                    };
                    st.checked = Some(checked);
                    let ann = {
                        let ctx = context(self.params, self.setup, &self.y, &self.split, &st)
                            .expect("just set");
                        self.strategy.announce(&ctx, &mut self.rng)
                    };
                    out.push(Message::CheckAnnounce {
                        a: ann.a,
                        y_r0: ann.y_r0,
                        y_r1: ann.y_r1,
                    });
                    self.phase = BobPhase::AwaitStrings;
                }
                self.state = Some(st);
                Ok(out)
            }
            (BobPhase::AwaitStrings, Message::Strings(strings)) => {
                let st = self.state.take().expect("sets announced");
                let result = {
                    let ctx = context(self.params, self.setup, &self.y, &self.split, &st)
                        .expect("hashing finished");
                    self.strategy.finish(&ctx, strings)
                };
                self.state = Some(st);
                self.output = result?;
                self.phase = BobPhase::Done;
                Ok(Vec::new())
            }
            (phase, other) => {
                let step = match phase {
                    BobPhase::Start | BobPhase::Hashing => 5,
                    _ => 7,
                };
                Ok(self.fail(step, format!("unexpected {} message", other.kind())))
            }
        }
    }
}
