use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::bits::BitString;
use crate::channel::Dmc;
use crate::interactive_hashing::{IhOutcome, IhVerifier};
use crate::subset_codec::{decode_string, SubsetHandle};
use crate::typicality::{is_cond_typical, restrict};
use crate::uhash::{sample_hash, serialize_symbols};

use super::message::{Message, StringsMsg};
use super::params::{ChannelSetup, ProtocolParams};
use super::{check_slots, pick, remaining_slots};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SetError {
    #[error("position {0} repeated or out of range")]
    RepeatedPosition(usize),
    #[error("set sizes {r0} and {r1}, expected {expected} each")]
    BadSize {
        r0: usize,
        r1: usize,
        expected: usize,
    },
}

/// Step 4 on Alice's side: `R0`, `R1` are disjoint, of size `n/2`, and cover `[n]`.
pub fn alice_validate_sets(r0: &[usize], r1: &[usize], n: usize) -> Result<(), SetError> {
    if r0.len() != n / 2 || r1.len() != n / 2 || !n.is_multiple_of(2) {
        return Err(SetError::BadSize {
            r0: r0.len(),
            r1: r1.len(),
            expected: n / 2,
        });
    }
    let mut seen = vec![false; n];
    for &i in r0.iter().chain(r1) {
        if i >= n || seen[i] {
            return Err(SetError::RepeatedPosition(i));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Step 6: both announced blocks must be conditionally `2 eps`-typical with
/// Alice's input on `R0^{T_abar}` and `R1^{T_a}`.
#[allow(clippy::too_many_arguments)]
pub fn alice_check_partition(
    x: &[usize],
    r0: &[usize],
    r1: &[usize],
    t0: &SubsetHandle,
    t1: &SubsetHandle,
    a: bool,
    y_r0: &[usize],
    y_r1: &[usize],
    w0: &Dmc<f64>,
    eps: f64,
) -> bool {
    let pos0 = check_slots(r0, pick(t0, t1, !a));
    let pos1 = check_slots(r1, pick(t0, t1, a));
    [(pos0, y_r0), (pos1, y_r1)].iter().all(|(pos, ys)| {
        pos.len() == ys.len()
            && matches!(
                is_cond_typical(ys, &restrict(x, pos), w0, 2.0 * eps),
                Ok(true)
            )
    })
}

/// Step 7: hash `x` on `Q0 = R0 \ R0^{T_abar}` and `Q1 = R1 \ R1^{T_a}`.
///
/// Returns the message and `(S0, S1)`.
pub fn alice_strings<R: Rng + ?Sized>(
    x: &[usize],
    r0: &[usize],
    r1: &[usize],
    t_abar: &SubsetHandle,
    t_a: &SubsetHandle,
    params: &ProtocolParams,
    rng: &mut R,
) -> (StringsMsg, BitString, BitString) {
    let block = |r: &[usize], t: &SubsetHandle| {
        let q = remaining_slots(r, t);
        serialize_symbols(&restrict(x, &q), params.input_alphabet)
            .expect("input symbols are in range")
    };
    let b0 = block(r0, t_abar);
    let b1 = block(r1, t_a);
    let in_bits = params.hash_in_bits();
    let mut draw = |out| sample_hash(in_bits, out, rng).expect("derive_params bounds outputs");
    let (g0, g1, h0, h1) = (
        draw(params.g_len),
        draw(params.g_len),
        draw(params.k),
        draw(params.k),
    );
    let apply = |h: &crate::uhash::HashFunction, b: &BitString| h.apply(b).expect("lengths match");
    let s0 = apply(&h0, &b0);
    let s1 = apply(&h1, &b1);
    let msg = StringsMsg {
        g0_val: apply(&g0, &b0),
        g1_val: apply(&g1, &b1),
        g0,
        g1,
        h0,
        h1,
    };
    (msg, s0, s1)
}

/// What Alice has seen by the end of a session.
#[derive(Debug, Clone, Default)]
pub struct AliceView {
    pub x: Vec<usize>,
    pub r0: Vec<usize>,
    pub r1: Vec<usize>,
    pub ih: Option<IhOutcome>,
    pub a: Option<bool>,
    pub y_r0: Vec<usize>,
    pub y_r1: Vec<usize>,
    pub accepted: bool,
}

/// Hooks for a possibly deviating Alice. Defaults are honest.
pub trait AliceStrategy {
    fn choose_input(
        &mut self,
        setup: &ChannelSetup,
        n: usize,
        rng: &mut ChaCha20Rng,
    ) -> Vec<usize> {
        setup.input_dist.sample_string(n, rng)
    }

    /// A chosen interactive-hashing query, or `None` for a uniform one.
    fn choose_query(&mut self, _ih: &IhVerifier, _rng: &mut ChaCha20Rng) -> Option<BitString> {
        None
    }

    /// Final guess of Bob's choice bit.
    fn guess_choice(&mut self, _view: &AliceView, _rng: &mut ChaCha20Rng) -> Option<bool> {
        None
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct HonestAlice;

impl AliceStrategy for HonestAlice {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlicePhase {
    AwaitSets,
    Hashing,
    AwaitCheck,
    Done,
    Aborted,
}

pub struct AliceMachine<'a, S: AliceStrategy + ?Sized> {
    params: &'a ProtocolParams,
    setup: &'a ChannelSetup,
    strategy: &'a mut S,
    rng: ChaCha20Rng,
    phase: AlicePhase,
    view: AliceView,
    ih: Option<IhVerifier>,
    subsets: Option<(SubsetHandle, SubsetHandle)>,
    outputs: Option<(BitString, BitString)>,
}

fn abort(step: u8, reason: impl Into<String>) -> Message {
    Message::Abort {
        step,
        reason: reason.into(),
    }
}

impl<'a, S: AliceStrategy + ?Sized> AliceMachine<'a, S> {
    /// Step 2: draw `x^n`.
    pub fn new(
        params: &'a ProtocolParams,
        setup: &'a ChannelSetup,
        strategy: &'a mut S,
        mut rng: ChaCha20Rng,
    ) -> Self {
        let x = strategy.choose_input(setup, params.n, &mut rng);
        Self {
            params,
            setup,
            strategy,
            rng,
            phase: AlicePhase::AwaitSets,
            view: AliceView {
                x,
                ..AliceView::default()
            },
            ih: None,
            subsets: None,
            outputs: None,
        }
    }

    pub fn x(&self) -> &[usize] {
        &self.view.x
    }

    pub fn phase(&self) -> AlicePhase {
        self.phase
    }

    pub fn view(&self) -> &AliceView {
        &self.view
    }

    pub fn outputs(&self) -> Option<&(BitString, BitString)> {
        self.outputs.as_ref()
    }

    pub fn guess_choice(&mut self) -> Option<bool> {
        self.strategy.guess_choice(&self.view, &mut self.rng)
    }

    fn fail(&mut self, step: u8, reason: impl Into<String>) -> Vec<Message> {
        self.phase = AlicePhase::Aborted;
        vec![abort(step, reason)]
    }

    fn query(&mut self) -> Vec<Message> {
        let ih = self.ih.as_mut().expect("hashing phase");
        let q = match self.strategy.choose_query(ih, &mut self.rng) {
            Some(bits) => match ih.push_query(bits) {
                Ok(q) => q,
                Err(e) => return self.fail(5, e.to_string()),
            },
            None => ih.next_query(&mut self.rng).expect("a query is due"),
        };
        vec![Message::IhQuery(q)]
    }

    pub fn receive(&mut self, msg: &Message) -> Vec<Message> {
        match (self.phase, msg) {
            (AlicePhase::Done | AlicePhase::Aborted, _) => Vec::new(),
            (_, Message::Abort { .. }) => {
                self.phase = AlicePhase::Aborted;
                Vec::new()
            }
            (AlicePhase::AwaitSets, Message::SetsAnnounce { r0, r1 }) => {
                if let Err(e) = alice_validate_sets(r0, r1, self.params.n) {
                    return self.fail(4, e.to_string());
                }
                self.view.r0 = r0.clone();
                self.view.r1 = r1.clone();
                self.ih = Some(IhVerifier::new(self.params.m_bits).expect("m >= 2"));
                self.phase = AlicePhase::Hashing;
                self.query()
            }
            (AlicePhase::Hashing, Message::IhResponse(resp)) => {
                let ih = self.ih.as_mut().expect("hashing phase");
                if let Err(e) = ih.receive(*resp) {
                    return self.fail(5, e.to_string());
                }
                if !ih.is_done() {
                    return self.query();
                }
                let outcome = ih.outcome().expect("all rounds answered");
                let decode = |w| decode_string(&self.params.codec, w);
                match (decode(&outcome.w0), decode(&outcome.w1)) {
                    (Ok(t0), Ok(t1)) => self.subsets = Some((t0, t1)),
                    _ => return self.fail(5, "outputs do not decode"),
                }
                self.view.ih = Some(outcome);
                self.phase = AlicePhase::AwaitCheck;
                Vec::new()
            }
            (AlicePhase::AwaitCheck, Message::CheckAnnounce { a, y_r0, y_r1 }) => {
                let (t0, t1) = self.subsets.clone().expect("set after hashing");
                self.view.a = Some(*a);
                self.view.y_r0 = y_r0.clone();
                self.view.y_r1 = y_r1.clone();
                let ok = alice_check_partition(
                    &self.view.x,
                    &self.view.r0,
                    &self.view.r1,
                    &t0,
                    &t1,
                    *a,
                    y_r0,
                    y_r1,
                    &self.setup.gec.inner,
                    self.params.eps_typ,
                );
                if !ok {
                    return self.fail(6, "announced values are not typical");
                }
                self.view.accepted = true;
                let (msg, s0, s1) = alice_strings(
                    &self.view.x,
                    &self.view.r0,
                    &self.view.r1,
                    pick(&t0, &t1, !*a),
                    pick(&t0, &t1, *a),
                    self.params,
                    &mut self.rng,
                );
                self.outputs = Some((s0, s1));
                self.phase = AlicePhase::Done;
                vec![Message::Strings(msg)]
            }
            (phase, other) => {
                let step = match phase {
                    AlicePhase::AwaitSets => 4,
                    AlicePhase::Hashing => 5,
                    _ => 6,
                };
                self.fail(step, format!("unexpected {} message", other.kind()))
            }
        }
    }
}
