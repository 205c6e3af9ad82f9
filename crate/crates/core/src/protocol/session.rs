use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::channel::ChannelError;
use crate::interactive_hashing::IhOutcome;
use crate::subset_codec::SubsetHandle;

use super::alice::{AliceMachine, AliceStrategy, HonestAlice};
use super::bob::{BobMachine, BobOutput, BobStrategy, DecodeError, DecodeMode, HonestBob};
use super::message::{Message, Party};
use super::params::{ChannelSetup, ProtocolParams};
use super::transcript::SessionTranscript;

/// Independent generators for Alice, Bob and the channel.
#[derive(Debug, Clone)]
pub struct SessionRngs {
    pub alice: ChaCha20Rng,
    pub bob: ChaCha20Rng,
    pub channel: ChaCha20Rng,
}

impl SessionRngs {
    /// Streams 0, 1, 2 of the ChaCha20 key expanded from `seed`.
    pub fn from_seed(seed: u64) -> Self {
        let stream = |s| {
            let mut r = ChaCha20Rng::seed_from_u64(seed);
            r.set_stream(s);
            r
        };
        Self {
            alice: stream(0),
            bob: stream(1),
            channel: stream(2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum Outcome {
    Completed,
    Aborted { step: u8, by: Party, reason: String },
}

impl Outcome {
    pub fn is_completed(&self) -> bool {
        matches!(self, Outcome::Completed)
    }

    pub fn abort_step(&self) -> Option<u8> {
        match self {
            Outcome::Aborted { step, .. } => Some(*step),
            Outcome::Completed => None,
        }
    }
}

/// Internal state exposed for measurement; not part of either party's view.
#[derive(Debug, Clone, Default)]
pub struct SessionTrace {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub erasures: usize,
    pub r0: Vec<usize>,
    pub r1: Vec<usize>,
    pub w: Option<BitString>,
    pub ih: Option<IhOutcome>,
    pub subsets: Option<(SubsetHandle, SubsetHandle)>,
    pub a: Option<bool>,
    pub alice_accepted: bool,
    pub alice_guess: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct SessionResult {
    pub outcome: Outcome,
    pub alice_outputs: Option<(BitString, BitString)>,
    pub bob_output: Option<BobOutput>,
    pub transcript: SessionTranscript,
    pub achieved_rate: f64,
    /// `S_c` agreement, when both sides produced outputs.
    pub correct: Option<bool>,
    pub trace: SessionTrace,
}

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("step 8 decoding: {0}")]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("session did not terminate after {0} messages")]
    Runaway(usize),
}

/// Drive both machines until neither has anything to send.
pub fn run_session_with<A, B>(
    setup: &ChannelSetup,
    params: &ProtocolParams,
    alice_strategy: &mut A,
    bob_strategy: &mut B,
    rngs: SessionRngs,
) -> Result<SessionResult, SessionError>
where
    A: AliceStrategy + ?Sized,
    B: BobStrategy + ?Sized,
{
    let SessionRngs {
        alice,
        bob,
        mut channel,
    } = rngs;
    let mut am = AliceMachine::new(params, setup, alice_strategy, alice);
    let x = am.x().to_vec();
    let y = setup.gec.transmit(&x, &mut channel)?;
    let mut bm = BobMachine::new(params, setup, bob_strategy, bob, y);

    let mut transcript = SessionTranscript::default();
    let mut outcome = Outcome::Completed;
    let mut pending = bm.start();
    let mut sender = Party::Bob;
    let budget = 4 * params.m_bits + 16;
    while !pending.is_empty() {
        if transcript.len() > budget {
            return Err(SessionError::Runaway(transcript.len()));
        }
        let mut replies = Vec::new();
        for msg in pending {
            if let Message::Abort { step, reason } = &msg {
                outcome = Outcome::Aborted {
                    step: *step,
                    by: sender,
                    reason: reason.clone(),
                };
            }
            let answer = match sender {
                Party::Bob => am.receive(&msg),
                Party::Alice => bm.receive(&msg)?,
            };
            transcript.push(sender, msg);
            replies.extend(answer);
        }
        pending = replies;
        sender = sender.peer();
    }
    let alice_outputs = am.outputs().cloned();
    let bob_output = bm.output().cloned();
    let correct = match (&alice_outputs, &bob_output) {
        (Some((s0, s1)), Some(out)) => Some(&out.s == if out.c { s1 } else { s0 }),
        _ => None,
    };
    let alice_guess = am.guess_choice();
    let view = am.view();
    let trace = SessionTrace {
        x,
        y: bm.y().to_vec(),
        erasures: bm.split().bad.len(),
        r0: bm.sets().map(|s| s.r0.clone()).unwrap_or_default(),
        r1: bm.sets().map(|s| s.r1.clone()).unwrap_or_default(),
        w: bm.sets().map(|s| s.w.clone()),
        ih: bm.ih_result().map(|(o, _, _)| o.clone()),
        subsets: bm.ih_result().map(|(_, t0, t1)| (t0.clone(), t1.clone())),
        a: view.a,
        alice_accepted: view.accepted,
        alice_guess,
    };
    Ok(SessionResult {
        outcome,
        alice_outputs,
        bob_output,
        transcript,
        achieved_rate: params.rate(),
        correct,
        trace,
    })
}

/// Honest parties, with Bob choosing `c`.
pub fn run_session(
    setup: &ChannelSetup,
    params: &ProtocolParams,
    rngs: SessionRngs,
    c: bool,
    mode: DecodeMode,
) -> Result<SessionResult, SessionError> {
    let mut alice = HonestAlice;
    match mode {
        DecodeMode::Exhaustive => {
            let mut bob = HonestBob::new(c);
            run_session_with(setup, params, &mut alice, &mut bob, rngs)
        }
        DecodeMode::Genie => {
            // The genie needs Alice's input, which is drawn first from her stream.
            let x = setup
                .input_dist
                .sample_string(params.n, &mut rngs.alice.clone());
            let mut bob = HonestBob::with_genie(c, x);
            run_session_with(setup, params, &mut alice, &mut bob, rngs)
        }
    }
}
