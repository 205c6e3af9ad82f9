//! Two-party string OT over a generalized erasure channel.
//!
//! Position lists `R0`, `R1` are ordered; a subset `T` of `{1..n/2}` selects
//! the entries of `R` at those (1-based) slots, written `R^T`.

pub mod alice;
pub mod bob;
pub mod message;
pub mod params;
pub mod session;
pub mod transcript;
pub mod wire;

pub use alice::{
    alice_check_partition, alice_strings, alice_validate_sets, AliceMachine, AlicePhase,
    AliceStrategy, AliceView, HonestAlice, SetError,
};
pub use bob::{
    arrange_partition, bob_decode, bob_partition, genie_decode, good_bad_split,
    honest_announcement, Announcement, BobContext, BobMachine, BobOutput, BobPhase, BobStrategy,
    CheckContext, DecodeError, DecodeMode, GoodBadSplit, HonestBob, InfeasibleSplit, SetChoice,
};
pub use message::{Message, Party, StringsMsg};
pub use params::{derive_params, ChannelSetup, ParamError, ProtocolParams};
pub use session::{
    run_session, run_session_with, Outcome, SessionError, SessionResult, SessionRngs, SessionTrace,
};
pub use transcript::{SessionTranscript, TranscriptEntry, TranscriptError};

use crate::subset_codec::SubsetHandle;

pub(crate) fn pick<'a>(t0: &'a SubsetHandle, t1: &'a SubsetHandle, i: bool) -> &'a SubsetHandle {
    if i {
        t1
    } else {
        t0
    }
}

/// `R^T`: the entries of `r` at the slots of `t`.
pub fn check_slots(r: &[usize], t: &SubsetHandle) -> Vec<usize> {
    t.slots().filter_map(|s| r.get(s).copied()).collect()
}

/// `R \ R^T`, in list order.
pub fn remaining_slots(r: &[usize], t: &SubsetHandle) -> Vec<usize> {
    let mut drop = vec![false; r.len()];
    for s in t.slots() {
        if s < drop.len() {
            drop[s] = true;
        }
    }
    r.iter()
        .zip(drop)
        .filter(|(_, d)| !d)
        .map(|(v, _)| *v)
        .collect()
}

/// Erased positions of `y` among `positions`.
pub fn erasures_in(y: &[usize], positions: &[usize], erasure_symbol: usize) -> usize {
    positions
        .iter()
        .filter(|&&i| y[i] == erasure_symbol)
        .count()
}
