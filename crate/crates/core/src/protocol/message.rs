use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::interactive_hashing::{IhQuery, IhResponse};
use crate::uhash::HashFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn peer(self) -> Self {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

/// Step-7 payload: the two check hashes with their values and the two extractors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StringsMsg {
    pub g0_val: BitString,
    pub g1_val: BitString,
    pub g0: HashFunction,
    pub g1: HashFunction,
    pub h0: HashFunction,
    pub h1: HashFunction,
}

impl StringsMsg {
    pub fn g(&self, i: bool) -> (&HashFunction, &BitString) {
        if i {
            (&self.g1, &self.g1_val)
        } else {
            (&self.g0, &self.g0_val)
        }
    }

    pub fn h(&self, i: bool) -> &HashFunction {
        if i {
            &self.h1
        } else {
            &self.h0
        }
    }
}

/// Position lists are 0-based and kept in the order the sender chose.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    SetsAnnounce {
        r0: Vec<usize>,
        r1: Vec<usize>,
    },
    IhQuery(IhQuery),
    IhResponse(IhResponse),
    CheckAnnounce {
        a: bool,
        y_r0: Vec<usize>,
        y_r1: Vec<usize>,
    },
    Strings(StringsMsg),
    Abort {
        step: u8,
        reason: String,
    },
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::SetsAnnounce { .. } => "sets_announce",
            Message::IhQuery(_) => "ih_query",
            Message::IhResponse(_) => "ih_response",
            Message::CheckAnnounce { .. } => "check_announce",
            Message::Strings(_) => "strings",
            Message::Abort { .. } => "abort",
        }
    }

    pub fn tag(&self) -> u8 {
        match self {
            Message::SetsAnnounce { .. } => 1,
            Message::IhQuery(_) => 2,
            Message::IhResponse(_) => 3,
            Message::CheckAnnounce { .. } => 4,
            Message::Strings(_) => 5,
            Message::Abort { .. } => 6,
        }
    }
}
