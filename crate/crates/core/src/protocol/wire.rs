//! Length-prefixed binary frames: `u8 tag | u32 length (BE) | payload`.
//!
//! Payload primitives, all big-endian:
//! - list: `u32 count` then `count` x `u32`
//! - bit string: `u32 bit length` then the bits packed MSB first
//! - hash: `u32 in_bits | u32 out_bits` then the seed packed MSB first
//! - flag: one byte, 0 or 1
//! - text: `u32 byte length` then UTF-8

use std::io::{self, Read, Write};

use crate::bits::BitString;
use crate::interactive_hashing::{IhQuery, IhResponse};
use crate::uhash::{seed_len, HashFunction};

use super::message::{Message, StringsMsg};

/// Frames larger than this are rejected before allocation.
pub const MAX_PAYLOAD: u32 = 1 << 24;

#[derive(Debug, thiserror::Error)]
pub enum WireError {
    #[error("unknown tag {0}")]
    UnknownTag(u8),
    #[error("payload truncated")]
    Truncated,
    #[error("{0} trailing bytes after payload")]
    Trailing(usize),
    #[error("payload of {0} bytes exceeds limit")]
    TooLong(u32),
    #[error("malformed payload: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("wire values fit in u32");
        self.0.extend_from_slice(&v.to_be_bytes());
    }

    fn flag(&mut self, b: bool) {
        self.0.push(b as u8);
    }

    fn list(&mut self, xs: &[usize]) {
        self.u32(xs.len());
        for &x in xs {
            self.u32(x);
        }
    }

    fn bits(&mut self, b: &BitString) {
        self.u32(b.len());
        self.0.extend_from_slice(&b.to_bytes());
    }

    fn hash(&mut self, h: &HashFunction) {
        self.u32(h.in_bits());
        self.u32(h.out_bits());
        self.0.extend_from_slice(&h.seed().to_bytes());
    }

    fn text(&mut self, s: &str) {
        self.u32(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a>(&'a [u8]);

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.0.len() < n {
            return Err(WireError::Truncated);
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<usize, WireError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn flag(&mut self) -> Result<bool, WireError> {
        match self.take(1)?[0] {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(WireError::Malformed(format!("flag byte {v}"))),
        }
    }

    fn list(&mut self) -> Result<Vec<usize>, WireError> {
        let count = self.u32()?;
        if count > self.0.len() / 4 {
            return Err(WireError::Truncated);
        }
        (0..count).map(|_| self.u32()).collect()
    }

    fn packed(&mut self, len: usize) -> Result<BitString, WireError> {
        let bytes = self.take(len.div_ceil(8))?;
        BitString::from_bytes(bytes, len).map_err(|e| WireError::Malformed(e.to_string()))
    }

    fn bits(&mut self) -> Result<BitString, WireError> {
        let len = self.u32()?;
        self.packed(len)
    }

    fn hash(&mut self) -> Result<HashFunction, WireError> {
        let in_bits = self.u32()?;
        let out_bits = self.u32()?;
        if out_bits > in_bits {
            return Err(WireError::Malformed("hash output longer than input".into()));
        }
        let seed = self.packed(seed_len(in_bits, out_bits))?;
        HashFunction::from_seed(in_bits, out_bits, seed)
            .map_err(|e| WireError::Malformed(e.to_string()))
    }

    fn text(&mut self) -> Result<String, WireError> {
        let len = self.u32()?;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|e| WireError::Malformed(e.to_string()))
    }

    fn finish(self) -> Result<(), WireError> {
        match self.0.len() {
            0 => Ok(()),
            n => Err(WireError::Trailing(n)),
        }
    }
}

pub fn encode_payload(msg: &Message) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    match msg {
        Message::SetsAnnounce { r0, r1 } => {
            w.list(r0);
            w.list(r1);
        }
        Message::IhQuery(q) => {
            w.u32(q.index);
            w.bits(&q.bits);
        }
        Message::IhResponse(r) => {
            w.u32(r.index);
            w.flag(r.bit);
        }
        Message::CheckAnnounce { a, y_r0, y_r1 } => {
            w.flag(*a);
            w.list(y_r0);
            w.list(y_r1);
        }
        Message::Strings(s) => {
            w.bits(&s.g0_val);
            w.bits(&s.g1_val);
            for h in [&s.g0, &s.g1, &s.h0, &s.h1] {
                w.hash(h);
            }
        }
        Message::Abort { step, reason } => {
            w.0.push(*step);
            w.text(reason);
        }
    }
    w.0
}

pub fn decode_payload(tag: u8, payload: &[u8]) -> Result<Message, WireError> {
    let mut r = Reader(payload);
    let msg = match tag {
        1 => Message::SetsAnnounce {
            r0: r.list()?,
            r1: r.list()?,
        },
        2 => Message::IhQuery(IhQuery {
            index: r.u32()?,
            bits: r.bits()?,
        }),
        3 => Message::IhResponse(IhResponse {
            index: r.u32()?,
            bit: r.flag()?,
        }),
        4 => Message::CheckAnnounce {
            a: r.flag()?,
            y_r0: r.list()?,
            y_r1: r.list()?,
        },
        5 => Message::Strings(StringsMsg {
            g0_val: r.bits()?,
            g1_val: r.bits()?,
            g0: r.hash()?,
            g1: r.hash()?,
            h0: r.hash()?,
            h1: r.hash()?,
        }),
        6 => Message::Abort {
            step: r.take(1)?[0],
            reason: r.text()?,
        },
        t => return Err(WireError::UnknownTag(t)),
    };
    r.finish()?;
    Ok(msg)
}

pub fn encode_frame(msg: &Message) -> Vec<u8> {
    let payload = encode_payload(msg);
    let mut out = Vec::with_capacity(payload.len() + 5);
    out.push(msg.tag());
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.extend_from_slice(&payload);
    out
}

pub fn write_frame<W: Write>(out: &mut W, msg: &Message) -> Result<(), WireError> {
    out.write_all(&encode_frame(msg))?;
    Ok(())
}

/// Read one frame; `Ok(None)` on a clean end of stream.
pub fn read_frame<R: Read>(input: &mut R) -> Result<Option<Message>, WireError> {
    let mut header = [0u8; 5];
    let mut got = 0;
    while got < header.len() {
        match input.read(&mut header[got..])? {
            0 if got == 0 => return Ok(None),
            0 => return Err(WireError::Truncated),
            n => got += n,
        }
    }
    let len = u32::from_be_bytes([header[1], header[2], header[3], header[4]]);
    if len > MAX_PAYLOAD {
        return Err(WireError::TooLong(len));
    }
    let mut payload = vec![0u8; len as usize];
    input.read_exact(&mut payload).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => WireError::Truncated,
        _ => WireError::Io(e),
    })?;
    decode_payload(header[0], &payload).map(Some)
}
