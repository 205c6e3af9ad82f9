use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::message::{Message, Party};
use super::wire::{decode_payload, encode_payload, WireError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub from: Party,
    pub message: Message,
}

/// Every message of one session, in send order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SessionTranscript {
    pub entries: Vec<TranscriptEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Line {
    seq: usize,
    from: Party,
    tag: u8,
    kind: String,
    payload: String,
}

#[derive(Debug, thiserror::Error)]
pub enum TranscriptError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: {source}")]
    Wire { line: usize, source: WireError },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl SessionTranscript {
    pub fn push(&mut self, from: Party, message: Message) {
        self.entries.push(TranscriptEntry { from, message });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn messages_from(&self, party: Party) -> impl Iterator<Item = &Message> {
        self.entries
            .iter()
            .filter(move |e| e.from == party)
            .map(|e| &e.message)
    }

    /// One JSON object per line: `{"seq","from","tag","kind","payload"}`, payload as hex.
    pub fn write_jsonl<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for (seq, e) in self.entries.iter().enumerate() {
            let line = Line {
                seq,
                from: e.from,
                tag: e.message.tag(),
                kind: e.message.kind().to_string(),
                payload: hex::encode(encode_payload(&e.message)),
            };
            serde_json::to_writer(&mut *out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, TranscriptError> {
        let mut t = SessionTranscript::default();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parse = |reason: String| TranscriptError::Parse {
                line: i + 1,
                reason,
            };
            let rec: Line = serde_json::from_str(&line).map_err(|e| parse(e.to_string()))?;
            if rec.seq != t.len() {
                return Err(parse(format!("sequence number {} out of order", rec.seq)));
            }
            let bytes = hex::decode(&rec.payload).map_err(|e| parse(e.to_string()))?;
            let message =
                decode_payload(rec.tag, &bytes).map_err(|source| TranscriptError::Wire {
                    line: i + 1,
                    source,
                })?;
            if message.kind() != rec.kind {
                return Err(parse(format!(
                    "kind {} does not match tag {}",
                    rec.kind, rec.tag
                )));
            }
            t.push(rec.from, message);
        }
        Ok(t)
    }

    pub fn parse_jsonl(text: &str) -> Result<Self, TranscriptError> {
        Self::read_jsonl(text.as_bytes())
    }

    pub fn save(&self, path: &Path) -> Result<(), TranscriptError> {
        fs::write(path, self.to_jsonl())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, TranscriptError> {
        let file = fs::File::open(path)?;
        Self::read_jsonl(io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interactive_hashing::IhResponse;

    #[test]
    fn jsonl_round_trip() {
        let mut t = SessionTranscript::default();
        t.push(
            Party::Bob,
            Message::SetsAnnounce {
                r0: vec![0, 2],
                r1: vec![3, 1],
            },
        );
        t.push(
            Party::Bob,
            Message::IhResponse(IhResponse {
                index: 0,
                bit: false,
            }),
        );
        t.push(
            Party::Alice,
            Message::Abort {
                step: 6,
                reason: "x".into(),
            },
        );
        let text = t.to_jsonl();
        assert_eq!(text.lines().count(), 3);
        assert!(
            text.starts_with(r#"{"seq":0,"from":"bob","tag":1,"kind":"sets_announce","payload":"#)
        );
        assert_eq!(SessionTranscript::parse_jsonl(&text).unwrap(), t);
    }

    #[test]
    fn rejects_mismatched_kind() {
        let line = r#"{"seq":0,"from":"bob","tag":3,"kind":"abort","payload":"0000000000"}"#;
        assert!(matches!(
            SessionTranscript::parse_jsonl(line),
            Err(TranscriptError::Parse { line: 1, .. })
        ));
    }
}
