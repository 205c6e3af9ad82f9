//! Bit strings with a big-endian convention.
//!
//! Bit 0 is the most significant bit when a string is read as an integer, and
//! the first bit of the first byte when packed. Packing pads the tail with zeros.

use std::fmt;
use std::ops::{BitXor, Index};

use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString(Vec<bool>);

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BitsError {
    #[error("packed buffer of {bytes} bytes cannot hold {bits} bits")]
    ShortBuffer { bits: usize, bytes: usize },
    #[error("invalid hex: {0}")]
    Hex(String),
    #[error("integer needs more than {0} bits")]
    Overflow(usize),
}

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.0
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.0[i] = v;
    }

    pub fn push(&mut self, v: bool) {
        self.0.push(v);
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|b| !b)
    }

    /// Parse a string of `'0'`/`'1'` characters. Other characters are ignored,
    /// which lets tests write `"10 00 01"`.
    pub fn from_str_bits(s: &str) -> Self {
        Self(
            s.chars()
                .filter_map(|c| match c {
                    '0' => Some(false),
                    '1' => Some(true),
                    _ => None,
                })
                .collect(),
        )
    }

    /// Low `len` bits of `value`, most significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        Self(
            (0..len)
                .map(|i| (value >> (len - 1 - i)) & 1 == 1)
                .collect(),
        )
    }

    pub fn to_u64(&self) -> u64 {
        assert!(self.len() <= 64, "bit string too long for u64");
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn to_biguint(&self) -> BigUint {
        let mut out = BigUint::default();
        for &b in &self.0 {
            out <<= 1u32;
            if b {
                out += 1u32;
            }
        }
        out
    }

    /// Big-endian encoding of `value` in exactly `len` bits.
    pub fn from_biguint(value: &BigUint, len: usize) -> Result<Self, BitsError> {
        if value.bits() as usize > len {
            return Err(BitsError::Overflow(len));
        }
        Ok(Self(
            (0..len).map(|i| value.bit((len - 1 - i) as u64)).collect(),
        ))
    }

    /// GF(2) inner product.
    pub fn dot(&self, other: &BitString) -> bool {
        assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .fold(false, |acc, (&a, &b)| acc ^ (a & b))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.0
            .chunks(8)
            .map(|chunk| {
                chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (i, &bit)| acc | ((bit as u8) << (7 - i)))
            })
            .collect()
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self, BitsError> {
        if bytes.len() * 8 < len {
            return Err(BitsError::ShortBuffer {
                bits: len,
                bytes: bytes.len(),
            });
        }
        Ok(Self(
            (0..len)
                .map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0)
                .collect(),
        ))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(s: &str, len: usize) -> Result<Self, BitsError> {
        let bytes = hex::decode(s).map_err(|e| BitsError::Hex(e.to_string()))?;
        Self::from_bytes(&bytes, len)
    }
}

impl Index<usize> for BitString {
    type Output = bool;

    fn index(&self, i: usize) -> &bool {
        &self.0[i]
    }
}

impl BitXor for &BitString {
    type Output = BitString;

    fn bitxor(self, rhs: &BitString) -> BitString {
        assert_eq!(self.len(), rhs.len());
        BitString(self.0.iter().zip(&rhs.0).map(|(a, b)| a ^ b).collect())
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl From<Vec<bool>> for BitString {
    fn from(v: Vec<bool>) -> Self {
        Self(v)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

/// Serialized as `{"len": n, "hex": "..."}` so trailing zero padding is unambiguous.
#[derive(Serialize, Deserialize)]
struct HexBits {
    len: usize,
    hex: String,
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        HexBits {
            len: self.len(),
            hex: self.to_hex(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let h = HexBits::deserialize(d)?;
        BitString::from_hex(&h.hex, h.len).map_err(serde::de::Error::custom)
    }
}
