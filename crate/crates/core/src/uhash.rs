//! Toeplitz universal hashing and the leftover-hash bound.
//!
//! A member of the family is a binary Toeplitz matrix of `out_bits` rows and
//! `in_bits` columns, described by `in_bits + out_bits - 1` seed bits (empty
//! when `out_bits == 0`). Entry `(i, j)` is `seed[i - j + in_bits - 1]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{BitString, BitsError};
use crate::real::Real;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum HashError {
    #[error("output length {out_bits} exceeds input length {in_bits}")]
    OutLongerThanIn { in_bits: usize, out_bits: usize },
    #[error("input has {got} bits, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("symbol {symbol} outside alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },
    #[error(transparent)]
    Bits(#[from] BitsError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HashFunction {
    in_bits: usize,
    out_bits: usize,
    seed: BitString,
}

pub fn seed_len(in_bits: usize, out_bits: usize) -> usize {
    if out_bits == 0 {
        0
    } else {
        in_bits + out_bits - 1
    }
}

impl HashFunction {
    pub fn from_seed(in_bits: usize, out_bits: usize, seed: BitString) -> Result<Self, HashError> {
        if out_bits > in_bits {
            return Err(HashError::OutLongerThanIn { in_bits, out_bits });
        }
        let expected = seed_len(in_bits, out_bits);
        if seed.len() != expected {
            return Err(HashError::LengthMismatch {
                got: seed.len(),
                expected,
            });
        }
        Ok(Self {
            in_bits,
            out_bits,
            seed,
        })
    }

    pub fn in_bits(&self) -> usize {
        self.in_bits
    }

    pub fn out_bits(&self) -> usize {
        self.out_bits
    }

    pub fn seed(&self) -> &BitString {
        &self.seed
    }

    /// GF(2) product of the Toeplitz matrix with `x`.
    pub fn apply(&self, x: &BitString) -> Result<BitString, HashError> {
        if x.len() != self.in_bits {
            return Err(HashError::LengthMismatch {
                got: x.len(),
                expected: self.in_bits,
            });
        }
        Ok((0..self.out_bits)
            .map(|i| {
                (0..self.in_bits).fold(false, |acc, j| {
                    acc ^ (self.seed[i + self.in_bits - 1 - j] & x[j])
                })
            })
            .collect())
    }

    pub fn descriptor(&self) -> HashDescriptor {
        HashDescriptor {
            in_bits: self.in_bits,
            out_bits: self.out_bits,
            seed_hex: self.seed.to_hex(),
        }
    }
}

/// Wire form of a hash function: lengths plus the seed as lowercase hex,
/// bits packed most significant first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashDescriptor {
    pub in_bits: usize,
    pub out_bits: usize,
    pub seed_hex: String,
}

impl TryFrom<&HashDescriptor> for HashFunction {
    type Error = HashError;

    fn try_from(d: &HashDescriptor) -> Result<Self, HashError> {
        let seed = BitString::from_hex(&d.seed_hex, seed_len(d.in_bits, d.out_bits))?;
        HashFunction::from_seed(d.in_bits, d.out_bits, seed)
    }
}

impl Serialize for HashFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.descriptor().serialize(s)
    }
}

impl<'de> Deserialize<'de> for HashFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let desc = HashDescriptor::deserialize(d)?;
        HashFunction::try_from(&desc).map_err(serde::de::Error::custom)
    }
}

/// Uniformly random member of the family.
pub fn sample_hash<R: Rng + ?Sized>(
    in_bits: usize,
    out_bits: usize,
    rng: &mut R,
) -> Result<HashFunction, HashError> {
    if out_bits > in_bits {
        return Err(HashError::OutLongerThanIn { in_bits, out_bits });
    }
    let seed = (0..seed_len(in_bits, out_bits))
        .map(|_| rng.gen())
        .collect();
    HashFunction::from_seed(in_bits, out_bits, seed)
}

/// Every member of the family for the given lengths. Only for small seeds.
pub fn all_hashes(in_bits: usize, out_bits: usize) -> Vec<HashFunction> {
    let len = seed_len(in_bits, out_bits);
    assert!(len < 24, "family too large to enumerate");
    (0..1u64 << len)
        .map(|v| {
            HashFunction::from_seed(in_bits, out_bits, BitString::from_u64(v, len))
                .expect("valid lengths")
        })
        .collect()
}

/// Leftover-hash statistical-distance bound `(1/2) sqrt(2^(out - H_min))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractorBound<T> {
    pub min_entropy: T,
    pub out_bits: usize,
    pub sd_bound: T,
}

impl<T: Real> ExtractorBound<T> {
    /// Whether `out <= H_min - 2 log2(1/eps) + 2`, the extractor condition for error `eps`.
    pub fn extracts_with(&self, eps: T) -> bool {
        T::from_count(self.out_bits)
            <= self.min_entropy - T::lit(2.0) * eps.recip().log2() + T::lit(2.0)
    }

    /// Smallest `eps` for which [`extracts_with`](Self::extracts_with) holds.
    pub fn best_eps(&self) -> T {
        T::lit(2.0)
            .powf((T::from_count(self.out_bits) - self.min_entropy - T::lit(2.0)) / T::lit(2.0))
    }
}

pub fn lhl_bound<T: Real>(min_entropy: T, out_bits: usize) -> ExtractorBound<T> {
    let exponent = T::from_count(out_bits) - min_entropy;
    ExtractorBound {
        min_entropy,
        out_bits,
        sd_bound: T::lit(0.5) * exponent.exp2().sqrt(),
    }
}

/// Bits per symbol in [`serialize_symbols`]: `ceil(log2 alphabet)`.
pub fn symbol_width(alphabet: usize) -> usize {
    assert!(alphabet >= 1);
    (usize::BITS - (alphabet - 1).leading_zeros()) as usize
}

/// Fixed-width big-endian encoding of each symbol.
pub fn serialize_symbols(x: &[usize], alphabet: usize) -> Result<BitString, HashError> {
    let width = symbol_width(alphabet);
    let mut out = BitString::default();
    for &s in x {
        if s >= alphabet {
            return Err(HashError::SymbolOutOfRange {
                symbol: s,
                alphabet,
            });
        }
        for b in (0..width).rev() {
            out.push((s >> b) & 1 == 1);
        }
    }
    Ok(out)
}

pub fn deserialize_symbols(bits: &BitString, alphabet: usize) -> Result<Vec<usize>, HashError> {
    let width = symbol_width(alphabet);
    if width == 0 {
        return Ok(Vec::new());
    }
    if !bits.len().is_multiple_of(width) {
        return Err(HashError::LengthMismatch {
            got: bits.len(),
            expected: bits.len() / width * width,
        });
    }
    bits.bits()
        .chunks(width)
        .map(|chunk| {
            let s = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            if s >= alphabet {
                Err(HashError::SymbolOutOfRange {
                    symbol: s,
                    alphabet,
                })
            } else {
                Ok(s)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn zero_output_is_constant() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let h = sample_hash(5, 0, &mut rng).unwrap();
        assert!(h
            .apply(&BitString::from_str_bits("10110"))
            .unwrap()
            .is_empty());
        assert!(h.seed().is_empty());
    }

    #[test]
    fn seed_length_and_determinism() {
        let h = sample_hash(4, 2, &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
        assert_eq!(h.seed().len(), 5);
        let again = sample_hash(4, 2, &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
        assert_eq!(h, again);
        assert_eq!(
            sample_hash(2, 3, &mut ChaCha20Rng::seed_from_u64(9)),
            Err(HashError::OutLongerThanIn {
                in_bits: 2,
                out_bits: 3
            })
        );
    }

    #[test]
    fn toeplitz_layout() {
        // in = 3, out = 2, seed s0..s3: row0 = (s2 s1 s0), row1 = (s3 s2 s1).
        let h = HashFunction::from_seed(3, 2, BitString::from_str_bits("0011")).unwrap();
        let col = |j: usize| {
            let mut x = BitString::zeros(3);
            x.set(j, true);
            h.apply(&x).unwrap().to_string()
        };
        assert_eq!(col(0), "11");
        assert_eq!(col(1), "01");
        assert_eq!(col(2), "00");
        let h = HashFunction::from_seed(3, 2, BitString::from_str_bits("1000")).unwrap();
        assert_eq!(
            h.apply(&BitString::from_str_bits("001"))
                .unwrap()
                .to_string(),
            "10"
        );
    }

    #[test]
    fn apply_rejects_wrong_length() {
        let h = HashFunction::from_seed(3, 1, BitString::zeros(3)).unwrap();
        assert_eq!(
            h.apply(&BitString::zeros(4)),
            Err(HashError::LengthMismatch {
                got: 4,
                expected: 3
            })
        );
    }

    #[test]
    fn two_bit_family_collisions() {
        let family = all_hashes(2, 1);
        assert_eq!(family.len(), 4);
        for a in 0..4u64 {
            for b in (a + 1)..4 {
                let (xa, xb) = (BitString::from_u64(a, 2), BitString::from_u64(b, 2));
                let hits = family
                    .iter()
                    .filter(|h| h.apply(&xa).unwrap() == h.apply(&xb).unwrap())
                    .count();
                assert!(hits * 2 <= family.len(), "{a} {b}: {hits}");
            }
        }
    }

    #[test]
    fn lhl_examples() {
        assert!((lhl_bound(8.0f64, 8).sd_bound - 0.5).abs() < 1e-15);
        let b = lhl_bound(28.0f64, 8);
        assert!((b.sd_bound - 2f64.powi(-10) / 2.0).abs() < 1e-15);
        assert!((b.sd_bound - 4.88e-4).abs() < 1e-6);
        let z = lhl_bound(6.0f64, 0);
        assert!((z.sd_bound - 0.5 * 2f64.powf(-3.0)).abs() < 1e-15);
        // l <= H - 2 log(1/eps) + 2 implies sd_bound <= eps.
        let b = lhl_bound(30.0f64, 10);
        let eps = 2f64.powi(-11);
        assert!(b.extracts_with(eps));
        assert!(b.sd_bound <= eps);
        assert!(!b.extracts_with(eps / 4.0));
        assert!((b.best_eps() - eps).abs() < 1e-18);
    }

    #[test]
    fn serialization_examples() {
        let bits = BitString::from_str_bits("1011");
        let syms = [1, 0, 1, 1];
        assert_eq!(serialize_symbols(&syms, 2).unwrap(), bits);
        assert_eq!(
            serialize_symbols(&[2, 0, 1], 3).unwrap(),
            BitString::from_str_bits("10 00 01")
        );
        assert_eq!(
            serialize_symbols(&[3], 3),
            Err(HashError::SymbolOutOfRange {
                symbol: 3,
                alphabet: 3
            })
        );
        assert!(serialize_symbols(&[0, 0], 1).unwrap().is_empty());
        assert!(deserialize_symbols(&BitString::from_str_bits("11"), 3).is_err());
    }

    proptest! {
        #[test]
        fn linear_over_gf2(
            seed in proptest::collection::vec(any::<bool>(), 20),
            a in proptest::collection::vec(any::<bool>(), 16),
            b in proptest::collection::vec(any::<bool>(), 16),
        ) {
            let h = HashFunction::from_seed(16, 5, BitString::new(seed)).unwrap();
            let (a, b) = (BitString::new(a), BitString::new(b));
            let lhs = h.apply(&(&a ^ &b)).unwrap();
            let rhs = &h.apply(&a).unwrap() ^ &h.apply(&b).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert!(h.apply(&BitString::zeros(16)).unwrap().is_zero());
        }

        #[test]
        fn symbol_roundtrip(alphabet in 1usize..9, xs in proptest::collection::vec(0usize..64, 0..20)) {
            let xs: Vec<usize> = xs.into_iter().map(|s| s % alphabet).collect();
            let bits = serialize_symbols(&xs, alphabet).unwrap();
            prop_assert_eq!(bits.len(), xs.len() * symbol_width(alphabet));
            if alphabet > 1 {
                prop_assert_eq!(deserialize_symbols(&bits, alphabet).unwrap(), xs);
            }
        }

        #[test]
        fn descriptor_roundtrip(in_bits in 1usize..40, out in 0usize..40, s in any::<u64>()) {
            let out = out.min(in_bits);
            let h = sample_hash(in_bits, out, &mut ChaCha20Rng::seed_from_u64(s)).unwrap();
            let back = HashFunction::try_from(&h.descriptor()).unwrap();
            prop_assert_eq!(back, h);
        }
    }
}
