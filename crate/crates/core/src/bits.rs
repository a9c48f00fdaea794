//! Bit strings with a lowercase-hex wire form.
//!
//! Serialized as `{"len": <bits>, "hex": "<lowercase hex>"}`. The first bit of
//! the string is the most significant bit of the first hex digit; the final
//! digit is zero padded on the right.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QkdError, Result};

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    pub fn push(&mut self, value: bool) {
        self.bits.push(value);
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Parity of the bits at `positions`.
    pub fn parity_of(&self, positions: &[usize]) -> bool {
        positions.iter().fold(false, |acc, &i| acc ^ self.bits[i])
    }

    pub fn hamming_distance(&self, other: &BitString) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
            + self.len().abs_diff(other.len())
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        if self.len() != other.len() {
            return Err(QkdError::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| a ^ b)
            .collect())
    }

    /// Packs into little-endian u64 words: bit `i` lands in word `i / 64`
    /// at position `i % 64`.
    pub fn to_words(&self) -> Vec<u64> {
        let mut words = vec![0u64; self.len().div_ceil(64)];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        words
    }

    pub fn to_hex(&self) -> String {
        const DIGITS: &[u8; 16] = b"0123456789abcdef";
        self.bits
            .chunks(4)
            .map(|chunk| {
                let nibble = chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (j, &b)| acc | (u8::from(b) << (3 - j)));
                DIGITS[nibble as usize] as char
            })
            .collect()
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<BitString> {
        if hex.len() != len.div_ceil(4) {
            return Err(QkdError::InvalidHex(format!(
                "{} digits cannot hold exactly {len} bits",
                hex.len()
            )));
        }
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for c in hex.chars() {
            let nibble = c
                .to_digit(16)
                .filter(|_| !c.is_ascii_uppercase())
                .ok_or_else(|| QkdError::InvalidHex(format!("unexpected character {c:?}")))?;
            for j in (0..4).rev() {
                bits.push((nibble >> j) & 1 == 1);
            }
        }
        if bits[len..].iter().any(|&b| b) {
            return Err(QkdError::InvalidHex("non-zero padding bits".into()));
        }
        bits.truncate(len);
        Ok(BitString { bits })
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self {
            bits: iter.into_iter().collect(),
        }
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        Self { bits }
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() <= 64 {
            let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
            write!(f, "BitString({s})")
        } else {
            write!(
                f,
                "BitString(len={}, hex={}…)",
                self.len(),
                &self.to_hex()[..16]
            )
        }
    }
}

#[derive(Serialize, Deserialize)]
struct HexForm {
    len: usize,
    hex: String,
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        HexForm {
            len: self.len(),
            hex: self.to_hex(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let form = HexForm::deserialize(deserializer)?;
        BitString::from_hex(&form.hex, form.len).map_err(serde::de::Error::custom)
    }
}
