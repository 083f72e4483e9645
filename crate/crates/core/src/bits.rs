//! Fixed-length bit strings used both as oracle inputs and as truth-table indices.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Longest supported string.
pub const MAX_BITS: usize = 64;

/// An `n`-bit string `x_1 x_2 ... x_n`.
///
/// The packed value reads `x_1` as the most significant bit, so the integer
/// value of the string is also its position in a truth table.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: u8,
    value: u64,
}

impl BitString {
    pub fn new(len: usize, value: u64) -> Result<Self> {
        if len == 0 || len > MAX_BITS {
            return Err(Error::ArityOutOfRange(len));
        }
        if len < 64 && value >> len != 0 {
            return Err(Error::InvalidBitString(format!(
                "value {value:#x} does not fit in {len} bits"
            )));
        }
        Ok(Self {
            len: len as u8,
            value,
        })
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(len, 0).expect("length checked by caller")
    }

    pub fn ones(len: usize) -> Self {
        Self::new(len, low_mask(len)).expect("length checked by caller")
    }

    /// The string whose only 1 is at position `i` (0-based from `x_1`).
    pub fn unit(len: usize, i: usize) -> Self {
        Self::zeros(len).flipped(i)
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut value = 0u64;
        for &b in bits {
            value = (value << 1) | b as u64;
        }
        Self::new(bits.len(), value)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Integer value with `x_1` as the most significant bit.
    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    /// Bit `x_{i+1}`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len());
        (self.value >> (self.len() - 1 - i)) & 1 == 1
    }

    #[inline]
    pub fn flipped(&self, i: usize) -> Self {
        debug_assert!(i < self.len());
        Self {
            len: self.len,
            value: self.value ^ (1u64 << (self.len() - 1 - i)),
        }
    }

    #[inline]
    pub fn weight(&self) -> u32 {
        self.value.count_ones()
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(Self {
            len: self.len,
            value: self.value ^ other.value,
        })
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }
}

/// Number of positions where `x` and `y` differ.
pub fn hamming(x: &BitString, y: &BitString) -> Result<u32> {
    x.check_len(y)?;
    Ok((x.value ^ y.value).count_ones())
}

#[inline]
pub(crate) fn low_mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
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

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidBitString(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits).map_err(|_| Error::InvalidBitString(s.to_string()))
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
