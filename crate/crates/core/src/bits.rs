//! Packed bit-fields over lattice edges.
//!
//! Hex form: the field is laid out as little-endian bytes, byte `k` holding
//! bits `8k..8k+7` with bit `i` at position `i % 8`. Bytes are printed in
//! increasing `k` as two lowercase hex digits each, so an `n`-bit field has
//! `2 * ceil(n / 8)` digits. Padding bits past `n` are always zero.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitField {
    words: Vec<u64>,
    len: usize,
}

impl BitField {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut out = Self::zeros(len);
        for i in indices {
            out.toggle(i);
        }
        out
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut out = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                out.set(i, true);
            }
        }
        out
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    pub fn xor_assign(&mut self, other: &BitField) -> Result<()> {
        if other.len != self.len {
            return Err(Error::SizeMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
        Ok(())
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Parity of the overlap with `other`.
    pub fn overlap_parity(&self, other: &BitField) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            core::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let tz = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * 64 + tz)
                }
            })
        })
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn to_hex(&self) -> String {
        const DIGITS: &[u8; 16] = b"0123456789abcdef";
        let nbytes = self.len.div_ceil(8);
        let mut s = String::with_capacity(2 * nbytes);
        for k in 0..nbytes {
            let byte = (self.words[k / 8] >> ((k % 8) * 8)) as u8;
            s.push(DIGITS[(byte >> 4) as usize] as char);
            s.push(DIGITS[(byte & 0xf) as usize] as char);
        }
        s
    }

    pub fn from_hex(len: usize, hex: &str) -> Result<Self> {
        let nbytes = len.div_ceil(8);
        let raw = hex.as_bytes();
        if raw.len() != 2 * nbytes {
            return Err(Error::SizeMismatch {
                expected: 2 * nbytes,
                actual: raw.len(),
            });
        }
        let nibble = |c: u8| -> Result<u64> {
            match c {
                b'0'..=b'9' => Ok((c - b'0') as u64),
                b'a'..=b'f' => Ok((c - b'a' + 10) as u64),
                b'A'..=b'F' => Ok((c - b'A' + 10) as u64),
                _ => Err(Error::Parse("invalid hex digit")),
            }
        };
        let mut out = Self::zeros(len);
        for k in 0..nbytes {
            let byte = (nibble(raw[2 * k])? << 4) | nibble(raw[2 * k + 1])?;
            out.words[k / 8] |= byte << ((k % 8) * 8);
        }
        if !len.is_multiple_of(64) {
            if let Some(last) = out.words.last() {
                if last >> (len % 64) != 0 {
                    return Err(Error::Parse("bits set past the field length"));
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for BitField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitField[{}]({})", self.len, self.to_hex())
    }
}
