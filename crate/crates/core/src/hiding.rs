//! One hidden bit per optionally-quotable field.
//!
//! A field whose content has no special character may be written quoted
//! (bit 1) or bare (bit 0). Fields that must be quoted carry nothing.
//! Bits are assigned to carrier fields in row-major order over the ragged
//! record structure.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::csv_model::{needs_quotes, Field, Table};

/// An ordered sequence of bits.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        BitString(Vec::new())
    }

    pub fn zeros(len: usize) -> Self {
        BitString(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        BitString(vec![true; len])
    }

    /// Expands bytes most-significant bit first.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        BitString(
            bytes
                .iter()
                .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1 == 1))
                .collect(),
        )
    }

    /// Packs the bits MSB first. `None` unless the length is a multiple of 8.
    pub fn to_bytes(&self) -> Option<Vec<u8>> {
        if !self.0.len().is_multiple_of(8) {
            return None;
        }
        Some(
            self.0
                .chunks(8)
                .map(|chunk| chunk.iter().fold(0u8, |acc, &bit| (acc << 1) | bit as u8))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    /// Splits into the first `at` bits and the rest.
    pub fn split_at(&self, at: usize) -> (BitString, BitString) {
        let (head, tail) = self.0.split_at(at.min(self.0.len()));
        (BitString(head.to_vec()), BitString(tail.to_vec()))
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        BitString(bits)
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        BitString(iter.into_iter().collect())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &bit in &self.0 {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid bit character {0:?}")]
pub struct InvalidBit(pub char);

impl FromStr for BitString {
    type Err = InvalidBit;

    /// Parses a string of `0` and `1` characters.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(InvalidBit(other)),
            })
            .collect()
    }
}

/// The message does not have exactly one bit per carrier field.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("message has {actual} bits but the table carries {expected}")]
pub struct LengthMismatch {
    pub expected: usize,
    pub actual: usize,
}

/// Bits recovered from a table, with the field accounting behind them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionResult {
    pub bits: BitString,
    /// Fields able to carry a bit.
    pub carriers: usize,
    /// Fields that must be quoted and so carry nothing.
    pub skipped: usize,
}

/// 1 if `content` may be written without quotes, 0 if quoting is mandatory.
pub fn noesc(content: &str) -> u8 {
    u8::from(!needs_quotes(content))
}

/// Number of bits the table can carry.
pub fn payload(table: &Table) -> usize {
    table.fields().filter(|f| f.is_carrier()).count()
}

/// Re-quotes every carrier field according to `message`, row-major.
///
/// The existing quoting of `table` is ignored, so callers normally pass a
/// stripped table. Field contents and record structure never change.
pub fn embed(table: &Table, message: &BitString) -> Result<Table, LengthMismatch> {
    let expected = payload(table);
    if message.len() != expected {
        return Err(LengthMismatch {
            expected,
            actual: message.len(),
        });
    }
    let mut bits = message.iter();
    Ok(table.map_fields(|f| {
        let quoted = if f.is_carrier() {
            bits.next().expect("message length checked against payload")
        } else {
            true
        };
        Field::new(f.content.clone(), quoted)
    }))
}

/// Reads the hidden bits: bare carrier is 0, quoted carrier is 1, fields
/// with mandatory quotes are skipped.
pub fn extract(table: &Table) -> ExtractionResult {
    let mut bits = BitString::new();
    let mut skipped = 0;
    for field in table.fields() {
        if !field.quoted {
            bits.push(false);
        } else if field.is_carrier() {
            bits.push(true);
        } else {
            skipped += 1;
        }
    }
    ExtractionResult {
        carriers: bits.len(),
        bits,
        skipped,
    }
}
