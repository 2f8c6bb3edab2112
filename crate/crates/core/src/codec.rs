//! Self-delimiting codes for strings, naturals, lists, functions and contexts.
//!
//! Every encoder here produces a prefix code:
//!
//! * a string `x` is written as `1^ℓ(x) 0 x`,
//! * a natural `n` is written as `1^n 0`,
//! * a list `z₁ … zₙ` is written as the code of `n` followed by the code of
//!   every element.
//!
//! Functions are lists of their values in canonical order of the search
//! space, contexts are the list of `X` followed by the list of `Y`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::domain::{ProblemContext, TargetFunction};
use crate::error::{Error, Result};

/// A finite binary string.
///
/// Ordering is the canonical one: shorter strings first, then
/// lexicographic with `0 < 1`.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// The `len` low bits of `value`, most significant first.
    pub fn from_uint(value: u64, len: usize) -> Self {
        let bits = (0..len).rev().map(|i| i < 64 && (value >> i) & 1 == 1).collect();
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn push_repeated(&mut self, bit: bool, count: usize) {
        self.bits.extend(std::iter::repeat_n(bit, count));
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.extend_from(other);
        out
    }

    pub fn is_proper_prefix_of(&self, other: &BitString) -> bool {
        self.len() < other.len() && other.bits.starts_with(&self.bits)
    }

    /// All strings of exactly `len` bits, in canonical order.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64, "string length {len} too large to enumerate");
        (0..1u64 << len).map(move |v| BitString::from_uint(v, len))
    }

    /// All strings of length at most `max_len`, in canonical order.
    pub fn all_up_to(max_len: usize) -> impl Iterator<Item = BitString> {
        (0..=max_len).flat_map(BitString::all_of_length)
    }

    /// The first `n` strings in canonical order, skipping the empty string.
    pub fn first_nonempty(n: usize) -> Vec<BitString> {
        (1..).flat_map(BitString::all_of_length).take(n).collect()
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("`{other}` is not a binary digit"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString::from_bits)
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

/// Sequential reader over a bit slice, used by every decoder and by the VM.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a [bool]) -> Self {
        Self { bits, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn is_exhausted(&self) -> bool {
        self.pos == self.bits.len()
    }

    pub fn read_bit(&mut self) -> Option<bool> {
        let bit = *self.bits.get(self.pos)?;
        self.pos += 1;
        Some(bit)
    }

    /// Reads `len` raw bits.
    pub fn read_raw(&mut self, len: usize) -> Option<BitString> {
        if self.remaining() < len {
            self.pos = self.bits.len();
            return None;
        }
        let out = BitString::from_bits(self.bits[self.pos..self.pos + len].to_vec());
        self.pos += len;
        Some(out)
    }

    /// Reads `len` bits as an unsigned integer, most significant first.
    pub fn read_uint(&mut self, len: usize) -> Option<u64> {
        let mut value = 0u64;
        for _ in 0..len {
            value = (value << 1) | u64::from(self.read_bit()?);
        }
        Some(value)
    }

    pub fn read_nat(&mut self) -> Option<usize> {
        let mut n = 0;
        while self.read_bit()? {
            n += 1;
        }
        Some(n)
    }

    pub fn read_string(&mut self) -> Option<BitString> {
        let len = self.read_nat()?;
        self.read_raw(len)
    }

    pub fn read_list(&mut self) -> Option<Vec<BitString>> {
        let n = self.read_nat()?;
        (0..n).map(|_| self.read_string()).collect()
    }
}

pub fn encode_nat(n: usize) -> BitString {
    let mut out = BitString::new();
    out.push_repeated(true, n);
    out.push(false);
    out
}

pub fn encode_string(x: &BitString) -> BitString {
    let mut out = encode_nat(x.len());
    out.extend_from(x);
    out
}

pub fn encode_list(items: &[BitString]) -> BitString {
    let mut out = encode_nat(items.len());
    for item in items {
        out.extend_from(&encode_string(item));
    }
    out
}

/// Nested list code: every inner list is itself written as a list code.
pub fn encode_nested_list(items: &[Vec<BitString>]) -> BitString {
    let mut out = encode_nat(items.len());
    for inner in items {
        out.extend_from(&encode_list(inner));
    }
    out
}

pub fn encode_function(ctx: &ProblemContext, f: &TargetFunction) -> BitString {
    let values: Vec<BitString> = f.values().iter().map(|&y| ctx.y(y).clone()).collect();
    encode_list(&values)
}

pub fn encode_context(ctx: &ProblemContext) -> BitString {
    encode_list(ctx.xs()).concat(&encode_list(ctx.ys()))
}

fn decode_whole<T>(
    bits: &BitString,
    what: &str,
    read: impl FnOnce(&mut BitReader<'_>) -> Option<T>,
) -> Result<T> {
    let mut reader = BitReader::new(bits.bits());
    let value = read(&mut reader).ok_or_else(|| Error::Decode(format!("truncated {what} code")))?;
    if !reader.is_exhausted() {
        return Err(Error::Decode(format!(
            "{} trailing bits after {what} code",
            reader.remaining()
        )));
    }
    Ok(value)
}

pub fn decode_nat(bits: &BitString) -> Result<usize> {
    decode_whole(bits, "natural", |r| r.read_nat())
}

pub fn decode_string(bits: &BitString) -> Result<BitString> {
    decode_whole(bits, "string", |r| r.read_string())
}

pub fn decode_list(bits: &BitString) -> Result<Vec<BitString>> {
    decode_whole(bits, "list", |r| r.read_list())
}

pub fn decode_nested_list(bits: &BitString) -> Result<Vec<Vec<BitString>>> {
    decode_whole(bits, "nested list", |r| {
        let n = r.read_nat()?;
        (0..n).map(|_| r.read_list()).collect()
    })
}

pub fn decode_function(ctx: &ProblemContext, bits: &BitString) -> Result<TargetFunction> {
    let values = decode_list(bits)?;
    let indices = values
        .iter()
        .map(|v| {
            ctx.y_index_of(v)
                .ok_or_else(|| Error::Decode(format!("value {v} is not in the range")))
        })
        .collect::<Result<Vec<_>>>()?;
    TargetFunction::new(ctx, indices)
}

pub fn decode_context(bits: &BitString) -> Result<ProblemContext> {
    let (xs, ys) = decode_whole(bits, "context", |r| Some((r.read_list()?, r.read_list()?)))?;
    ProblemContext::new(xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn golden_vectors() {
        assert_eq!(encode_string(&bs("")).to_string(), "0");
        assert_eq!(encode_string(&bs("01")).to_string(), "11001");
        assert_eq!(encode_string(&bs("1")).to_string(), "101");
        assert_eq!(encode_nat(0).to_string(), "0");
        assert_eq!(encode_nat(2).to_string(), "110");
        assert_eq!(encode_nat(4).to_string(), "11110");
        assert_eq!(encode_list(&[]).to_string(), "0");
        assert_eq!(encode_list(&[bs("1")]).to_string(), "10101");
    }

    #[test]
    fn canonical_order_is_length_first() {
        let mut v = [bs("10"), bs("1"), bs(""), bs("00"), bs("0")];
        v.sort();
        let shown: Vec<String> = v.iter().map(|b| b.to_string()).collect();
        assert_eq!(shown, ["", "0", "1", "00", "10"]);
    }

    #[test]
    fn first_nonempty_strings() {
        let shown: Vec<String> = BitString::first_nonempty(4).iter().map(|b| b.to_string()).collect();
        assert_eq!(shown, ["0", "1", "00", "01"]);
    }

    #[test]
    fn function_encoding_of_constant_on_single_value() {
        let ctx = ProblemContext::standard(2, 2).unwrap();
        let f = TargetFunction::constant(&ctx, ctx.zero_y());
        assert_eq!(encode_function(&ctx, &f), encode_list(&[bs("0"), bs("0")]));
    }

    #[test]
    fn decoders_reject_truncation_and_trailing_bits() {
        assert!(decode_string(&bs("110")).is_err());
        assert!(decode_string(&bs("1010")).is_err());
        assert!(decode_nat(&bs("111")).is_err());
        assert!(decode_list(&bs("10")).is_err());
    }

    #[test]
    fn nested_lists_round_trip() {
        let nested = vec![vec![], vec![bs("0"), bs("")], vec![bs("111")]];
        let code = encode_nested_list(&nested);
        assert_eq!(decode_nested_list(&code).unwrap(), nested);
    }

    #[test]
    fn context_encoding_is_x_list_then_y_list() {
        let ctx = ProblemContext::standard(2, 2).unwrap();
        let code = encode_context(&ctx);
        assert_eq!(code.to_string(), "110100101110100101");
        assert_eq!(decode_context(&code).unwrap(), ctx);
    }
}
