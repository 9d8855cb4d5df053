//! Word extraction, Bloom filters and printed-copy content matching.
//!
//! A payment records a Bloom filter of the document's distinct words. To
//! check a printed copy, its words are extracted again and each one is
//! tested against the recorded filter; the share of hits is reported.
//!
//! Probe positions use double hashing over two Keccak-derived values:
//!
//! ```text
//! h1 = be64(keccak(0x00 || word)[..8])
//! h2 = be64(keccak(0x01 || word)[..8]) | 1
//! probe_i = (h1 + i * h2) mod m,  i in 0..k
//! ```
//!
//! `m` is a power of two and `h2` is odd, so the `k` probes are distinct.
//!
//! The match only says which words are present. Deleted or reordered words
//! go unnoticed: a copy built from a subset of the original's words still
//! scores 100%.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;
use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

use crate::crypto::{decode_hex_exact, encode_hex, hash256_parts};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContentError {
    #[error("invalid filter parameters: {0}")]
    InvalidParams(String),
    #[error("malformed filter encoding: {0}")]
    BadEncoding(String),
    #[error("no words could be extracted from the document")]
    EmptyDocument,
}

impl ContentError {
    pub fn code(&self) -> &'static str {
        match self {
            ContentError::InvalidParams(_) => "InvalidParams",
            ContentError::BadEncoding(_) => "BadFilterEncoding",
            ContentError::EmptyDocument => "EmptyDocument",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BloomFilterParams {
    m: u32,
    k: u8,
}

impl BloomFilterParams {
    pub const DEFAULT: BloomFilterParams = BloomFilterParams { m: 16384, k: 7 };

    pub fn new(m: u32, k: u8) -> Result<Self, ContentError> {
        if m < 8 || !m.is_power_of_two() {
            return Err(ContentError::InvalidParams(format!(
                "m = {m} must be a power of two and at least 8"
            )));
        }
        if !(1..=32).contains(&k) {
            return Err(ContentError::InvalidParams(format!(
                "k = {k} must be in 1..=32"
            )));
        }
        Ok(BloomFilterParams { m, k })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    /// `(1 - e^(-kn/m))^k`, the classical false-positive estimate for `n` items.
    pub fn expected_fpr(&self, n: usize) -> f64 {
        let k = self.k as f64;
        (1.0 - (-k * n as f64 / self.m as f64).exp()).powf(k)
    }
}

impl Default for BloomFilterParams {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct BloomFilter {
    params: BloomFilterParams,
    bits: Vec<u8>,
}

impl fmt::Debug for BloomFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BloomFilter")
            .field("m", &self.params.m)
            .field("k", &self.params.k)
            .field("popcount", &self.popcount())
            .finish()
    }
}

fn probe_seeds(word: &str) -> (u64, u64) {
    let a = hash256_parts(&[&[0x00], word.as_bytes()]);
    let b = hash256_parts(&[&[0x01], word.as_bytes()]);
    let h1 = u64::from_be_bytes(a.0[..8].try_into().unwrap());
    let h2 = u64::from_be_bytes(b.0[..8].try_into().unwrap()) | 1;
    (h1, h2)
}

impl BloomFilter {
    pub fn empty(params: BloomFilterParams) -> Self {
        BloomFilter {
            params,
            bits: vec![0u8; params.m as usize / 8],
        }
    }

    pub fn params(&self) -> BloomFilterParams {
        self.params
    }

    /// Bit positions probed for `word`.
    pub fn probes(&self, word: &str) -> impl Iterator<Item = usize> {
        let (h1, h2) = probe_seeds(word);
        // m divides 2^64, so wrapping arithmetic agrees with exact mod m.
        let mask = self.params.m as u64 - 1;
        (0..self.params.k as u64).map(move |i| (h1.wrapping_add(i.wrapping_mul(h2)) & mask) as usize)
    }

    pub fn insert(&mut self, word: &str) {
        let probes: Vec<usize> = self.probes(word).collect();
        for j in probes {
            self.bits[j / 8] |= 1 << (j % 8);
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.probes(word)
            .all(|j| self.bits[j / 8] & (1 << (j % 8)) != 0)
    }

    pub fn popcount(&self) -> u32 {
        self.bits.iter().map(|b| b.count_ones()).sum()
    }

    /// Wire format: `be32(m) || k || bits`, bit `j` stored at bit `j % 8`
    /// (LSB first) of byte `j / 8`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(5 + self.bits.len());
        out.extend_from_slice(&self.params.m.to_be_bytes());
        out.push(self.params.k);
        out.extend_from_slice(&self.bits);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ContentError> {
        if bytes.len() < 5 {
            return Err(ContentError::BadEncoding("shorter than the 5-byte header".into()));
        }
        let m = u32::from_be_bytes(bytes[..4].try_into().unwrap());
        let params = BloomFilterParams::new(m, bytes[4])
            .map_err(|e| ContentError::BadEncoding(e.to_string()))?;
        let bits = &bytes[5..];
        if bits.len() != m as usize / 8 {
            return Err(ContentError::BadEncoding(format!(
                "expected {} bit bytes, got {}",
                m / 8,
                bits.len()
            )));
        }
        Ok(BloomFilter {
            params,
            bits: bits.to_vec(),
        })
    }

    pub fn to_hex(&self) -> String {
        encode_hex(&self.to_bytes())
    }

    pub fn from_hex(s: &str) -> Result<Self, ContentError> {
        let body_len = s.len().saturating_sub(2) / 2;
        let bytes =
            decode_hex_exact(s, body_len).map_err(|e| ContentError::BadEncoding(e.to_string()))?;
        Self::from_bytes(&bytes)
    }
}

impl Serialize for BloomFilter {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for BloomFilter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BloomFilter::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Distinct normalized words of a document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordSet {
    words: BTreeSet<String>,
}

impl WordSet {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }
}

impl FromIterator<String> for WordSet {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        WordSet {
            words: iter.into_iter().filter(|w| !w.is_empty()).collect(),
        }
    }
}

fn is_word_char(c: char) -> bool {
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        UppercaseLetter
            | LowercaseLetter
            | TitlecaseLetter
            | ModifierLetter
            | OtherLetter
            | DecimalNumber
    )
}

/// NFC-normalizes and lowercases `text`, then splits it on every run of
/// characters that are neither letters nor decimal digits.
pub fn extract_words(text: &str) -> WordSet {
    let normalized: String = text.nfc().collect::<String>().to_lowercase().nfc().collect();
    normalized
        .split(|c: char| !is_word_char(c))
        .filter(|w| !w.is_empty())
        .map(str::to_owned)
        .collect()
}

pub fn build_filter(words: &WordSet, params: BloomFilterParams) -> BloomFilter {
    let mut f = BloomFilter::empty(params);
    for w in words.iter() {
        f.insert(w);
    }
    f
}

pub fn test_word(filter: &BloomFilter, word: &str) -> bool {
    filter.contains(word)
}

/// Outcome of testing every distinct word of a document against a filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchResult {
    pub tested: u64,
    pub hits: u64,
}

impl MatchResult {
    pub fn is_full_match(&self) -> bool {
        self.hits == self.tested
    }

    pub fn percentage(&self) -> f64 {
        100.0 * self.hits as f64 / self.tested as f64
    }

    /// Percentage as text: exact integers print bare (`"100"`), anything
    /// else is rounded to six decimals with trailing zeros trimmed.
    pub fn percentage_string(&self) -> String {
        let scaled = self.hits as u128 * 100;
        if scaled % self.tested as u128 == 0 {
            return (scaled / self.tested as u128).to_string();
        }
        let s = format!("{:.6}", self.percentage());
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

impl Serialize for MatchResult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("MatchResult", 3)?;
        st.serialize_field("hits", &self.hits.to_string())?;
        st.serialize_field("percentage", &self.percentage_string())?;
        st.serialize_field("tested", &self.tested.to_string())?;
        st.end()
    }
}

pub fn match_content(text: &str, filter: &BloomFilter) -> Result<MatchResult, ContentError> {
    let words = extract_words(text);
    if words.is_empty() {
        return Err(ContentError::EmptyDocument);
    }
    let hits = words.iter().filter(|w| filter.contains(w)).count() as u64;
    Ok(MatchResult {
        tested: words.len() as u64,
        hits,
    })
}
