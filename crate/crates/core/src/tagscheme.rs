//! Boundary (BIOES) and unified (BIOES x sentiment) tag vocabularies,
//! span <-> tag sequence conversion and the constrained boundary-to-unified
//! transition structure.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::ops::masked_row_softmax;
use crate::scalar::Scalar;

/// Position of a token relative to an opinion target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    B,
    I,
    E,
    S,
    O,
}

impl BoundaryTag {
    pub const COUNT: usize = 5;
    pub const ALL: [BoundaryTag; 5] = [
        BoundaryTag::B,
        BoundaryTag::I,
        BoundaryTag::E,
        BoundaryTag::S,
        BoundaryTag::O,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(idx: usize) -> Option<Self> {
        Self::ALL.get(idx).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryTag::B => "B",
            BoundaryTag::I => "I",
            BoundaryTag::E => "E",
            BoundaryTag::S => "S",
            BoundaryTag::O => "O",
        }
    }
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownTag(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sentiment {
    #[serde(rename = "POS")]
    Pos,
    #[serde(rename = "NEG")]
    Neg,
    #[serde(rename = "NEU")]
    Neu,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Sentiment::Pos, Sentiment::Neg, Sentiment::Neu];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Pos => "POS",
            Sentiment::Neg => "NEG",
            Sentiment::Neu => "NEU",
        }
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sentiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownTag(s.to_string()))
    }
}

/// One of the 13 unified tags. Index order is
/// `B-POS I-POS E-POS S-POS B-NEG .. S-NEU O`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnifiedTag(u8);

impl UnifiedTag {
    pub const COUNT: usize = 13;
    pub const O: UnifiedTag = UnifiedTag(12);

    /// Combines a boundary position with a sentiment. `O` ignores the sentiment.
    pub fn new(boundary: BoundaryTag, sentiment: Sentiment) -> Self {
        match boundary {
            BoundaryTag::O => Self::O,
            b => UnifiedTag((sentiment.index() * 4 + b.index()) as u8),
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(idx: usize) -> Option<Self> {
        (idx < Self::COUNT).then_some(UnifiedTag(idx as u8))
    }

    pub fn all() -> impl Iterator<Item = UnifiedTag> {
        (0..Self::COUNT as u8).map(UnifiedTag)
    }

    /// `None` for `O`.
    pub fn parts(self) -> Option<(BoundaryTag, Sentiment)> {
        if self == Self::O {
            return None;
        }
        let idx = self.index();
        Some((BoundaryTag::ALL[idx % 4], Sentiment::ALL[idx / 4]))
    }

    pub fn boundary(self) -> BoundaryTag {
        boundary_of(self)
    }

    pub fn sentiment(self) -> Option<Sentiment> {
        self.parts().map(|(_, s)| s)
    }
}

/// Strips the sentiment part of a unified tag.
pub fn boundary_of(tag: UnifiedTag) -> BoundaryTag {
    tag.parts().map_or(BoundaryTag::O, |(b, _)| b)
}

impl fmt::Display for UnifiedTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.parts() {
            None => f.write_str("O"),
            Some((b, s)) => write!(f, "{b}-{s}"),
        }
    }
}

impl fmt::Debug for UnifiedTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for UnifiedTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "O" {
            return Ok(Self::O);
        }
        let unknown = || Error::UnknownTag(s.to_string());
        let (b, sent) = s.split_once('-').ok_or_else(unknown)?;
        let b: BoundaryTag = b.parse().map_err(|_| unknown())?;
        if b == BoundaryTag::O {
            return Err(unknown());
        }
        let sent: Sentiment = sent.parse().map_err(|_| unknown())?;
        Ok(Self::new(b, sent))
    }
}

/// An opinion target: inclusive 0-based token range, with a sentiment unless
/// the span only describes a boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TargetSpan {
    pub start: usize,
    pub end: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentiment: Option<Sentiment>,
}

impl TargetSpan {
    pub fn new(start: usize, end: usize, sentiment: Sentiment) -> Self {
        TargetSpan {
            start,
            end,
            sentiment: Some(sentiment),
        }
    }

    pub fn boundary(start: usize, end: usize) -> Self {
        TargetSpan {
            start,
            end,
            sentiment: None,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The same span with its sentiment dropped.
    pub fn without_sentiment(self) -> Self {
        TargetSpan::boundary(self.start, self.end)
    }
}

impl fmt::Display for TargetSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sentiment {
            Some(s) => write!(f, "({},{},{s})", self.start, self.end),
            None => write!(f, "({},{})", self.start, self.end),
        }
    }
}

/// Checks range and pairwise overlap of `spans` against a sentence of `len` tokens.
pub fn validate_spans(len: usize, spans: &[TargetSpan]) -> Result<()> {
    for (index, span) in spans.iter().enumerate() {
        if span.start > span.end || span.end >= len {
            return Err(Error::SpanOutOfRange {
                index,
                start: span.start,
                end: span.end,
                len,
            });
        }
    }
    for (index, span) in spans.iter().enumerate() {
        for (other, prev) in spans[..index].iter().enumerate() {
            if span.start <= prev.end && prev.start <= span.end {
                return Err(Error::SpanOverlap {
                    index,
                    other,
                    start: span.start,
                    end: span.end,
                });
            }
        }
    }
    Ok(())
}

fn boundary_positions(span: &TargetSpan) -> impl Iterator<Item = (usize, BoundaryTag)> + '_ {
    (span.start..=span.end).map(move |t| {
        let tag = if span.start == span.end {
            BoundaryTag::S
        } else if t == span.start {
            BoundaryTag::B
        } else if t == span.end {
            BoundaryTag::E
        } else {
            BoundaryTag::I
        };
        (t, tag)
    })
}

pub fn encode_boundary(len: usize, spans: &[TargetSpan]) -> Result<Vec<BoundaryTag>> {
    validate_spans(len, spans)?;
    let mut tags = vec![BoundaryTag::O; len];
    for span in spans {
        for (t, tag) in boundary_positions(span) {
            tags[t] = tag;
        }
    }
    Ok(tags)
}

pub fn encode_unified(len: usize, spans: &[TargetSpan]) -> Result<Vec<UnifiedTag>> {
    validate_spans(len, spans)?;
    let mut tags = vec![UnifiedTag::O; len];
    for (index, span) in spans.iter().enumerate() {
        let sentiment = span.sentiment.ok_or(Error::MissingSentiment {
            index,
            start: span.start,
            end: span.end,
        })?;
        for (t, tag) in boundary_positions(span) {
            tags[t] = UnifiedTag::new(tag, sentiment);
        }
    }
    Ok(tags)
}

/// Lenient left-to-right span reader shared by both decoders.
///
/// A span opens at `B`, or at `I`/`E`/`S` when no span is open. An open span
/// is closed (inclusively) by `E` or `S`, closed before `O` or `B`, and closed
/// at the end of the sequence.
fn decode_ranges(boundaries: impl Iterator<Item = BoundaryTag>) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut open: Option<usize> = None;
    let mut len = 0;
    for (t, tag) in boundaries.enumerate() {
        len = t + 1;
        match tag {
            BoundaryTag::O => {
                if let Some(start) = open.take() {
                    out.push((start, t - 1));
                }
            }
            BoundaryTag::B => {
                if let Some(start) = open.replace(t) {
                    out.push((start, t - 1));
                }
            }
            BoundaryTag::I => {
                open.get_or_insert(t);
            }
            BoundaryTag::E | BoundaryTag::S => {
                let start = open.take().unwrap_or(t);
                out.push((start, t));
            }
        }
    }
    if let Some(start) = open {
        out.push((start, len - 1));
    }
    out
}

/// Majority sentiment over `tags`; ties go to the tied sentiment seen first.
fn majority_sentiment(tags: &[UnifiedTag]) -> Sentiment {
    let mut counts = [0usize; 3];
    let mut first_seen = [usize::MAX; 3];
    for (pos, s) in tags.iter().filter_map(|t| t.sentiment()).enumerate() {
        counts[s.index()] += 1;
        first_seen[s.index()] = first_seen[s.index()].min(pos);
    }
    Sentiment::ALL
        .iter()
        .copied()
        .max_by(|a, b| {
            counts[a.index()]
                .cmp(&counts[b.index()])
                .then(first_seen[b.index()].cmp(&first_seen[a.index()]))
        })
        .expect("three sentiments")
}

/// Reads sentiment-bearing spans from a (possibly ill-formed) unified sequence.
pub fn decode_unified(tags: &[UnifiedTag]) -> Vec<TargetSpan> {
    decode_ranges(tags.iter().map(|t| t.boundary()))
        .into_iter()
        .map(|(start, end)| TargetSpan::new(start, end, majority_sentiment(&tags[start..=end])))
        .collect()
}

pub fn decode_boundary(tags: &[BoundaryTag]) -> Vec<TargetSpan> {
    decode_ranges(tags.iter().copied())
        .into_iter()
        .map(|(start, end)| TargetSpan::boundary(start, end))
        .collect()
}

/// 5x13 validity mask: `mask[i][j]` is true iff unified tag `j` agrees with boundary tag `i`.
pub fn transition_mask() -> [[bool; UnifiedTag::COUNT]; BoundaryTag::COUNT] {
    let mut mask = [[false; UnifiedTag::COUNT]; BoundaryTag::COUNT];
    for tag in UnifiedTag::all() {
        mask[tag.boundary().index()][tag.index()] = true;
    }
    mask
}

pub fn transition_mask_flat() -> Vec<bool> {
    transition_mask().iter().flatten().copied().collect()
}

/// Boundary-to-unified transition matrix, stored as free logits over each
/// row's valid entries. Masked logits are kept at zero and never read.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<T> {
    pub logits: Vec<T>,
    pub trainable: bool,
}

impl<T: Scalar> TransitionMatrix<T> {
    pub const ROWS: usize = BoundaryTag::COUNT;
    pub const COLS: usize = UnifiedTag::COUNT;

    pub fn from_logits(logits: Vec<T>, trainable: bool) -> Result<Self> {
        if logits.len() != Self::ROWS * Self::COLS {
            return Err(Error::Shape(format!(
                "transition logits need {} entries, got {}",
                Self::ROWS * Self::COLS,
                logits.len()
            )));
        }
        Ok(TransitionMatrix { logits, trainable })
    }

    /// Row-major 5x13 probability matrix.
    pub fn realize(&self) -> Vec<T> {
        masked_row_softmax(&self.logits, &transition_mask_flat(), Self::COLS)
    }

    pub fn row(&self, boundary: BoundaryTag) -> Vec<T> {
        let full = self.realize();
        let i = boundary.index() * Self::COLS;
        full[i..i + Self::COLS].to_vec()
    }
}

/// Uniform transitions over each boundary tag's coherent unified tags.
pub fn init_transition<T: Scalar>(trainable: bool) -> TransitionMatrix<T> {
    TransitionMatrix {
        logits: vec![T::zero(); BoundaryTag::COUNT * UnifiedTag::COUNT],
        trainable,
    }
}
