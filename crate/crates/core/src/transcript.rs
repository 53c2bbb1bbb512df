//! Meetings, queries and token-budgeted segmentation.
//!
//! A transcript is split greedily: utterances are appended to the current
//! segment in order, and an utterance that would push the segment past the
//! budget closes it first. A single utterance that is over budget on its own
//! is cut at token boundaries into consecutive fragments, so no text is ever
//! dropped.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::num::NonZeroUsize;
use core::ops::Range;

use crate::text::render_line;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TranscriptError {
    #[error("meeting {meeting}: transcript has no utterances")]
    NoUtterances { meeting: String },
    #[error("meeting {meeting}: utterance {index} has empty content")]
    EmptyUtterance { meeting: String, index: usize },
    #[error("query {query}: text is empty")]
    EmptyQuery { query: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Utterance {
    index: usize,
    speaker: String,
    content: String,
}

impl Utterance {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn speaker(&self) -> &str {
        &self.speaker
    }

    pub fn content(&self) -> &str {
        &self.content
    }

    /// `speaker: content`, the form that segments are built from.
    pub fn rendered(&self) -> String {
        render_line(&self.speaker, &self.content)
    }
}

/// One meeting: an ordered, non-empty list of speaker-attributed turns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    meeting_id: String,
    utterances: Vec<Utterance>,
}

impl Transcript {
    /// Builds a transcript from `(speaker, content)` turns. Content is trimmed;
    /// indices are assigned from 0.
    pub fn new<I, S, C>(meeting_id: impl Into<String>, turns: I) -> Result<Self, TranscriptError>
    where
        I: IntoIterator<Item = (S, C)>,
        S: Into<String>,
        C: AsRef<str>,
    {
        let meeting_id = meeting_id.into();
        let mut utterances = Vec::new();
        for (index, (speaker, content)) in turns.into_iter().enumerate() {
            let content = content.as_ref().trim();
            if content.is_empty() {
                return Err(TranscriptError::EmptyUtterance { meeting: meeting_id, index });
            }
            utterances.push(Utterance {
                index,
                speaker: String::from(speaker.into().trim()),
                content: String::from(content),
            });
        }
        if utterances.is_empty() {
            return Err(TranscriptError::NoUtterances { meeting: meeting_id });
        }
        Ok(Self { meeting_id, utterances })
    }

    pub fn meeting_id(&self) -> &str {
        &self.meeting_id
    }

    pub fn utterances(&self) -> &[Utterance] {
        &self.utterances
    }

    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    /// Distinct speaker labels in order of first appearance.
    pub fn speakers(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for u in &self.utterances {
            if !out.contains(&u.speaker.as_str()) {
                out.push(&u.speaker);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum QueryKind {
    General,
    Specific,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    query_id: String,
    meeting_id: String,
    text: String,
    kind: QueryKind,
    reference_summary: Option<String>,
}

impl Query {
    pub fn new(
        query_id: impl Into<String>,
        meeting_id: impl Into<String>,
        text: impl AsRef<str>,
        kind: QueryKind,
        reference_summary: Option<String>,
    ) -> Result<Self, TranscriptError> {
        let query_id = query_id.into();
        let text = text.as_ref().trim();
        if text.is_empty() {
            return Err(TranscriptError::EmptyQuery { query: query_id });
        }
        Ok(Self {
            query_id,
            meeting_id: meeting_id.into(),
            text: String::from(text),
            kind,
            reference_summary,
        })
    }

    pub fn query_id(&self) -> &str {
        &self.query_id
    }

    pub fn meeting_id(&self) -> &str {
        &self.meeting_id
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn kind(&self) -> QueryKind {
        self.kind
    }

    pub fn reference_summary(&self) -> Option<&str> {
        self.reference_summary.as_deref()
    }
}

/// `(meeting, ordinal)`; ordinals are 0-based document positions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SegmentId {
    pub meeting_id: String,
    pub ordinal: usize,
}

impl SegmentId {
    pub fn new(meeting_id: impl Into<String>, ordinal: usize) -> Self {
        Self { meeting_id: meeting_id.into(), ordinal }
    }
}

impl fmt::Display for SegmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.meeting_id, self.ordinal)
    }
}

/// Position of a piece cut from an utterance that exceeded the budget alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Fragment {
    pub index: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Segment {
    pub id: SegmentId,
    /// Inclusive utterance index range.
    pub first_utterance: usize,
    pub last_utterance: usize,
    /// Rendered `speaker: content` lines joined by `\n`.
    pub text: String,
    pub token_count: usize,
    /// Set when this segment is one piece of an oversized utterance.
    pub fragment: Option<Fragment>,
}

impl Segment {
    pub fn ordinal(&self) -> usize {
        self.id.ordinal
    }

    pub fn meeting_id(&self) -> &str {
        &self.id.meeting_id
    }

    pub fn span_len(&self) -> usize {
        self.last_utterance - self.first_utterance + 1
    }
}

/// Something that can locate tokens in text.
pub trait Tokenizer {
    /// Byte ranges of each token, in order.
    fn token_spans(&self, text: &str) -> Vec<Range<usize>>;

    fn count(&self, text: &str) -> usize {
        self.token_spans(text).len()
    }
}

/// Built-in tokenizers selectable from configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum TokenizerKind {
    /// Maximal runs of non-whitespace.
    #[default]
    Whitespace,
    /// Alphanumeric runs plus every other non-whitespace character as its own
    /// token; closer to subword counts on punctuated text.
    WordPunct,
}

impl TokenizerKind {
    pub fn name(self) -> &'static str {
        match self {
            TokenizerKind::Whitespace => "whitespace",
            TokenizerKind::WordPunct => "word-punct",
        }
    }
}

impl Tokenizer for TokenizerKind {
    fn token_spans(&self, text: &str) -> Vec<Range<usize>> {
        match self {
            TokenizerKind::Whitespace => whitespace_spans(text),
            TokenizerKind::WordPunct => word_punct_spans(text),
        }
    }

    fn count(&self, text: &str) -> usize {
        match self {
            TokenizerKind::Whitespace => text.split_whitespace().count(),
            TokenizerKind::WordPunct => word_punct_spans(text).len(),
        }
    }
}

fn whitespace_spans(text: &str) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push(s..i);
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(s..text.len());
    }
    out
}

fn word_punct_spans(text: &str) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if c.is_alphanumeric() {
            if start.is_none() {
                start = Some(i);
            }
            continue;
        }
        if let Some(s) = start.take() {
            out.push(s..i);
        }
        if !c.is_whitespace() {
            out.push(i..i + c.len_utf8());
        }
    }
    if let Some(s) = start {
        out.push(s..text.len());
    }
    out
}

pub fn count_tokens(text: &str, tokenizer: &dyn Tokenizer) -> usize {
    tokenizer.count(text)
}

/// Splits a transcript into segments of at most `budget` tokens.
pub fn segment_transcript(
    transcript: &Transcript,
    budget: NonZeroUsize,
    tokenizer: &dyn Tokenizer,
) -> Vec<Segment> {
    let budget = budget.get();
    let meeting = transcript.meeting_id();
    let mut out: Vec<Segment> = Vec::new();
    let mut current: Option<(usize, usize, String)> = None;

    let close = |out: &mut Vec<Segment>, cur: (usize, usize, String)| {
        let (first, last, text) = cur;
        let token_count = tokenizer.count(&text);
        out.push(Segment {
            id: SegmentId::new(meeting, out.len()),
            first_utterance: first,
            last_utterance: last,
            text,
            token_count,
            fragment: None,
        });
    };

    for u in transcript.utterances() {
        let line = u.rendered();
        if tokenizer.count(&line) > budget {
            if let Some(cur) = current.take() {
                close(&mut out, cur);
            }
            let spans = tokenizer.token_spans(&line);
            let total = spans.len().div_ceil(budget);
            for (piece, chunk) in spans.chunks(budget).enumerate() {
                let text = String::from(&line[chunk[0].start..chunk[chunk.len() - 1].end]);
                let token_count = tokenizer.count(&text);
                out.push(Segment {
                    id: SegmentId::new(meeting, out.len()),
                    first_utterance: u.index(),
                    last_utterance: u.index(),
                    text,
                    token_count,
                    fragment: Some(Fragment { index: piece, total }),
                });
            }
            continue;
        }
        current = match current.take() {
            None => Some((u.index(), u.index(), line)),
            Some((first, last, text)) => {
                let mut candidate = String::with_capacity(text.len() + line.len() + 1);
                candidate.push_str(&text);
                candidate.push('\n');
                candidate.push_str(&line);
                if tokenizer.count(&candidate) <= budget {
                    Some((first, u.index(), candidate))
                } else {
                    close(&mut out, (first, last, text));
                    Some((u.index(), u.index(), line))
                }
            }
        };
    }
    if let Some(cur) = current.take() {
        close(&mut out, cur);
    }
    out
}
