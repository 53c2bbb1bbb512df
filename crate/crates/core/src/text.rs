//! Word, sentence and stop-word handling shared by the knowledge, embedding and
//! assembly modules.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::porter;

/// Embedded English stop-word list (the classic SMART-derived set). Sorted.
pub const ENGLISH_STOP_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "aren't", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
    "but", "by", "can", "can't", "cannot", "could", "couldn't", "did", "didn't", "do", "does",
    "doesn't", "doing", "don't", "down", "during", "each", "few", "for", "from", "further", "had",
    "hadn't", "has", "hasn't", "have", "haven't", "having", "he", "he'd", "he'll", "he's", "her",
    "here", "here's", "hers", "herself", "him", "himself", "his", "how", "how's", "i", "i'd",
    "i'll", "i'm", "i've", "if", "in", "into", "is", "isn't", "it", "it's", "its", "itself",
    "let's", "me", "more", "most", "mustn't", "my", "myself", "no", "nor", "not", "of", "off", "on",
    "once", "only", "or", "other", "ought", "our", "ours", "ourselves", "out", "over", "own",
    "same", "shan't", "she", "she'd", "she'll", "she's", "should", "shouldn't", "so", "some",
    "such", "than", "that", "that's", "the", "their", "theirs", "them", "themselves", "then",
    "there", "there's", "these", "they", "they'd", "they'll", "they're", "they've", "this",
    "those", "through", "to", "too", "under", "until", "up", "very", "was", "wasn't", "we", "we'd",
    "we'll", "we're", "we've", "were", "weren't", "what", "what's", "when", "when's", "where",
    "where's", "which", "while", "who", "who's", "whom", "why", "why's", "with", "won't", "would",
    "wouldn't", "you", "you'd", "you'll", "you're", "you've", "your", "yours", "yourself",
    "yourselves",
];

/// A lowercase stop-word set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopWords {
    words: BTreeSet<String>,
}

impl StopWords {
    pub fn english() -> Self {
        Self::from_words(ENGLISH_STOP_WORDS.iter().copied())
    }

    /// Builds a set from arbitrary words; entries are trimmed and lowercased,
    /// blanks are skipped.
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words = words
            .into_iter()
            .map(|w| normalize_apostrophes(&w.as_ref().trim().to_lowercase()))
            .filter(|w| !w.is_empty())
            .collect();
        Self { words }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

impl Default for StopWords {
    fn default() -> Self {
        Self::english()
    }
}

/// Maps text to lowercase content terms: stop words removed, optionally
/// Porter-stemmed.
#[derive(Debug, Clone, Copy)]
pub struct TermNormalizer<'a> {
    pub stop_words: &'a StopWords,
    pub stem: bool,
}

impl<'a> TermNormalizer<'a> {
    pub fn new(stop_words: &'a StopWords, stem: bool) -> Self {
        Self { stop_words, stem }
    }

    /// Normalizes one already-split word. Returns `None` for stop words and
    /// tokens without any alphanumeric character.
    pub fn term(&self, word: &str) -> Option<String> {
        let lower = normalize_apostrophes(&word.to_lowercase());
        if !lower.chars().any(char::is_alphanumeric) || lower.starts_with('\'') {
            return None;
        }
        if self.stop_words.contains(&lower) {
            return None;
        }
        Some(if self.stem { porter::stem(&lower) } else { lower })
    }

    pub fn terms(&self, text: &str) -> Vec<String> {
        words(text).filter_map(|w| self.term(w)).collect()
    }

    pub fn term_set(&self, text: &str) -> BTreeSet<String> {
        words(text).filter_map(|w| self.term(w)).collect()
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

pub(crate) fn normalize_apostrophes(s: &str) -> String {
    if s.contains('\u{2019}') {
        s.replace('\u{2019}', "'")
    } else {
        s.to_string()
    }
}

/// Splits text into words: maximal runs of alphanumerics, keeping apostrophes
/// that sit between two alphanumerics ("didn't", "we're").
pub fn words(text: &str) -> impl Iterator<Item = &str> {
    WordIter { text, pos: 0 }
}

struct WordIter<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Iterator for WordIter<'a> {
    type Item = &'a str;

    fn next(&mut self) -> Option<&'a str> {
        let rest = &self.text[self.pos..];
        let (offset, _) = rest.char_indices().find(|(_, c)| c.is_alphanumeric())?;
        let start = self.pos + offset;
        let mut end = start;
        let mut chars = self.text[start..].char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            if c.is_alphanumeric() {
                end = start + i + c.len_utf8();
            } else if is_apostrophe(c)
                && chars.peek().is_some_and(|(_, n)| n.is_alphanumeric())
            {
                continue;
            } else {
                break;
            }
        }
        self.pos = end;
        Some(&self.text[start..end])
    }
}

/// Splits text into sentences. A sentence ends at `.`, `!` or `?` followed by
/// whitespace (or the end of text), or at a newline. Returned slices are
/// trimmed, non-empty and borrowed verbatim from the input.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for line in text.lines() {
        let mut start = 0;
        let mut iter = line.char_indices().peekable();
        while let Some((i, c)) = iter.next() {
            if matches!(c, '.' | '!' | '?') {
                let at_boundary = match iter.peek() {
                    None => true,
                    Some((_, n)) => n.is_whitespace(),
                };
                if at_boundary {
                    let end = i + c.len_utf8();
                    push_trimmed(&mut out, &line[start..end]);
                    start = end;
                }
            }
        }
        push_trimmed(&mut out, &line[start..]);
    }
    out
}

fn push_trimmed<'a>(out: &mut Vec<&'a str>, s: &'a str) {
    let t = s.trim();
    if !t.is_empty() {
        out.push(t);
    }
}

/// Separator between the speaker label and the utterance in rendered lines.
pub const SPEAKER_SEPARATOR: &str = ": ";

/// Renders an utterance line as `speaker: content`.
pub fn render_line(speaker: &str, content: &str) -> String {
    let mut s = String::with_capacity(speaker.len() + content.len() + 2);
    s.push_str(speaker);
    s.push_str(SPEAKER_SEPARATOR);
    s.push_str(content);
    s
}

/// Returns the content part of a rendered `speaker: content` line. Lines that
/// do not look like they carry a speaker label are returned unchanged.
pub fn strip_speaker(line: &str) -> &str {
    match line.find(SPEAKER_SEPARATOR) {
        Some(pos)
            if pos > 0
                && pos <= 48
                && !line[..pos].contains(['.', '!', '?', ',', ';']) =>
        {
            &line[pos + SPEAKER_SEPARATOR.len()..]
        }
        _ => line,
    }
}

/// Sentences of a rendered segment with speaker labels removed, in order.
pub fn content_sentences(segment_text: &str) -> Vec<&str> {
    segment_text
        .lines()
        .flat_map(|line| split_sentences(strip_speaker(line)))
        .collect()
}
