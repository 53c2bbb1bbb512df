//! Generator inputs (`query ⊕ knowledge ⊕ segment` per selected segment) and
//! the generator interface with an extractive fallback.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::knowledge::KnowledgePhraseSet;
use crate::ranking::RankedSelection;
use crate::text::{content_sentences, StopWords, TermNormalizer};
use crate::transcript::{Query, Segment, SegmentId};

pub const QUERY_MARKER: &str = "query:";
pub const KNOWLEDGE_MARKER: &str = "knowledge:";
pub const SEGMENT_MARKER: &str = "segment:";
pub const BLOCK_SEPARATOR: &str = " || ";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AssemblyError {
    #[error("no phrase set for selected segment {0}")]
    MissingPhrases(SegmentId),
    #[error("selected segment {0} not found")]
    MissingSegment(SegmentId),
    #[error("generator input has no parts")]
    NoParts,
    #[error("sentence budget must be at least 1")]
    ZeroBudget,
    #[error("generator {0} returned an empty summary")]
    EmptySummary(String),
    #[error("generator {name} failed: {message}")]
    Generator { name: String, message: String },
}

/// The literal marker strings used to render parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Separators {
    pub query: &'static str,
    pub knowledge: &'static str,
    pub segment: &'static str,
    pub block: &'static str,
}

pub const SEPARATORS: Separators = Separators {
    query: QUERY_MARKER,
    knowledge: KNOWLEDGE_MARKER,
    segment: SEGMENT_MARKER,
    block: BLOCK_SEPARATOR,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputPart {
    pub segment: SegmentId,
    pub knowledge: Vec<String>,
    pub segment_text: String,
    pub rendered: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorInput {
    pub query_id: String,
    pub meeting_id: String,
    pub query_text: String,
    pub parts: Vec<InputPart>,
    pub separators: Separators,
}

impl GeneratorInput {
    pub fn rendered_parts(&self) -> impl Iterator<Item = &str> {
        self.parts.iter().map(|p| p.rendered.as_str())
    }
}

/// `query: Q || knowledge: K || segment: S`. An empty knowledge block keeps
/// its marker.
pub fn render_part(query: &str, knowledge: &[String], segment: &str) -> String {
    let mut s = String::new();
    let mut block = |marker: &str, content: &str, last: bool| {
        s.push_str(marker);
        if !content.is_empty() {
            s.push(' ');
            s.push_str(content);
        }
        if !last {
            s.push_str(BLOCK_SEPARATOR);
        }
    };
    block(QUERY_MARKER, query, false);
    block(KNOWLEDGE_MARKER, &knowledge.join(" "), false);
    block(SEGMENT_MARKER, segment, true);
    s
}

/// One part per selected segment, in document order.
pub fn assemble(
    query: &Query,
    selection: &RankedSelection,
    phrases: &[KnowledgePhraseSet],
    segments: &[Segment],
) -> Result<GeneratorInput, AssemblyError> {
    let by_id: BTreeMap<&SegmentId, &KnowledgePhraseSet> =
        phrases.iter().map(|p| (&p.segment, p)).collect();
    let seg_by_ordinal: BTreeMap<usize, &Segment> = segments
        .iter()
        .filter(|s| s.meeting_id() == selection.meeting_id)
        .map(|s| (s.ordinal(), s))
        .collect();
    let mut ordinals = selection.selected.clone();
    ordinals.sort_unstable();
    let mut parts = Vec::with_capacity(ordinals.len());
    for ordinal in ordinals {
        let id = SegmentId::new(selection.meeting_id.clone(), ordinal);
        let seg = seg_by_ordinal.get(&ordinal).ok_or_else(|| AssemblyError::MissingSegment(id.clone()))?;
        let set = by_id.get(&id).ok_or_else(|| AssemblyError::MissingPhrases(id.clone()))?;
        parts.push(InputPart {
            rendered: render_part(query.text(), &set.phrases, &seg.text),
            knowledge: set.phrases.clone(),
            segment_text: seg.text.clone(),
            segment: id,
        });
    }
    Ok(GeneratorInput {
        query_id: String::from(query.query_id()),
        meeting_id: String::from(query.meeting_id()),
        query_text: String::from(query.text()),
        parts,
        separators: SEPARATORS,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    pub query_id: String,
    pub meeting_id: String,
    pub text: String,
    pub generator: String,
}

/// Turns a generator input into summary text.
pub trait Generator {
    fn name(&self) -> &str;

    fn generate(&self, input: &GeneratorInput) -> Result<String, AssemblyError>;
}

pub fn generate(input: &GeneratorInput, generator: &dyn Generator) -> Result<Summary, AssemblyError> {
    if input.parts.is_empty() {
        return Err(AssemblyError::NoParts);
    }
    let text = generator.generate(input)?;
    let text = text.trim();
    if text.is_empty() {
        return Err(AssemblyError::EmptySummary(String::from(generator.name())));
    }
    Ok(Summary {
        query_id: input.query_id.clone(),
        meeting_id: input.meeting_id.clone(),
        text: String::from(text),
        generator: String::from(generator.name()),
    })
}

/// Picks the sentences of the selected segments that share the most content
/// words with the query and returns them verbatim, in document order.
#[derive(Debug, Clone)]
pub struct ExtractiveGenerator {
    pub sentence_budget: usize,
    pub stop_words: StopWords,
    pub stem: bool,
}

impl ExtractiveGenerator {
    pub fn new(sentence_budget: usize) -> Self {
        Self { sentence_budget, stop_words: StopWords::english(), stem: false }
    }
}

impl Generator for ExtractiveGenerator {
    fn name(&self) -> &str {
        "extractive"
    }

    fn generate(&self, input: &GeneratorInput) -> Result<String, AssemblyError> {
        if self.sentence_budget == 0 {
            return Err(AssemblyError::ZeroBudget);
        }
        let normalizer = TermNormalizer::new(&self.stop_words, self.stem);
        let query_terms = normalizer.term_set(&input.query_text);
        // (overlap, position, sentence)
        let mut candidates: Vec<(usize, usize, &str)> = Vec::new();
        for part in &input.parts {
            for sentence in content_sentences(&part.segment_text) {
                let terms: BTreeSet<String> = normalizer.term_set(sentence);
                let overlap = terms.intersection(&query_terms).count();
                candidates.push((overlap, candidates.len(), sentence));
            }
        }
        if candidates.is_empty() {
            return Err(AssemblyError::EmptySummary(String::from(self.name())));
        }
        let mut ranked: Vec<&(usize, usize, &str)> = candidates.iter().filter(|c| c.0 > 0).collect();
        ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        ranked.truncate(self.sentence_budget);
        if ranked.is_empty() {
            ranked.push(&candidates[0]);
        }
        ranked.sort_by_key(|c| c.1);
        Ok(ranked.iter().map(|c| c.2).collect::<Vec<_>>().join(" "))
    }
}
