//! ROUGE-1/2/L and entity-overlap F-1.
//!
//! Metric tokens are lowercase alphanumeric runs, optionally Porter-stemmed.
//! ROUGE-L is the summary-level LCS over the full token sequences.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::assembly::Summary;
use crate::porter;
use crate::text::{content_sentences, words, StopWords};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("a report needs at least one sample")]
    NoSamples,
    #[error("samples missing from summaries, references or sources: {0:?}")]
    MissingKeys(Vec<SampleKey>),
}

/// `(meeting_id, query_id)`
pub type SampleKey = (String, String);

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    pub fn from_counts(hits: usize, candidate_total: usize, reference_total: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        Self::from_pr(ratio(hits, candidate_total), ratio(hits, reference_total))
    }

    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self { precision, recall, f1 }
    }
}

/// Lowercase alphanumeric runs, stemmed when asked.
pub fn metric_tokens(text: &str, stem: bool) -> Vec<String> {
    let lower = text.to_lowercase();
    lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| if stem { porter::stem(t) } else { t.to_string() })
        .collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<&[String], usize> {
    let mut counts = BTreeMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Clipped n-gram overlap between candidate and reference.
pub fn rouge_n_tokens(candidate: &[String], reference: &[String], n: usize) -> RougeScore {
    let cand = ngram_counts(candidate, n);
    let refs = ngram_counts(reference, n);
    let hits = cand
        .iter()
        .map(|(g, c)| refs.get(g).map_or(0, |r| (*c).min(*r)))
        .sum();
    RougeScore::from_counts(hits, cand.values().sum(), refs.values().sum())
}

pub fn rouge_n(candidate: &str, reference: &str, n: usize, stem: bool) -> RougeScore {
    rouge_n_tokens(&metric_tokens(candidate, stem), &metric_tokens(reference, stem), n)
}

/// Length of the longest common subsequence.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l_tokens(candidate: &[String], reference: &[String]) -> RougeScore {
    RougeScore::from_counts(lcs_len(candidate, reference), candidate.len(), reference.len())
}

pub fn rouge_l(candidate: &str, reference: &str, stem: bool) -> RougeScore {
    rouge_l_tokens(&metric_tokens(candidate, stem), &metric_tokens(reference, stem))
}

const ENTITY_NOISE: &[&str] = &["hmm", "mm", "oh", "ok", "okay", "right", "so", "uh", "um", "well", "yeah", "yes"];

/// Heuristic entity spotter: maximal runs of capitalized words.
///
/// A capitalized word opening a sentence only counts if the same word also
/// appears capitalized mid-sentence somewhere in the text. Speaker labels,
/// stop words and discourse fillers are never entities.
#[derive(Debug, Clone, Default)]
pub struct EntityExtractor {
    ignore: BTreeSet<String>,
    stop_words: StopWords,
}

impl EntityExtractor {
    /// Extractor that never reports the given speaker labels.
    pub fn with_speakers<I, S>(speakers: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let ignore = speakers
            .into_iter()
            .map(|s| words(s.as_ref()).map(str::to_lowercase).collect::<Vec<_>>().join(" "))
            .filter(|s| !s.is_empty())
            .collect();
        Self { ignore, ..Self::default() }
    }

    fn is_capitalized(&self, word: &str) -> bool {
        word.chars().next().is_some_and(char::is_uppercase)
            && !self.stop_words.contains(&word.to_lowercase())
            && !ENTITY_NOISE.contains(&word.to_lowercase().as_str())
    }

    pub fn extract(&self, text: &str) -> BTreeSet<String> {
        let sentences: Vec<Vec<&str>> = content_sentences(text).into_iter().map(|s| words(s).collect()).collect();
        let mid_capitalized: BTreeSet<String> = sentences
            .iter()
            .flat_map(|s| s.iter().skip(1))
            .filter(|w| self.is_capitalized(w))
            .map(|w| w.to_lowercase())
            .collect();
        let mut out = BTreeSet::new();
        for sentence in &sentences {
            let mut span: Vec<String> = Vec::new();
            for (i, w) in sentence.iter().enumerate() {
                let counts = self.is_capitalized(w) && (i > 0 || mid_capitalized.contains(&w.to_lowercase()));
                if counts {
                    span.push(w.to_lowercase());
                } else {
                    self.flush(&mut span, &mut out);
                }
            }
            self.flush(&mut span, &mut out);
        }
        out
    }

    fn flush(&self, span: &mut Vec<String>, out: &mut BTreeSet<String>) {
        if span.is_empty() {
            return;
        }
        let entity = span.join(" ");
        span.clear();
        if !self.ignore.contains(&entity) {
            out.insert(entity);
        }
    }
}

/// F-1 of two entity sets. Both empty scores 1, exactly one empty scores 0.
pub fn entity_f1_sets(summary: &BTreeSet<String>, source: &BTreeSet<String>) -> f64 {
    match (summary.is_empty(), source.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let common = summary.intersection(source).count();
    RougeScore::from_counts(common, summary.len(), source.len()).f1
}

pub fn entity_f1(summary: &str, source: &str, extractor: &EntityExtractor) -> f64 {
    entity_f1_sets(&extractor.extract(summary), &extractor.extract(source))
}

/// Text the summary is checked against, with its speaker labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Source {
    pub text: String,
    pub speakers: Vec<String>,
}

/// Externally computed entity sets for one sample.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EntitySets {
    pub summary: BTreeSet<String>,
    pub source: BTreeSet<String>,
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub stem: bool,
    pub imported_entities: BTreeMap<SampleKey, EntitySets>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleScores {
    pub meeting: String,
    pub query: String,
    pub r1: RougeScore,
    pub r2: RougeScore,
    pub rl: RougeScore,
    pub entity_f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorpusScores {
    pub r1: RougeScore,
    pub r2: RougeScore,
    pub rl: RougeScore,
    pub entity_f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub samples: Vec<SampleScores>,
    pub corpus: CorpusScores,
    pub count: usize,
}

impl EvalReport {
    /// Corpus values are arithmetic means over samples, in the given order.
    pub fn from_samples(samples: Vec<SampleScores>) -> Result<Self, EvalError> {
        if samples.is_empty() {
            return Err(EvalError::NoSamples);
        }
        let n = samples.len() as f64;
        let mean_rouge = |f: fn(&SampleScores) -> RougeScore| {
            let (p, r, f1) = samples.iter().map(f).fold((0.0, 0.0, 0.0), |acc, s| {
                (acc.0 + s.precision, acc.1 + s.recall, acc.2 + s.f1)
            });
            RougeScore { precision: p / n, recall: r / n, f1: f1 / n }
        };
        let corpus = CorpusScores {
            r1: mean_rouge(|s| s.r1),
            r2: mean_rouge(|s| s.r2),
            rl: mean_rouge(|s| s.rl),
            entity_f1: samples.iter().fold(0.0, |acc, s| acc + s.entity_f1) / n,
        };
        Ok(Self { count: samples.len(), samples, corpus })
    }
}

/// Scores every summary against its reference and source.
pub fn evaluate_run(
    summaries: &[Summary],
    references: &BTreeMap<SampleKey, String>,
    sources: &BTreeMap<SampleKey, Source>,
    options: &EvalOptions,
) -> Result<EvalReport, EvalError> {
    let by_key: BTreeMap<SampleKey, &Summary> = summaries
        .iter()
        .map(|s| ((s.meeting_id.clone(), s.query_id.clone()), s))
        .collect();
    let all_keys: BTreeSet<&SampleKey> = by_key.keys().chain(references.keys()).collect();
    let missing: Vec<SampleKey> = all_keys
        .iter()
        .filter(|k| !(by_key.contains_key(*k) && references.contains_key(*k) && sources.contains_key(*k)))
        .map(|k| (*k).clone())
        .collect();
    if !missing.is_empty() {
        return Err(EvalError::MissingKeys(missing));
    }
    let samples = by_key
        .iter()
        .map(|(key, summary)| {
            let reference = &references[key];
            let source = &sources[key];
            let cand = metric_tokens(&summary.text, options.stem);
            let refs = metric_tokens(reference, options.stem);
            let entity_f1 = match options.imported_entities.get(key) {
                Some(sets) => entity_f1_sets(&sets.summary, &sets.source),
                None => entity_f1(&summary.text, &source.text, &EntityExtractor::with_speakers(&source.speakers)),
            };
            SampleScores {
                meeting: key.0.clone(),
                query: key.1.clone(),
                r1: rouge_n_tokens(&cand, &refs, 1),
                r2: rouge_n_tokens(&cand, &refs, 2),
                rl: rouge_l_tokens(&cand, &refs),
                entity_f1,
            }
        })
        .collect();
    EvalReport::from_samples(samples)
}
