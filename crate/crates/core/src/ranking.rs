//! Knowledge-aware segment ranking.
//!
//! Each segment gets a semantic score (cosine between query and segment
//! embeddings) and a knowledge score (its count of query-overlapping triples,
//! L2-normalized over the meeting). The ranking score is their sum; the top-k
//! segments are selected and handed on in document order.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::num::NonZeroUsize;

use crate::embedding::{EmbedError, EmbeddingProvider, EmbeddingVector};
use crate::transcript::{Query, Segment, SegmentId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RankError {
    #[error("{segments} segments but {counts} triple counts")]
    LengthMismatch { segments: usize, counts: usize },
    #[error("provider returned {found} vectors for {expected} texts")]
    VectorCount { expected: usize, found: usize },
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SegmentScore {
    pub segment: SegmentId,
    pub score_se: f64,
    pub score_ka: f64,
    pub score_rank: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedSelection {
    pub meeting_id: String,
    pub query_id: String,
    pub k: usize,
    /// Selected ordinals in document order.
    pub selected: Vec<usize>,
    /// Every segment's scores, best first.
    pub scores: Vec<SegmentScore>,
}

impl RankedSelection {
    /// Ordinals of all segments, best first.
    pub fn rank_order(&self) -> Vec<usize> {
        self.scores.iter().map(|s| s.segment.ordinal).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankConfig {
    /// Weight on the knowledge score; 1.0 is the plain sum.
    pub ka_weight: f64,
}

impl Default for RankConfig {
    fn default() -> Self {
        Self { ka_weight: 1.0 }
    }
}

/// Semantic scores plus the positions where a zero-norm vector forced 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticScores {
    pub scores: Vec<f64>,
    pub zero_norm: Vec<usize>,
}

/// Cosine similarity; `None` when either vector has zero norm.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Option<f64> {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some(a.dot(b) / (na * nb))
}

pub fn semantic_scores(
    query: &Query,
    segments: &[Segment],
    provider: &dyn EmbeddingProvider,
) -> Result<SemanticScores, RankError> {
    let mut texts: Vec<&str> = Vec::with_capacity(segments.len() + 1);
    texts.push(query.text());
    texts.extend(segments.iter().map(|s| s.text.as_str()));
    let vectors = provider.embed(&texts)?;
    if vectors.len() != texts.len() {
        return Err(RankError::VectorCount { expected: texts.len(), found: vectors.len() });
    }
    let expected = vectors[0].dim();
    if let Some(v) = vectors.iter().find(|v| v.dim() != expected) {
        return Err(EmbedError::DimMismatch { expected, found: v.dim() }.into());
    }
    let (q, rest) = vectors.split_first().expect("query vector present");
    let mut out = SemanticScores { scores: Vec::with_capacity(rest.len()), zero_norm: Vec::new() };
    for (i, v) in rest.iter().enumerate() {
        match cosine(q, v) {
            Some(c) => out.scores.push(c),
            None => {
                out.scores.push(0.0);
                out.zero_norm.push(i);
            }
        }
    }
    Ok(out)
}

/// L2-normalized triple counts; all zeros when every count is zero.
pub fn knowledge_scores(counts: &[usize]) -> Vec<f64> {
    let sum_sq = counts.iter().fold(0.0, |acc, &m| acc + (m as f64) * (m as f64));
    if sum_sq == 0.0 {
        return alloc::vec![0.0; counts.len()];
    }
    let norm = libm::sqrt(sum_sq);
    counts.iter().map(|&m| m as f64 / norm).collect()
}

/// Higher rank score first, then lower ordinal.
fn rank_order(a: &SegmentScore, b: &SegmentScore) -> Ordering {
    b.score_rank
        .total_cmp(&a.score_rank)
        .then_with(|| a.segment.ordinal.cmp(&b.segment.ordinal))
}

/// Combines precomputed semantic scores with triple counts and selects the
/// top `k` segments.
pub fn select(
    meeting_id: &str,
    query_id: &str,
    segments: &[SegmentId],
    score_se: &[f64],
    counts: &[usize],
    k: NonZeroUsize,
    config: RankConfig,
) -> Result<RankedSelection, RankError> {
    if counts.len() != segments.len() || score_se.len() != segments.len() {
        return Err(RankError::LengthMismatch { segments: segments.len(), counts: counts.len() });
    }
    let ka = knowledge_scores(counts);
    let mut scores: Vec<SegmentScore> = segments
        .iter()
        .zip(score_se)
        .zip(&ka)
        .map(|((id, &se), &ka)| SegmentScore {
            segment: id.clone(),
            score_se: se,
            score_ka: ka,
            score_rank: se + config.ka_weight * ka,
        })
        .collect();
    scores.sort_by(rank_order);
    let take = k.get().min(scores.len());
    let mut selected: Vec<usize> = scores[..take].iter().map(|s| s.segment.ordinal).collect();
    selected.sort_unstable();
    Ok(RankedSelection {
        meeting_id: String::from(meeting_id),
        query_id: String::from(query_id),
        k: k.get(),
        selected,
        scores,
    })
}

/// Scores every segment of one meeting for a query and selects the top `k`.
/// Returns the selection and the positions of zero-norm embeddings.
pub fn rank_and_select(
    query: &Query,
    segments: &[Segment],
    provider: &dyn EmbeddingProvider,
    counts: &[usize],
    k: NonZeroUsize,
    config: RankConfig,
) -> Result<(RankedSelection, Vec<usize>), RankError> {
    if counts.len() != segments.len() {
        return Err(RankError::LengthMismatch { segments: segments.len(), counts: counts.len() });
    }
    let se = semantic_scores(query, segments, provider)?;
    let ids: Vec<SegmentId> = segments.iter().map(|s| s.id.clone()).collect();
    let selection = select(query.meeting_id(), query.query_id(), &ids, &se.scores, counts, k, config)?;
    Ok((selection, se.zero_norm))
}
