//! Embedding provider interface and the built-in bag-of-words backend.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::text::{StopWords, TermNormalizer};

/// Default embedding width, matching common sentence-embedding models.
pub const DEFAULT_DIM: usize = 768;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmbedError {
    #[error("no stored vector for text hash {hash:016x}")]
    Missing { hash: u64 },
    #[error("text hash {hash:016x} collides with a different stored text")]
    Collision { hash: u64 },
    #[error("expected {expected}-dimensional vectors, got {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("non-finite value at position {0}")]
    NonFinite(usize),
    #[error("embedding format error: {0}")]
    Format(String),
    #[error("embedding transport error: {0}")]
    Transport(String),
    #[error("embedding protocol error: {0}")]
    Protocol(String),
}

/// A dense vector of finite reals.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self, EmbedError> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(EmbedError::NonFinite(i));
        }
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    /// Sum of squares in index order.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).fold(0.0, |acc, (a, b)| acc + a * b)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|v| v * factor).collect())
    }
}

/// Maps texts to fixed-width vectors. Output is parallel to input and
/// deterministic for a given provider instance.
pub trait EmbeddingProvider: Send + Sync {
    fn dim(&self) -> usize;

    fn embed(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError>;
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        (**self).embed(texts)
    }
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for alloc::boxed::Box<P> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        (**self).embed(texts)
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    fnv1a64_seeded(bytes, 0)
}

fn fnv1a64_seeded(bytes: &[u8], seed: u64) -> u64 {
    bytes.iter().fold(FNV_OFFSET ^ seed, |h, b| (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME))
}

/// Key used by vector stores: FNV-1a over the UTF-8 bytes with trailing
/// whitespace removed.
pub fn text_hash(text: &str) -> u64 {
    fnv1a64(text.trim_end().as_bytes())
}

/// Prefix stored next to each hash to detect collisions: the first 32 chars
/// of the trailing-trimmed text.
pub fn text_prefix(text: &str) -> String {
    text.trim_end().chars().take(32).collect()
}

/// Seed mixed into bucket hashes of the bag-of-words provider.
pub const BOW_SEED: u64 = 0x6b61_735f_626f_7721;

/// Term-frequency vectors of lowercase content words hashed into `dim`
/// buckets. Not a semantic model; it exists so the ranking path can run and be
/// tested without a neural encoder.
#[derive(Debug, Clone)]
pub struct BagOfWordsProvider {
    dim: usize,
    stop_words: StopWords,
}

impl BagOfWordsProvider {
    /// # Panics
    /// If `dim` is zero.
    pub fn new(dim: usize) -> Self {
        Self::with_stop_words(dim, StopWords::english())
    }

    pub fn with_stop_words(dim: usize, stop_words: StopWords) -> Self {
        assert!(dim >= 1, "embedding dim must be positive");
        Self { dim, stop_words }
    }

    pub fn bucket(&self, term: &str) -> usize {
        (fnv1a64_seeded(term.as_bytes(), BOW_SEED) % self.dim as u64) as usize
    }

    pub fn embed_one(&self, text: &str) -> EmbeddingVector {
        let normalizer = TermNormalizer::new(&self.stop_words, false);
        let mut v = vec![0.0; self.dim];
        for term in normalizer.terms(text) {
            v[self.bucket(&term)] += 1.0;
        }
        EmbeddingVector(v)
    }
}

impl EmbeddingProvider for BagOfWordsProvider {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}
