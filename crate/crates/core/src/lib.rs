//! Knowledge-aware extraction stage for query-focused meeting summarization.
//!
//! The crate is `no_std` and only needs `alloc`. It covers the pure parts of
//! the pipeline:
//!
//! - [`transcript`]: meetings, queries and token-budgeted segmentation
//! - [`knowledge`]: rule-based triple extraction, query filtering, phrase sets
//! - [`embedding`]: the embedding provider interface and a bag-of-words backend
//! - [`ranking`]: cosine, L2-normalized knowledge scores and top-k selection
//! - [`assembly`]: generator inputs and the extractive fallback generator
//! - [`evaluation`]: ROUGE-1/2/L and entity-overlap F-1
//!
//! File formats, HTTP backends and the command line live in the `kas` crate.

#![no_std]
#![deny(rust_2018_idioms)]

extern crate alloc;

pub mod assembly;
pub mod embedding;
pub mod evaluation;
pub mod knowledge;
pub mod porter;
pub mod ranking;
pub mod text;
pub mod transcript;

pub use assembly::{assemble, generate, ExtractiveGenerator, Generator, GeneratorInput, Summary};
pub use embedding::{BagOfWordsProvider, EmbedError, EmbeddingProvider, EmbeddingVector};
pub use evaluation::{entity_f1, rouge_l, rouge_n, EntityExtractor, EvalReport, RougeScore};
pub use knowledge::{build_phrases, extract_triples, filter_by_query, triple_counts};
pub use knowledge::{KnowledgePhraseSet, KnowledgeTriple};
pub use ranking::{knowledge_scores, rank_and_select, semantic_scores, RankedSelection, SegmentScore};
pub use text::{StopWords, TermNormalizer};
pub use transcript::{count_tokens, segment_transcript, Query, QueryKind, Segment, SegmentId};
pub use transcript::{Tokenizer, TokenizerKind, Transcript, Utterance};
