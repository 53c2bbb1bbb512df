//! Pipeline configuration: TOML file, then `KAS_*` environment variables, then
//! command-line flags, each overriding the previous layer.

use std::fs;
use std::path::{Path, PathBuf};

use kas_core::embedding::{fnv1a64, DEFAULT_DIM};
use kas_core::text::StopWords;
use kas_core::transcript::TokenizerKind;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ProviderKind {
    /// Hashed bag-of-words vectors (no model needed)
    #[default]
    Bow,
    /// Precomputed vectors from a `kas-vec` store file
    Store,
    /// Remote embedding service (`POST /embed`)
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    /// Built-in extractive fallback
    #[default]
    Extractive,
    /// Remote generator (`POST /generate`)
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EntitySource {
    /// Text of the segments selected for the query
    #[default]
    Selected,
    /// The whole meeting transcript
    Transcript,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub dim: usize,
    pub store: Option<PathBuf>,
    /// Store misses are errors when true, otherwise they fall back to bag-of-words.
    pub strict: bool,
    pub endpoint: Option<String>,
    pub batch_size: usize,
    pub retries: u32,
    pub backoff_ms: u64,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            kind: ProviderKind::Bow,
            dim: DEFAULT_DIM,
            store: None,
            strict: true,
            endpoint: None,
            batch_size: 32,
            retries: 3,
            backoff_ms: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    pub sentences: usize,
    pub endpoint: Option<String>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self { kind: GeneratorKind::Extractive, sentences: 3, endpoint: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Segment budget in tokens.
    pub max_segment_tokens: usize,
    /// Segments selected per query.
    pub top_k: usize,
    pub tokenizer: TokenizerKind,
    /// Porter-stem both sides of the triple/query overlap test.
    pub stem_query_overlap: bool,
    /// Porter-stem ROUGE tokens.
    pub stem_rouge: bool,
    /// One stop word per line; replaces the embedded list.
    pub stop_words: Option<PathBuf>,
    pub ka_weight: f64,
    pub entity_source: EntitySource,
    pub output_dir: PathBuf,
    pub provider: ProviderConfig,
    pub generator: GeneratorConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            max_segment_tokens: 512,
            top_k: 12,
            tokenizer: TokenizerKind::Whitespace,
            stem_query_overlap: false,
            stem_rouge: true,
            stop_words: None,
            ka_weight: 1.0,
            entity_source: EntitySource::Selected,
            output_dir: PathBuf::from("kas-out"),
            provider: ProviderConfig::default(),
            generator: GeneratorConfig::default(),
        }
    }
}

fn parse_env<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::validation(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::validation(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

fn parse_enum<T: clap::ValueEnum>(key: &str, value: &str) -> Result<T> {
    T::from_str(value.trim(), true).map_err(|_| Error::validation(format!("{key}: unknown value {value:?}")))
}

fn parse_tokenizer(key: &str, value: &str) -> Result<TokenizerKind> {
    match value.trim() {
        "whitespace" => Ok(TokenizerKind::Whitespace),
        "word-punct" => Ok(TokenizerKind::WordPunct),
        other => Err(Error::validation(format!("{key}: unknown tokenizer {other:?}"))),
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::validation(format!("{}: {e}", path.display())))
    }

    /// Applies `KAS_*` overrides from `lookup` (normally `std::env::var`).
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<()> {
        macro_rules! env {
            ($key:literal, |$v:ident| $apply:expr) => {
                if let Some($v) = lookup($key) {
                    #[allow(clippy::redundant_closure_call)]
                    (|| -> Result<()> {
                        let $v = $v.as_str();
                        $apply;
                        Ok(())
                    })()?;
                }
            };
        }
        env!("KAS_MAX_SEGMENT_TOKENS", |v| self.max_segment_tokens = parse_env("KAS_MAX_SEGMENT_TOKENS", v)?);
        env!("KAS_TOP_K", |v| self.top_k = parse_env("KAS_TOP_K", v)?);
        env!("KAS_TOKENIZER", |v| self.tokenizer = parse_tokenizer("KAS_TOKENIZER", v)?);
        env!("KAS_STEM_QUERY_OVERLAP", |v| self.stem_query_overlap = parse_bool("KAS_STEM_QUERY_OVERLAP", v)?);
        env!("KAS_STEM_ROUGE", |v| self.stem_rouge = parse_bool("KAS_STEM_ROUGE", v)?);
        env!("KAS_STOP_WORDS", |v| self.stop_words = Some(PathBuf::from(v)));
        env!("KAS_KA_WEIGHT", |v| self.ka_weight = parse_env("KAS_KA_WEIGHT", v)?);
        env!("KAS_ENTITY_SOURCE", |v| self.entity_source = parse_enum("KAS_ENTITY_SOURCE", v)?);
        env!("KAS_OUTPUT_DIR", |v| self.output_dir = PathBuf::from(v));
        env!("KAS_PROVIDER", |v| self.provider.kind = parse_enum("KAS_PROVIDER", v)?);
        env!("KAS_PROVIDER_DIM", |v| self.provider.dim = parse_env("KAS_PROVIDER_DIM", v)?);
        env!("KAS_PROVIDER_STORE", |v| self.provider.store = Some(PathBuf::from(v)));
        env!("KAS_PROVIDER_STRICT", |v| self.provider.strict = parse_bool("KAS_PROVIDER_STRICT", v)?);
        env!("KAS_PROVIDER_ENDPOINT", |v| self.provider.endpoint = Some(v.to_string()));
        env!("KAS_PROVIDER_BATCH_SIZE", |v| self.provider.batch_size = parse_env("KAS_PROVIDER_BATCH_SIZE", v)?);
        env!("KAS_GENERATOR", |v| self.generator.kind = parse_enum("KAS_GENERATOR", v)?);
        env!("KAS_GENERATOR_SENTENCES", |v| self.generator.sentences = parse_env("KAS_GENERATOR_SENTENCES", v)?);
        env!("KAS_GENERATOR_ENDPOINT", |v| self.generator.endpoint = Some(v.to_string()));
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_segment_tokens == 0 {
            return Err(Error::validation("max_segment_tokens must be at least 1"));
        }
        if self.top_k == 0 {
            return Err(Error::validation("top_k must be at least 1"));
        }
        if !self.ka_weight.is_finite() {
            return Err(Error::validation("ka_weight must be finite"));
        }
        if self.provider.dim == 0 {
            return Err(Error::validation("provider.dim must be at least 1"));
        }
        if self.provider.batch_size == 0 {
            return Err(Error::validation("provider.batch_size must be at least 1"));
        }
        if self.generator.sentences == 0 {
            return Err(Error::validation("generator.sentences must be at least 1"));
        }
        Ok(())
    }

    pub fn stop_word_set(&self) -> Result<StopWords> {
        match &self.stop_words {
            None => Ok(StopWords::english()),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                Ok(StopWords::from_words(text.lines()))
            }
        }
    }

    pub fn fingerprints(&self) -> Result<Fingerprints> {
        let stop = self.stop_word_set()?;
        let stop_hash = fnv1a64(stop.iter().collect::<Vec<_>>().join("\n").as_bytes());
        let segment = digest(&["segment-v1", &self.max_segment_tokens.to_string(), self.tokenizer.name()]);
        let knowledge = digest(&[
            "knowledge-v1",
            &segment,
            &self.stem_query_overlap.to_string(),
            &format!("{stop_hash:016x}"),
        ]);
        let provider = match self.provider.kind {
            ProviderKind::Bow => format!("bow:{}", self.provider.dim),
            ProviderKind::Store => format!(
                "store:{}:{}:{}",
                self.provider.dim,
                self.provider.store.as_deref().map(|p| p.display().to_string()).unwrap_or_default(),
                self.provider.strict
            ),
            ProviderKind::Http => {
                format!("http:{}:{}", self.provider.dim, self.provider.endpoint.as_deref().unwrap_or_default())
            }
        };
        let rank = digest(&[
            "rank-v1",
            &knowledge,
            &self.top_k.to_string(),
            &format!("{:016x}", self.ka_weight.to_bits()),
            &provider,
        ]);
        let assemble = digest(&["assemble-v1", &rank]);
        let generator = match self.generator.kind {
            GeneratorKind::Extractive => format!("extractive:{}", self.generator.sentences),
            GeneratorKind::Http => format!("http:{}", self.generator.endpoint.as_deref().unwrap_or_default()),
        };
        let generate = digest(&["generate-v1", &assemble, &generator]);
        let evaluate = digest(&[
            "evaluate-v1",
            &generate,
            &self.stem_rouge.to_string(),
            match self.entity_source {
                EntitySource::Selected => "selected",
                EntitySource::Transcript => "transcript",
            },
        ]);
        Ok(Fingerprints { segment, knowledge, rank, assemble, generate, evaluate })
    }
}

fn digest(parts: &[&str]) -> String {
    format!("{:016x}", fnv1a64(parts.join("\u{1f}").as_bytes()))
}

/// Per-stage configuration fingerprints. Each covers the settings that
/// influence that stage's output, including everything upstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprints {
    pub segment: String,
    pub knowledge: String,
    pub rank: String,
    pub assemble: String,
    pub generate: String,
    pub evaluate: String,
}
