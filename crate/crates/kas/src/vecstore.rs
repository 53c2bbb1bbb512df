//! `kas-vec` vector store files and the file-backed embedding provider.
//!
//! ```text
//! {"format":"kas-vec","version":1,"dim":768}
//! {"h":"<16 hex digits>","p":"<first 32 chars>","v":[...]}
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use kas_core::embedding::{text_hash, text_prefix, EmbedError, EmbeddingProvider, EmbeddingVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::files::write_atomic;

pub const FORMAT: &str = "kas-vec";
pub const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoreHeader {
    format: String,
    version: u32,
    dim: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoreEntry {
    h: String,
    p: String,
    v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredVector {
    pub prefix: String,
    pub vector: EmbeddingVector,
}

/// In-memory contents of a vector store, keyed by text hash.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorStore {
    dim: usize,
    entries: BTreeMap<u64, StoredVector>,
}

impl VectorStore {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "embedding dim must be positive");
        Self { dim, entries: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, text: &str, vector: EmbeddingVector) -> Result<(), EmbedError> {
        if vector.dim() != self.dim {
            return Err(EmbedError::DimMismatch { expected: self.dim, found: vector.dim() });
        }
        let hash = text_hash(text);
        let prefix = text_prefix(text);
        if let Some(existing) = self.entries.get(&hash) {
            if existing.prefix != prefix {
                return Err(EmbedError::Collision { hash });
            }
        }
        self.entries.insert(hash, StoredVector { prefix, vector });
        Ok(())
    }

    /// Looks up `text`, checking the stored prefix against it.
    pub fn get(&self, text: &str) -> Result<Option<&EmbeddingVector>, EmbedError> {
        let hash = text_hash(text);
        match self.entries.get(&hash) {
            None => Ok(None),
            Some(e) if e.prefix == text_prefix(text) => Ok(Some(&e.vector)),
            Some(_) => Err(EmbedError::Collision { hash }),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &StoredVector)> {
        self.entries.iter().map(|(h, e)| (*h, e))
    }

    pub fn parse(text: &str) -> Result<Self, EmbedError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or_else(|| EmbedError::Format("empty vector store".into()))?;
        let header: StoreHeader =
            serde_json::from_str(first).map_err(|e| EmbedError::Format(format!("line 1: {e}")))?;
        if header.format != FORMAT || header.version != VERSION {
            return Err(EmbedError::Format(format!(
                "line 1: expected {FORMAT} version {VERSION}, found {} version {}",
                header.format, header.version
            )));
        }
        if header.dim == 0 {
            return Err(EmbedError::Format("line 1: dim must be positive".into()));
        }
        let mut store = Self::new(header.dim);
        for (i, line) in lines {
            let at = |msg: String| EmbedError::Format(format!("line {}: {msg}", i + 1));
            let entry: StoreEntry = serde_json::from_str(line).map_err(|e| at(e.to_string()))?;
            if entry.h.len() != 16 {
                return Err(at(format!("hash {:?} is not 16 hex digits", entry.h)));
            }
            let hash = u64::from_str_radix(&entry.h, 16).map_err(|_| at(format!("bad hash {:?}", entry.h)))?;
            if entry.v.len() != header.dim {
                return Err(at(format!("vector has {} values, header declares dim {}", entry.v.len(), header.dim)));
            }
            let vector = EmbeddingVector::new(entry.v).map_err(|e| at(e.to_string()))?;
            if store.entries.insert(hash, StoredVector { prefix: entry.p, vector }).is_some() {
                return Err(at(format!("duplicate hash {}", entry.h)));
            }
        }
        Ok(store)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::validation(format!("{}: {e}", path.display())))
    }

    pub fn write_to(&self, w: &mut dyn Write) -> std::io::Result<()> {
        let header = StoreHeader { format: FORMAT.into(), version: VERSION, dim: self.dim };
        writeln!(w, "{}", serde_json::to_string(&header)?)?;
        for (hash, e) in &self.entries {
            let entry = StoreEntry { h: format!("{hash:016x}"), p: e.prefix.clone(), v: e.vector.values().to_vec() };
            writeln!(w, "{}", serde_json::to_string(&entry)?)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, |w| self.write_to(w))
    }
}

/// Serves vectors from a [`VectorStore`]. Misses are errors unless a
/// fallback provider of the same dimension is attached.
pub struct FileStoreProvider {
    store: VectorStore,
    fallback: Option<Box<dyn EmbeddingProvider>>,
}

impl FileStoreProvider {
    pub fn strict(store: VectorStore) -> Self {
        Self { store, fallback: None }
    }

    pub fn with_fallback(store: VectorStore, fallback: Box<dyn EmbeddingProvider>) -> Result<Self, EmbedError> {
        if fallback.dim() != store.dim() {
            return Err(EmbedError::DimMismatch { expected: store.dim(), found: fallback.dim() });
        }
        Ok(Self { store, fallback: Some(fallback) })
    }

    pub fn open(path: &Path) -> Result<Self> {
        Ok(Self::strict(VectorStore::load(path)?))
    }
}

impl EmbeddingProvider for FileStoreProvider {
    fn dim(&self) -> usize {
        self.store.dim()
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let mut out: Vec<Option<EmbeddingVector>> = Vec::with_capacity(texts.len());
        let mut misses = Vec::new();
        for (i, text) in texts.iter().enumerate() {
            match self.store.get(text)? {
                Some(v) => out.push(Some(v.clone())),
                None if self.fallback.is_some() => {
                    out.push(None);
                    misses.push(i);
                }
                None => return Err(EmbedError::Missing { hash: text_hash(text) }),
            }
        }
        if let Some(fallback) = &self.fallback {
            if !misses.is_empty() {
                let miss_texts: Vec<&str> = misses.iter().map(|&i| texts[i]).collect();
                let vectors = fallback.embed(&miss_texts)?;
                if vectors.len() != misses.len() {
                    return Err(EmbedError::Protocol(format!(
                        "fallback returned {} vectors for {} texts",
                        vectors.len(),
                        misses.len()
                    )));
                }
                for (i, v) in misses.into_iter().zip(vectors) {
                    out[i] = Some(v);
                }
            }
        }
        Ok(out.into_iter().map(|v| v.expect("every slot filled")).collect())
    }
}
