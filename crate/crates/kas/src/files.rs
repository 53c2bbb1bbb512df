//! Interchange files.
//!
//! Every file written by the pipeline is JSON Lines whose first line is a
//! header `{"format":"kas-<kind>","version":1,"fingerprint":"<hex>"}`; the
//! report is a single JSON document carrying the same fields. Writes go to a
//! temporary file in the target directory and are renamed into place.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use kas_core::assembly::{GeneratorInput, Summary};
use kas_core::evaluation::{EntitySets, EvalReport, SampleKey};
use kas_core::knowledge::{KnowledgeError, KnowledgeTriple};
use kas_core::ranking::{RankedSelection, SegmentScore};
use kas_core::transcript::{Fragment, Query, QueryKind, Segment, SegmentId};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub format: String,
    pub version: u32,
    pub fingerprint: String,
}

impl Header {
    pub fn new(kind: &str, fingerprint: &str) -> Self {
        Self { format: format!("kas-{kind}"), version: VERSION, fingerprint: fingerprint.to_string() }
    }
}

/// Writes `bytes` to `path` through a sibling temporary file.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        write(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn to_line<T: Serialize>(value: &T) -> std::io::Result<String> {
    serde_json::to_string(value).map_err(std::io::Error::other)
}

pub fn write_jsonl<T: Serialize>(path: &Path, kind: &str, fingerprint: &str, records: &[T]) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{}", to_line(&Header::new(kind, fingerprint))?)?;
        for r in records {
            writeln!(w, "{}", to_line(r)?)?;
        }
        Ok(())
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        let text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        writeln!(w, "{text}")
    })
}

fn parse_line<T: DeserializeOwned>(path: &Path, lineno: usize, line: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(line);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let at = e.path().to_string();
        let at = if at == "." { String::new() } else { format!("{at}: ") };
        Error::validation(format!("{}:{lineno}: {at}{}", path.display(), e.inner()))
    })
}

fn check_header(path: &Path, header: &Header, kind: &str, expected: Option<&str>) -> Result<()> {
    let want = format!("kas-{kind}");
    if header.format != want {
        return Err(Error::validation(format!(
            "{}: expected a {want} file, found {}",
            path.display(),
            header.format
        )));
    }
    if header.version != VERSION {
        return Err(Error::validation(format!("{}: unsupported version {}", path.display(), header.version)));
    }
    if let Some(fp) = expected {
        if header.fingerprint != fp {
            return Err(Error::validation(format!(
                "{}: config fingerprint {} does not match the current configuration ({fp}); rerun the upstream stage",
                path.display(),
                header.fingerprint
            )));
        }
    }
    Ok(())
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty())
}

/// Reads a headered JSONL file, rejecting a fingerprint other than `expected`.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path, kind: &str, expected: Option<&str>) -> Result<(Header, Vec<T>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut it = lines(&text);
    let (n, first) = it.next().ok_or_else(|| Error::validation(format!("{}: empty file", path.display())))?;
    let header: Header = parse_line(path, n, first)?;
    check_header(path, &header, kind, expected)?;
    let records = it.map(|(n, l)| parse_line(path, n, l)).collect::<Result<Vec<T>>>()?;
    Ok((header, records))
}

/// Like [`read_jsonl`] but the header is optional, for files produced by
/// other tools.
pub fn read_jsonl_lenient<T: DeserializeOwned>(
    path: &Path,
    kind: &str,
    expected: Option<&str>,
) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut it = lines(&text).peekable();
    if let Some((n, first)) = it.peek().copied() {
        let value: serde_json::Value = parse_line(path, n, first)?;
        if value.get("format").is_some() {
            let header: Header = parse_line(path, n, first)?;
            check_header(path, &header, kind, expected)?;
            it.next();
        }
    }
    it.map(|(n, l)| parse_line(path, n, l)).collect()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de)
        .map_err(|e| Error::validation(format!("{}: {}: {}", path.display(), e.path(), e.inner())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentRecord {
    pub meeting: String,
    pub ordinal: usize,
    pub span: [usize; 2],
    pub fragment: Option<[usize; 2]>,
    pub tokens: usize,
    pub text: String,
}

impl From<&Segment> for SegmentRecord {
    fn from(s: &Segment) -> Self {
        Self {
            meeting: s.id.meeting_id.clone(),
            ordinal: s.id.ordinal,
            span: [s.first_utterance, s.last_utterance],
            fragment: s.fragment.map(|f| [f.index, f.total]),
            tokens: s.token_count,
            text: s.text.clone(),
        }
    }
}

impl From<SegmentRecord> for Segment {
    fn from(r: SegmentRecord) -> Self {
        Segment {
            id: SegmentId::new(r.meeting, r.ordinal),
            first_utterance: r.span[0],
            last_utterance: r.span[1],
            text: r.text,
            token_count: r.tokens,
            fragment: r.fragment.map(|[index, total]| Fragment { index, total }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRecord {
    pub meeting: String,
    pub query: String,
    pub kind: QueryKind,
    pub text: String,
    pub reference: Option<String>,
}

impl From<&Query> for QueryRecord {
    fn from(q: &Query) -> Self {
        Self {
            meeting: q.meeting_id().to_string(),
            query: q.query_id().to_string(),
            kind: q.kind(),
            text: q.text().to_string(),
            reference: q.reference_summary().map(str::to_string),
        }
    }
}

impl QueryRecord {
    pub fn to_query(&self) -> Result<Query> {
        Ok(Query::new(&self.query, &self.meeting, &self.text, self.kind, self.reference.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeetingRecord {
    pub meeting: String,
    pub speakers: Vec<String>,
    pub utterances: usize,
    /// Rendered transcript, one `speaker: content` line per utterance.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleRecord {
    pub segment_id: (String, usize),
    pub subject: String,
    pub relation: String,
    pub object: String,
    pub sentence: usize,
}

impl From<&KnowledgeTriple> for TripleRecord {
    fn from(t: &KnowledgeTriple) -> Self {
        Self {
            segment_id: (t.segment.meeting_id.clone(), t.segment.ordinal),
            subject: t.subject_text(),
            relation: t.relation_text(),
            object: t.object_text(),
            sentence: t.sentence,
        }
    }
}

impl TripleRecord {
    pub fn to_triple(&self) -> Result<KnowledgeTriple, KnowledgeError> {
        KnowledgeTriple::from_strings(
            SegmentId::new(self.segment_id.0.clone(), self.segment_id.1),
            &self.subject,
            &self.relation,
            &self.object,
            self.sentence,
        )
    }
}

/// Knowledge for one segment under one query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentKnowledge {
    pub seg: usize,
    /// Triples that survived the query filter.
    pub count: usize,
    pub words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhraseRecord {
    pub meeting: String,
    pub query: String,
    pub segments: Vec<SegmentKnowledge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRecord {
    pub seg: usize,
    pub se: f64,
    pub ka: f64,
    pub rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionRecord {
    pub meeting: String,
    pub query: String,
    pub k: usize,
    /// Selected ordinals in document order.
    pub selected: Vec<usize>,
    /// All segments in rank order.
    pub scores: Vec<ScoreRecord>,
}

impl From<&RankedSelection> for SelectionRecord {
    fn from(s: &RankedSelection) -> Self {
        Self {
            meeting: s.meeting_id.clone(),
            query: s.query_id.clone(),
            k: s.k,
            selected: s.selected.clone(),
            scores: s
                .scores
                .iter()
                .map(|x| ScoreRecord { seg: x.segment.ordinal, se: x.score_se, ka: x.score_ka, rank: x.score_rank })
                .collect(),
        }
    }
}

impl From<SelectionRecord> for RankedSelection {
    fn from(r: SelectionRecord) -> Self {
        RankedSelection {
            scores: r
                .scores
                .iter()
                .map(|x| SegmentScore {
                    segment: SegmentId::new(r.meeting.clone(), x.seg),
                    score_se: x.se,
                    score_ka: x.ka,
                    score_rank: x.rank,
                })
                .collect(),
            meeting_id: r.meeting,
            query_id: r.query,
            k: r.k,
            selected: r.selected,
        }
    }
}

/// Generator input as consumed by external generators: `parts` are the
/// rendered strings; `segments` and `knowledge` are kept for local stages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputRecord {
    pub query: String,
    pub meeting: String,
    pub parts: Vec<String>,
    pub segments: Vec<usize>,
    pub query_text: String,
    pub knowledge: Vec<Vec<String>>,
    pub segment_texts: Vec<String>,
}

impl From<&GeneratorInput> for InputRecord {
    fn from(g: &GeneratorInput) -> Self {
        Self {
            query: g.query_id.clone(),
            meeting: g.meeting_id.clone(),
            parts: g.parts.iter().map(|p| p.rendered.clone()).collect(),
            segments: g.parts.iter().map(|p| p.segment.ordinal).collect(),
            query_text: g.query_text.clone(),
            knowledge: g.parts.iter().map(|p| p.knowledge.clone()).collect(),
            segment_texts: g.parts.iter().map(|p| p.segment_text.clone()).collect(),
        }
    }
}

impl InputRecord {
    pub fn to_input(&self, path: &Path) -> Result<GeneratorInput> {
        let n = self.parts.len();
        if self.segments.len() != n || self.knowledge.len() != n || self.segment_texts.len() != n {
            return Err(Error::validation(format!(
                "{}: query {}: parts, segments, knowledge and segment_texts differ in length",
                path.display(),
                self.query
            )));
        }
        Ok(GeneratorInput {
            query_id: self.query.clone(),
            meeting_id: self.meeting.clone(),
            query_text: self.query_text.clone(),
            parts: (0..n)
                .map(|i| kas_core::assembly::InputPart {
                    segment: SegmentId::new(self.meeting.clone(), self.segments[i]),
                    knowledge: self.knowledge[i].clone(),
                    segment_text: self.segment_texts[i].clone(),
                    rendered: self.parts[i].clone(),
                })
                .collect(),
            separators: kas_core::assembly::SEPARATORS,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryRecord {
    pub meeting: String,
    pub query: String,
    pub generator: String,
    pub summary: String,
}

impl From<&Summary> for SummaryRecord {
    fn from(s: &Summary) -> Self {
        Self {
            meeting: s.meeting_id.clone(),
            query: s.query_id.clone(),
            generator: s.generator.clone(),
            summary: s.text.clone(),
        }
    }
}

impl From<SummaryRecord> for Summary {
    fn from(r: SummaryRecord) -> Self {
        Summary { query_id: r.query, meeting_id: r.meeting, text: r.summary, generator: r.generator }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntityRecord {
    pub meeting: String,
    pub query: String,
    pub summary_entities: Vec<String>,
    pub source_entities: Vec<String>,
}

impl EntityRecord {
    pub fn into_entry(self) -> (SampleKey, EntitySets) {
        (
            (self.meeting, self.query),
            EntitySets {
                summary: self.summary_entities.into_iter().collect(),
                source: self.source_entities.into_iter().collect(),
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub format: String,
    pub version: u32,
    pub fingerprint: String,
    #[serde(flatten)]
    pub report: EvalReport,
}

impl ReportFile {
    pub fn new(fingerprint: &str, report: EvalReport) -> Self {
        Self { format: "kas-report".into(), version: VERSION, fingerprint: fingerprint.into(), report }
    }
}
