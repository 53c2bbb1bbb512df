//! Pipeline stages over a work directory.
//!
//! Upstream files (`segments`, `queries`, `meetings`, `triples`, `phrases`)
//! live in the work directory; per-run files (`selections`, `inputs`,
//! `summaries`, `report.json`) go to the run directory, which is the work
//! directory itself except for k-sweeps. Work is spread over a thread pool and
//! every file is written in (meeting, query) order.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use kas_core::assembly::{assemble, generate, ExtractiveGenerator, Generator, Summary};
use kas_core::embedding::{BagOfWordsProvider, EmbeddingProvider};
use kas_core::evaluation::{evaluate_run, EvalOptions, EvalReport, SampleKey, Source};
use kas_core::knowledge::{extract_triples, filter_by_query, phrases_by_segment, triple_counts, KnowledgeTriple};
use kas_core::ranking::{rank_and_select, RankConfig, RankedSelection};
use kas_core::text::{StopWords, TermNormalizer};
use kas_core::transcript::{segment_transcript, Query, Segment};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{EntitySource, Fingerprints, GeneratorKind, PipelineConfig, ProviderKind};
use crate::error::{Error, Result};
use crate::files::*;
use crate::http::{HttpEmbeddingProvider, HttpGenerator, RetryPolicy};
use crate::qmsum::load_qmsum;
use crate::vecstore::{FileStoreProvider, VectorStore};

#[derive(Debug, Clone)]
pub struct Layout {
    pub work: PathBuf,
    pub run: PathBuf,
}

impl Layout {
    pub fn new(work: impl Into<PathBuf>) -> Self {
        let work = work.into();
        Self { run: work.clone(), work }
    }

    pub fn segments(&self) -> PathBuf {
        self.work.join("segments.jsonl")
    }
    pub fn queries(&self) -> PathBuf {
        self.work.join("queries.jsonl")
    }
    pub fn meetings(&self) -> PathBuf {
        self.work.join("meetings.jsonl")
    }
    pub fn triples(&self) -> PathBuf {
        self.work.join("triples.jsonl")
    }
    pub fn phrases(&self) -> PathBuf {
        self.work.join("phrases.jsonl")
    }
    pub fn selections(&self) -> PathBuf {
        self.run.join("selections.jsonl")
    }
    pub fn inputs(&self) -> PathBuf {
        self.run.join("inputs.jsonl")
    }
    pub fn summaries(&self) -> PathBuf {
        self.run.join("summaries.jsonl")
    }
    pub fn report(&self) -> PathBuf {
        self.run.join("report.json")
    }
    pub fn log(&self) -> PathBuf {
        self.work.join("kas.log")
    }
}

pub struct Pipeline {
    config: PipelineConfig,
    fp: Fingerprints,
    stop: StopWords,
    layout: Layout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentStats {
    pub meetings: usize,
    pub queries: usize,
    pub segments: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub fingerprint: String,
    pub report: String,
    pub count: usize,
    pub r1: f64,
    pub r2: f64,
    pub rl: f64,
    pub entity_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub format: String,
    pub version: u32,
    pub fingerprint: String,
    pub rows: Vec<SweepRow>,
}

fn group_by_meeting<T>(items: Vec<T>, key: impl Fn(&T) -> &str) -> BTreeMap<String, Vec<T>> {
    let mut out: BTreeMap<String, Vec<T>> = BTreeMap::new();
    for item in items {
        out.entry(key(&item).to_string()).or_default().push(item);
    }
    out
}

fn meeting_of<'a, T>(map: &'a BTreeMap<String, Vec<T>>, meeting: &str, what: &str) -> Result<&'a [T]> {
    map.get(meeting)
        .map(Vec::as_slice)
        .ok_or_else(|| Error::validation(format!("no {what} for meeting {meeting}")))
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let fp = config.fingerprints()?;
        let stop = config.stop_word_set()?;
        let layout = Layout::new(&config.output_dir);
        Ok(Self { config, fp, stop, layout })
    }

    /// Sends per-run outputs to `run` while reading upstream files from the
    /// work directory.
    pub fn with_run_dir(mut self, run: impl Into<PathBuf>) -> Self {
        self.layout.run = run.into();
        self
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn fingerprints(&self) -> &Fingerprints {
        &self.fp
    }

    pub fn log(&self, stage: &str, message: &str) {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or(Duration::ZERO);
        let line = format!("{}.{:03} {stage}: {message}\n", now.as_secs(), now.subsec_millis());
        let path = self.layout.log();
        if std::fs::create_dir_all(&self.layout.work).is_ok() {
            if let Ok(mut f) = OpenOptions::new().create(true).append(true).open(path) {
                let _ = f.write_all(line.as_bytes());
            }
        }
    }

    fn read_segments(&self) -> Result<Vec<Segment>> {
        let (_, recs): (_, Vec<SegmentRecord>) = read_jsonl(&self.layout.segments(), "segments", Some(&self.fp.segment))?;
        Ok(recs.into_iter().map(Segment::from).collect())
    }

    fn read_queries(&self) -> Result<Vec<Query>> {
        let (_, recs): (_, Vec<QueryRecord>) = read_jsonl(&self.layout.queries(), "queries", Some(&self.fp.segment))?;
        recs.iter().map(QueryRecord::to_query).collect()
    }

    fn read_phrases(&self) -> Result<Vec<PhraseRecord>> {
        Ok(read_jsonl(&self.layout.phrases(), "phrases", Some(&self.fp.knowledge))?.1)
    }

    pub fn segment(&self, input: &Path) -> Result<SegmentStats> {
        let budget = NonZeroUsize::new(self.config.max_segment_tokens)
            .ok_or_else(|| Error::validation("max_segment_tokens must be at least 1"))?;
        let meetings = load_qmsum(input)?;
        let tokenizer = self.config.tokenizer;
        let segments: Vec<Vec<Segment>> =
            meetings.par_iter().map(|m| segment_transcript(&m.transcript, budget, &tokenizer)).collect();
        let seg_records: Vec<SegmentRecord> = segments.iter().flatten().map(SegmentRecord::from).collect();
        let mut queries: Vec<QueryRecord> = meetings.iter().flat_map(|m| &m.queries).map(QueryRecord::from).collect();
        queries.sort_by(|a, b| (&a.meeting, &a.query).cmp(&(&b.meeting, &b.query)));
        let meeting_records: Vec<MeetingRecord> = meetings
            .iter()
            .map(|m| MeetingRecord {
                meeting: m.transcript.meeting_id().to_string(),
                speakers: m.transcript.speakers().into_iter().map(str::to_string).collect(),
                utterances: m.transcript.len(),
                text: m.transcript.utterances().iter().map(|u| u.rendered()).collect::<Vec<_>>().join("\n"),
            })
            .collect();
        write_jsonl(&self.layout.segments(), "segments", &self.fp.segment, &seg_records)?;
        write_jsonl(&self.layout.queries(), "queries", &self.fp.segment, &queries)?;
        write_jsonl(&self.layout.meetings(), "meetings", &self.fp.segment, &meeting_records)?;
        let stats = SegmentStats { meetings: meetings.len(), queries: queries.len(), segments: seg_records.len() };
        self.log("segment", &format!("{stats:?} from {}", input.display()));
        Ok(stats)
    }

    /// Extracts triples (or reads `import`), filters them per query and writes
    /// per-segment counts and knowledge words.
    pub fn knowledge(&self, import: Option<&Path>) -> Result<usize> {
        let segments = self.read_segments()?;
        let queries = self.read_queries()?;
        let triples: Vec<KnowledgeTriple> = match import {
            Some(path) => {
                let recs: Vec<TripleRecord> = read_jsonl_lenient(path, "triples", None)?;
                recs.iter()
                    .enumerate()
                    .map(|(i, r)| {
                        r.to_triple().map_err(|e| Error::validation(format!("{}: triple {}: {e}", path.display(), i + 1)))
                    })
                    .collect::<Result<_>>()?
            }
            None => segments.par_iter().flat_map_iter(extract_triples).collect(),
        };
        let by_meeting_segments = group_by_meeting(segments, |s| s.meeting_id());
        let by_meeting_triples = group_by_meeting(triples.clone(), |t| t.segment.meeting_id.as_str());
        for (meeting, ts) in &by_meeting_triples {
            triple_counts(ts, meeting_of(&by_meeting_segments, meeting, "segments")?)?;
        }
        let normalizer = TermNormalizer::new(&self.stop, self.config.stem_query_overlap);
        let records: Vec<PhraseRecord> = queries
            .par_iter()
            .map(|q| {
                let segs = meeting_of(&by_meeting_segments, q.meeting_id(), "segments")?;
                let ts = by_meeting_triples.get(q.meeting_id()).map(Vec::as_slice).unwrap_or(&[]);
                let filtered = filter_by_query(ts, q, &normalizer);
                let counts = triple_counts(&filtered, segs)?;
                let phrases = phrases_by_segment(&filtered, segs, &self.stop)?;
                Ok(PhraseRecord {
                    meeting: q.meeting_id().to_string(),
                    query: q.query_id().to_string(),
                    segments: segs
                        .iter()
                        .zip(counts)
                        .zip(phrases)
                        .map(|((s, count), p)| SegmentKnowledge { seg: s.ordinal(), count, words: p.phrases })
                        .collect(),
                })
            })
            .collect::<Result<_>>()?;
        let triple_records: Vec<TripleRecord> = triples.iter().map(TripleRecord::from).collect();
        write_jsonl(&self.layout.triples(), "triples", &self.fp.knowledge, &triple_records)?;
        write_jsonl(&self.layout.phrases(), "phrases", &self.fp.knowledge, &records)?;
        self.log("knowledge", &format!("{} triples, {} queries", triple_records.len(), records.len()));
        Ok(triple_records.len())
    }

    pub fn provider(&self) -> Result<Box<dyn EmbeddingProvider>> {
        let p = &self.config.provider;
        let bow = || Box::new(BagOfWordsProvider::with_stop_words(p.dim, self.stop.clone()));
        Ok(match p.kind {
            ProviderKind::Bow => bow(),
            ProviderKind::Store => {
                let path = p.store.as_deref().ok_or_else(|| Error::validation("provider.store is not set"))?;
                let store = VectorStore::load(path)?;
                if store.dim() != p.dim {
                    return Err(Error::validation(format!(
                        "{}: store dim {} differs from provider.dim {}",
                        path.display(),
                        store.dim(),
                        p.dim
                    )));
                }
                if p.strict {
                    Box::new(FileStoreProvider::strict(store))
                } else {
                    Box::new(FileStoreProvider::with_fallback(store, bow())?)
                }
            }
            ProviderKind::Http => {
                let endpoint =
                    p.endpoint.as_deref().ok_or_else(|| Error::validation("provider.endpoint is not set"))?;
                Box::new(HttpEmbeddingProvider::new(endpoint, p.dim, p.batch_size, self.retry()))
            }
        })
    }

    fn retry(&self) -> RetryPolicy {
        RetryPolicy {
            retries: self.config.provider.retries,
            backoff: Duration::from_millis(self.config.provider.backoff_ms),
        }
    }

    pub fn rank(&self) -> Result<Vec<RankedSelection>> {
        let segments = group_by_meeting(self.read_segments()?, |s| s.meeting_id());
        let queries = self.read_queries()?;
        let phrases: BTreeMap<(String, String), PhraseRecord> =
            self.read_phrases()?.into_iter().map(|p| ((p.meeting.clone(), p.query.clone()), p)).collect();
        let provider = self.provider()?;
        let k = NonZeroUsize::new(self.config.top_k).ok_or_else(|| Error::validation("top_k must be at least 1"))?;
        let rank_config = RankConfig { ka_weight: self.config.ka_weight };
        let results: Vec<(RankedSelection, Vec<usize>)> = queries
            .par_iter()
            .map(|q| {
                let segs = meeting_of(&segments, q.meeting_id(), "segments")?;
                let key = (q.meeting_id().to_string(), q.query_id().to_string());
                let p = phrases
                    .get(&key)
                    .ok_or_else(|| Error::validation(format!("no knowledge for query {}", q.query_id())))?;
                if p.segments.iter().map(|s| s.seg).ne(segs.iter().map(Segment::ordinal)) {
                    return Err(Error::validation(format!(
                        "knowledge for query {} does not match the segments of meeting {}",
                        q.query_id(),
                        q.meeting_id()
                    )));
                }
                let counts: Vec<usize> = p.segments.iter().map(|s| s.count).collect();
                Ok(rank_and_select(q, segs, provider.as_ref(), &counts, k, rank_config)?)
            })
            .collect::<Result<_>>()?;
        let zero: Vec<String> = results
            .iter()
            .filter(|(_, z)| !z.is_empty())
            .map(|(s, z)| format!("{} {:?}", s.query_id, z))
            .collect();
        if !zero.is_empty() {
            self.log("rank", &format!("zero-norm embeddings scored 0 for: {}", zero.join("; ")));
        }
        let selections: Vec<RankedSelection> = results.into_iter().map(|(s, _)| s).collect();
        let records: Vec<SelectionRecord> = selections.iter().map(SelectionRecord::from).collect();
        write_jsonl(&self.layout.selections(), "selections", &self.fp.rank, &records)?;
        self.log("rank", &format!("{} selections, k={}", records.len(), self.config.top_k));
        Ok(selections)
    }

    pub fn assemble(&self) -> Result<usize> {
        let segments = group_by_meeting(self.read_segments()?, |s| s.meeting_id());
        let queries: BTreeMap<(String, String), Query> = self
            .read_queries()?
            .into_iter()
            .map(|q| ((q.meeting_id().to_string(), q.query_id().to_string()), q))
            .collect();
        let phrases: BTreeMap<(String, String), PhraseRecord> =
            self.read_phrases()?.into_iter().map(|p| ((p.meeting.clone(), p.query.clone()), p)).collect();
        let (_, selections): (_, Vec<SelectionRecord>) =
            read_jsonl(&self.layout.selections(), "selections", Some(&self.fp.rank))?;
        let records: Vec<InputRecord> = selections
            .into_par_iter()
            .map(|rec| {
                let key = (rec.meeting.clone(), rec.query.clone());
                let q = queries.get(&key).ok_or_else(|| Error::validation(format!("unknown query {}", rec.query)))?;
                let p = phrases
                    .get(&key)
                    .ok_or_else(|| Error::validation(format!("no knowledge for query {}", rec.query)))?;
                let sets: Vec<_> = p
                    .segments
                    .iter()
                    .map(|s| kas_core::knowledge::KnowledgePhraseSet {
                        segment: kas_core::transcript::SegmentId::new(rec.meeting.clone(), s.seg),
                        phrases: s.words.clone(),
                    })
                    .collect();
                let segs = meeting_of(&segments, &rec.meeting, "segments")?;
                let input = assemble(q, &RankedSelection::from(rec), &sets, segs)?;
                Ok(InputRecord::from(&input))
            })
            .collect::<Result<_>>()?;
        write_jsonl(&self.layout.inputs(), "inputs", &self.fp.assemble, &records)?;
        self.log("assemble", &format!("{} generator inputs", records.len()));
        Ok(records.len())
    }

    fn generator(&self) -> Result<Box<dyn Generator + Send + Sync>> {
        let g = &self.config.generator;
        Ok(match g.kind {
            GeneratorKind::Extractive => Box::new(ExtractiveGenerator {
                sentence_budget: g.sentences,
                stop_words: self.stop.clone(),
                stem: self.config.stem_query_overlap,
            }),
            GeneratorKind::Http => {
                let endpoint =
                    g.endpoint.as_deref().ok_or_else(|| Error::validation("generator.endpoint is not set"))?;
                Box::new(HttpGenerator::new(endpoint, self.retry()))
            }
        })
    }

    pub fn generate(&self) -> Result<usize> {
        let path = self.layout.inputs();
        let (_, inputs): (_, Vec<InputRecord>) = read_jsonl(&path, "inputs", Some(&self.fp.assemble))?;
        let generator = self.generator()?;
        let summaries: Vec<SummaryRecord> = inputs
            .par_iter()
            .map(|rec| {
                let input = rec.to_input(&path)?;
                Ok(SummaryRecord::from(&generate(&input, generator.as_ref())?))
            })
            .collect::<Result<_>>()?;
        write_jsonl(&self.layout.summaries(), "summaries", &self.fp.generate, &summaries)?;
        self.log("generate", &format!("{} summaries", summaries.len()));
        Ok(summaries.len())
    }

    pub fn evaluate(&self, entities: Option<&Path>) -> Result<EvalReport> {
        let (_, summaries): (_, Vec<SummaryRecord>) =
            read_jsonl(&self.layout.summaries(), "summaries", Some(&self.fp.generate))?;
        let references: BTreeMap<SampleKey, String> = self
            .read_queries()?
            .iter()
            .filter_map(|q| {
                let r = q.reference_summary()?;
                Some(((q.meeting_id().to_string(), q.query_id().to_string()), r.to_string()))
            })
            .collect();
        let (_, meetings): (_, Vec<MeetingRecord>) =
            read_jsonl(&self.layout.meetings(), "meetings", Some(&self.fp.segment))?;
        let meetings: BTreeMap<String, MeetingRecord> = meetings.into_iter().map(|m| (m.meeting.clone(), m)).collect();
        let (kept, skipped): (Vec<Summary>, Vec<Summary>) = summaries
            .into_iter()
            .map(Summary::from)
            .partition(|s| references.contains_key(&(s.meeting_id.clone(), s.query_id.clone())));
        if !skipped.is_empty() {
            self.log("evaluate", &format!("{} summaries have no reference and were skipped", skipped.len()));
        }
        let mut sources: BTreeMap<SampleKey, Source> = BTreeMap::new();
        let selected_text: BTreeMap<SampleKey, String> = match self.config.entity_source {
            EntitySource::Selected => {
                let (_, inputs): (_, Vec<InputRecord>) =
                    read_jsonl(&self.layout.inputs(), "inputs", Some(&self.fp.assemble))?;
                inputs.into_iter().map(|i| ((i.meeting, i.query), i.segment_texts.join("\n"))).collect()
            }
            EntitySource::Transcript => BTreeMap::new(),
        };
        for s in &kept {
            let key = (s.meeting_id.clone(), s.query_id.clone());
            let m = meetings
                .get(&s.meeting_id)
                .ok_or_else(|| Error::validation(format!("unknown meeting {}", s.meeting_id)))?;
            let text = match self.config.entity_source {
                EntitySource::Transcript => m.text.clone(),
                EntitySource::Selected => selected_text
                    .get(&key)
                    .cloned()
                    .ok_or_else(|| Error::validation(format!("no generator input for query {}", s.query_id)))?,
            };
            sources.insert(key, Source { text, speakers: m.speakers.clone() });
        }
        let keep: std::collections::BTreeSet<&SampleKey> = sources.keys().collect();
        let references: BTreeMap<SampleKey, String> =
            references.iter().filter(|(k, _)| keep.contains(k)).map(|(k, v)| (k.clone(), v.clone())).collect();
        let imported_entities = match entities {
            Some(path) => read_jsonl_lenient::<EntityRecord>(path, "entities", None)?
                .into_iter()
                .map(EntityRecord::into_entry)
                .collect(),
            None => BTreeMap::new(),
        };
        let options = EvalOptions { stem: self.config.stem_rouge, imported_entities };
        let report = evaluate_run(&kept, &references, &sources, &options)?;
        write_json(&self.layout.report(), &ReportFile::new(&self.fp.evaluate, report.clone()))?;
        self.log("evaluate", &format!("{} samples", report.count));
        Ok(report)
    }

    /// Every stage from raw QMSum data to the report.
    pub fn run(&self, input: &Path, triples: Option<&Path>, entities: Option<&Path>) -> Result<EvalReport> {
        self.segment(input)?;
        self.knowledge(triples)?;
        self.rank()?;
        self.assemble()?;
        self.generate()?;
        self.evaluate(entities)
    }

    /// Ranks, assembles, generates and evaluates once per k over the current
    /// upstream files, writing each run to `sweep/k<k>/`.
    pub fn sweep_k(&self, ks: &[usize], entities: Option<&Path>) -> Result<SweepTable> {
        if ks.is_empty() {
            return Err(Error::validation("sweep needs at least one k"));
        }
        let sweep_dir = self.layout.work.join("sweep");
        let mut rows = Vec::new();
        for &k in ks {
            let config = PipelineConfig { top_k: k, ..self.config.clone() };
            let run = Pipeline::new(config)?.with_run_dir(sweep_dir.join(format!("k{k}")));
            run.rank()?;
            run.assemble()?;
            run.generate()?;
            let report = run.evaluate(entities)?;
            rows.push(SweepRow {
                k,
                fingerprint: run.fp.evaluate.clone(),
                report: format!("k{k}/report.json"),
                count: report.count,
                r1: report.corpus.r1.f1,
                r2: report.corpus.r2.f1,
                rl: report.corpus.rl.f1,
                entity_f1: report.corpus.entity_f1,
            });
        }
        let table = SweepTable {
            format: "kas-sweep".into(),
            version: VERSION,
            fingerprint: self.fp.knowledge.clone(),
            rows,
        };
        write_json(&sweep_dir.join("sweep.json"), &table)?;
        self.log("sweep", &format!("k in {ks:?}"));
        Ok(table)
    }
}
