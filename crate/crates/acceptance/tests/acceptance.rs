//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! QMSum checks read the corpus from `$QMSUM_DIR` (default `data/qmsum` at the
//! workspace root); point it at a directory holding the QMSum `train`, `val`
//! and `test` splits as `.json` or `.jsonl` files, and nothing else.

use std::collections::BTreeMap;
use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use kas::qmsum::load_qmsum;
use kas::vecstore::FileStoreProvider;
use kas::{Pipeline, PipelineConfig};
use kas_core::embedding::{BagOfWordsProvider, EmbedError, EmbeddingProvider, EmbeddingVector};
use kas_core::evaluation::{entity_f1, entity_f1_sets, lcs_len, metric_tokens, rouge_l, rouge_n, EntityExtractor};
use kas_core::knowledge::{extract_triples, filter_by_query, triple_counts};
use kas_core::ranking::{knowledge_scores, rank_and_select, select, semantic_scores, RankConfig};
use kas_core::text::{StopWords, TermNormalizer};
use kas_core::transcript::{segment_transcript, Query, QueryKind, Segment, SegmentId, Tokenizer, TokenizerKind, Transcript};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn qmsum_dir() -> PathBuf {
    std::env::var_os("QMSUM_DIR").map(PathBuf::from).unwrap_or_else(|| workspace().join("data/qmsum"))
}

fn nz(n: usize) -> NonZeroUsize {
    NonZeroUsize::new(n).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// --- segmentation -----------------------------------------------------------

/// Coverage, budget, greedy closing and determinism for one transcript.
fn check_segmentation(t: &Transcript, l: usize, tok: TokenizerKind) -> Result<Vec<Segment>, String> {
    let segs = segment_transcript(t, nz(l), &tok);
    let again = segment_transcript(t, nz(l), &tok);
    ensure(segs == again, || format!("{}: segmentation not deterministic", t.meeting_id()))?;
    let lines: Vec<String> = t.utterances().iter().map(|u| u.rendered()).collect();
    let mut next_utt = 0;
    let mut i = 0;
    let fail = |what: &str, i: usize| format!("{} l={l}: segment {i}: {what}", t.meeting_id());
    while i < segs.len() {
        let s = &segs[i];
        ensure(s.ordinal() == i && s.first_utterance == next_utt, || fail("gap or reordering", i))?;
        ensure(s.token_count == tok.count(&s.text) && s.token_count <= l, || fail("over budget", i))?;
        match s.fragment {
            None => {
                ensure(s.text == lines[s.first_utterance..=s.last_utterance].join("\n"), || fail("text mismatch", i))?;
                if let Some(next) = segs.get(i + 1).filter(|n| n.fragment.is_none()) {
                    let merged = format!("{}\n{}", s.text, lines[next.first_utterance]);
                    ensure(tok.count(&merged) > l, || fail("closed before the budget was reached", i))?;
                }
                next_utt = s.last_utterance + 1;
                i += 1;
            }
            Some(f) => {
                let line = &lines[s.first_utterance];
                ensure(f.index == 0 && tok.count(line) > l, || fail("unexpected fragment", i))?;
                let mut rebuilt = Vec::new();
                for (j, p) in segs[i..i + f.total].iter().enumerate() {
                    ensure(p.fragment.map(|g| (g.index, g.total)) == Some((j, f.total)), || fail("fragment order", i + j))?;
                    ensure(p.first_utterance == s.first_utterance && p.last_utterance == s.first_utterance, || {
                        fail("fragment span", i + j)
                    })?;
                    rebuilt.extend(tok.token_spans(&p.text).into_iter().map(|r| p.text[r].to_string()));
                }
                let original: Vec<String> = tok.token_spans(line).into_iter().map(|r| line[r].to_string()).collect();
                ensure(rebuilt == original, || fail("fragments do not rebuild the utterance", i))?;
                next_utt = s.first_utterance + 1;
                i += f.total;
            }
        }
    }
    ensure(next_utt == t.len(), || format!("{}: utterances after {next_utt} not covered", t.meeting_id()))?;
    Ok(segs)
}

fn check_monotone(t: &Transcript, l: usize, wider: usize, tok: TokenizerKind) -> Result<(), String> {
    let a = segment_transcript(t, nz(l), &tok).len();
    let b = segment_transcript(t, nz(wider), &tok).len();
    ensure(b <= a, || format!("{}: {a} segments at l={l} but {b} at l={wider}", t.meeting_id()))
}

const WORDS: &[&str] = &[
    "the", "remote", "budget", "we", "should", "use", "a", "rubber", "case", "and", "logo", "is", "yellow", "um",
    "so", "I", "think", "price", "euros", "design", "it's", "okay", "button", "meeting", "next", "week",
];

fn random_transcript(rng: &mut StdRng, id: &str) -> Transcript {
    let n = rng.random_range(1..60);
    let turns: Vec<(String, String)> = (0..n)
        .map(|_| {
            let len = if rng.random_bool(0.05) { rng.random_range(200..900) } else { rng.random_range(1..120) };
            let words: Vec<&str> = (0..len).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect();
            let speaker = ["A", "B", "Project Manager", "Grad C"][rng.random_range(0..4)];
            (speaker.to_string(), format!("{}.", words.join(" ")))
        })
        .collect();
    Transcript::new(id, turns).unwrap()
}

fn segmentation_suite() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    for i in 0..1000 {
        let t = random_transcript(&mut rng, &format!("syn{i}"));
        let tok = if i % 2 == 0 { TokenizerKind::Whitespace } else { TokenizerKind::WordPunct };
        let l = [16, 64, 128, 512][i % 4];
        check_segmentation(&t, l, tok)?;
        check_monotone(&t, l, l + rng.random_range(1..300), tok)?;
    }
    let dir = qmsum_dir();
    if !dir.exists() {
        return Err(format!(
            "1,000 synthetic transcripts clean, but QMSum not found at {} (set QMSUM_DIR)",
            dir.display()
        ));
    }
    let meetings = load_qmsum(&dir).map_err(|e| e.to_string())?;
    let mut segments = 0;
    for m in &meetings {
        segments += check_segmentation(&m.transcript, 512, TokenizerKind::Whitespace)?.len();
        check_monotone(&m.transcript, 256, 512, TokenizerKind::Whitespace)?;
        check_monotone(&m.transcript, 512, 1024, TokenizerKind::Whitespace)?;
    }
    Ok(format!("1,000 synthetic transcripts and {} QMSum meetings ({segments} segments at l=512), 0 violations", meetings.len()))
}

fn qmsum_statistics() -> Outcome {
    let dir = qmsum_dir();
    if !dir.exists() {
        return Err(format!("QMSum not found at {} (set QMSUM_DIR)", dir.display()));
    }
    let start = Instant::now();
    let meetings = load_qmsum(&dir).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let queries: usize = meetings.iter().map(|m| m.queries.len()).sum();
    ensure(meetings.len() == 232 && queries == 1808 && elapsed < Duration::from_secs(30), || {
        format!("{} meetings, {queries} queries in {elapsed:.1?}; expected 232, 1808, < 30 s", meetings.len())
    })?;
    Ok(format!("232 meetings, 1,808 queries in {elapsed:.2?}"))
}

// --- scoring ------------------------------------------------------------------

fn knowledge_score_norm() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for i in 0..10_000 {
        let n = rng.random_range(1..200);
        let max = [1, 3, 50, 1_000_000][i % 4];
        let counts: Vec<usize> = (0..n).map(|_| if rng.random_bool(0.3) { 0 } else { rng.random_range(0..=max) }).collect();
        let ka = knowledge_scores(&counts);
        ensure(ka.len() == n && ka.iter().all(|&x| (0.0..=1.0).contains(&x)), || format!("case {i}: out of range"))?;
        if counts.iter().all(|&c| c == 0) {
            ensure(ka.iter().all(|&x| x == 0.0), || format!("case {i}: zero counts gave non-zero scores"))?;
        } else {
            let err = (ka.iter().map(|x| x * x).sum::<f64>() - 1.0).abs();
            worst = worst.max(err);
            ensure(err <= 1e-9, || format!("case {i}: squared norm off by {err:e}"))?;
        }
    }
    let zeros = knowledge_scores(&[0; 12]);
    ensure(zeros.iter().all(|&x| x == 0.0), || "all-zero counts".into())?;
    Ok(format!("10,000 vectors, max |sum sq - 1| = {worst:.1e}; all-zero input gives zeros"))
}

/// Serves fixed vectors, optionally scaled.
struct Table {
    vectors: BTreeMap<String, Vec<f64>>,
    scale: BTreeMap<String, f64>,
}

impl EmbeddingProvider for Table {
    fn dim(&self) -> usize {
        768
    }
    fn embed(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        texts
            .iter()
            .map(|t| {
                let f = self.scale.get(*t).copied().unwrap_or(1.0);
                EmbeddingVector::new(self.vectors[*t].iter().map(|x| x * f).collect())
            })
            .collect()
    }
}

fn instance(rng: &mut StdRng, n: usize, dim: usize) -> (Query, Vec<Segment>, Table) {
    let q = Query::new("q", "m", "query", QueryKind::Specific, None).unwrap();
    let segs: Vec<Segment> = (0..n)
        .map(|i| Segment {
            id: SegmentId::new("m", i),
            first_utterance: i,
            last_utterance: i,
            text: format!("segment {i}"),
            token_count: 2,
            fragment: None,
        })
        .collect();
    let mut vectors = BTreeMap::new();
    for text in std::iter::once("query".to_string()).chain(segs.iter().map(|s| s.text.clone())) {
        vectors.insert(text, (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect());
    }
    (q, segs, Table { vectors, scale: BTreeMap::new() })
}

fn independent_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn semantic_and_rank_properties() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    // scale invariance
    let (q, segs, mut table) = instance(&mut rng, 20, 768);
    let base = semantic_scores(&q, &segs, &table).unwrap().scores;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let texts: Vec<String> = table.vectors.keys().cloned().collect();
        table.scale = texts.into_iter().map(|t| (t, 10f64.powf(rng.random_range(-6.0..6.0)))).collect();
        let scaled = semantic_scores(&q, &segs, &table).unwrap().scores;
        for (a, b) in base.iter().zip(&scaled) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("scaling changed score_se by {worst:e}"))?;

    // zero counts: ranking is the cosine ranking
    for case in 0..1000 {
        let n = rng.random_range(1..40);
        let (q, segs, table) = instance(&mut rng, n, 32);
        let (sel, _) = rank_and_select(&q, &segs, &table, &vec![0; n], nz(n), RankConfig::default()).unwrap();
        let qv = &table.vectors["query"];
        let mut expected: Vec<(f64, usize)> =
            segs.iter().map(|s| (independent_cosine(qv, &table.vectors[&s.text]), s.ordinal())).collect();
        expected.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let want: Vec<usize> = expected.iter().map(|e| e.1).collect();
        ensure(sel.rank_order() == want, || format!("zero-count case {case}: order differs from cosine order"))?;
        let k = rng.random_range(1..=n);
        let (top, _) = rank_and_select(&q, &segs, &table, &vec![0; n], nz(k), RankConfig::default()).unwrap();
        let mut want_top = want[..k].to_vec();
        want_top.sort_unstable();
        ensure(top.selected == want_top, || format!("zero-count case {case}: top-{k} differs"))?;
    }

    // exhaustive selection oracle
    let mut checked = 0;
    for case in 0..3000 {
        let n = rng.random_range(1..=8);
        let k = rng.random_range(1..=9);
        let se: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(-4i32..=4)) / 4.0).collect();
        let counts: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let ids: Vec<SegmentId> = (0..n).map(|i| SegmentId::new("m", i)).collect();
        let sel = select("m", "q", &ids, &se, &counts, nz(k), RankConfig::default()).unwrap();
        let ka = knowledge_scores(&counts);
        let rank: Vec<f64> = (0..n).map(|i| se[i] + ka[i]).collect();
        let beats = |i: usize, j: usize| rank[i] > rank[j] || (rank[i] == rank[j] && i < j);
        let want = k.min(n);
        let winners: Vec<Vec<usize>> = (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == want)
            .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect::<Vec<_>>())
            .filter(|c| (0..n).filter(|j| !c.contains(j)).all(|j| c.iter().all(|&i| beats(i, j))))
            .collect();
        ensure(winners.len() == 1 && sel.selected == winners[0], || {
            format!("oracle case {case}: selected {:?}, exhaustive {:?}", sel.selected, winners)
        })?;
        checked += 1;
    }
    Ok(format!(
        "100 scalings max |d score_se| = {worst:.1e}; 1,000 zero-count instances match cosine order; {checked} exhaustive n<=8 instances agree"
    ))
}

// --- planted relevance ------------------------------------------------------

const TOPICS: &[&str] = &[
    "logo", "battery", "wheel", "screen", "cushion", "antenna", "titanium", "sensor", "keypad", "charger",
    "casing", "microphone", "lens", "hinge", "strap", "pixel", "socket", "cable", "chip", "speaker",
];

const FILLER_SUBJECTS: &[&str] = &["the manager", "our team", "marketing", "the designer", "they", "we", "she"];
const FILLER_VERBS: &[&str] = &["reviewed", "liked", "wants", "discussed", "will check", "prefers", "mentioned"];
const FILLER_OBJECTS: &[&str] = &[
    "the schedule", "some slides", "the weekly report", "a coffee break", "the agenda", "the minutes",
    "the travel plans", "an old email", "the room booking", "the spreadsheet",
];

fn pick<'a>(rng: &mut StdRng, xs: &[&'a str]) -> &'a str {
    xs[rng.random_range(0..xs.len())]
}

fn filler(rng: &mut StdRng) -> String {
    (0..rng.random_range(3..7))
        .map(|_| format!("{} {} {}.", pick(rng, FILLER_SUBJECTS), pick(rng, FILLER_VERBS), pick(rng, FILLER_OBJECTS)))
        .collect::<Vec<_>>()
        .join(" ")
}

struct PlantedCase {
    segments: Vec<Segment>,
    query: Query,
    planted: usize,
}

/// A meeting with one planted decision about two topic words and, optionally,
/// two decoy utterances that repeat the topic words without forming a clause.
fn planted_case(rng: &mut StdRng, id: usize, decoys: bool) -> PlantedCase {
    let a = pick(rng, TOPICS);
    let b = loop {
        let b = pick(rng, TOPICS);
        if b != a {
            break b;
        }
    };
    let n = rng.random_range(40..100);
    let mut turns: Vec<(String, String)> = (0..n).map(|_| (pick(rng, &["A", "B", "C", "D"]).to_string(), filler(rng))).collect();
    let planted_at = rng.random_range(0..n);
    turns[planted_at].1 = format!("{} The team approved the {a} {b} for the prototype. {}", filler(rng), filler(rng));
    if decoys {
        for _ in 0..2 {
            let at = loop {
                let at = rng.random_range(0..n);
                if at.abs_diff(planted_at) > 8 {
                    break at;
                }
            };
            turns[at].1 = format!("{a} {b}, {a} {b}, {b} {a} {b}. {a} {b} again, {a}.");
        }
    }
    let t = Transcript::new(format!("p{id}"), turns).unwrap();
    let segments = segment_transcript(&t, nz(96), &TokenizerKind::Whitespace);
    let planted = segments
        .iter()
        .find(|s| s.first_utterance <= planted_at && planted_at <= s.last_utterance)
        .map(|s| s.ordinal())
        .unwrap();
    let query = Query::new("q", format!("p{id}"), format!("What did the group decide about the {a} {b}?"), QueryKind::Specific, None).unwrap();
    PlantedCase { segments, query, planted }
}

fn planted_rank(case: &PlantedCase, provider: &BagOfWordsProvider, ka_weight: f64, k: usize) -> (usize, bool) {
    let stop = StopWords::english();
    let norm = TermNormalizer::new(&stop, false);
    let triples: Vec<_> = case.segments.iter().flat_map(extract_triples).collect();
    let filtered = filter_by_query(&triples, &case.query, &norm);
    let counts = triple_counts(&filtered, &case.segments).unwrap();
    let (sel, _) =
        rank_and_select(&case.query, &case.segments, provider, &counts, nz(k), RankConfig { ka_weight }).unwrap();
    let position = sel.rank_order().iter().position(|&o| o == case.planted).unwrap();
    (position, sel.selected.contains(&case.planted))
}

fn planted_relevance() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let provider = BagOfWordsProvider::new(768);
    let k = 4;
    let mut hits = 0;
    let mut sizes = 0;
    for i in 0..500 {
        let case = planted_case(&mut rng, i, i % 2 == 0);
        sizes += case.segments.len();
        hits += usize::from(planted_rank(&case, &provider, 1.0, k).1);
    }
    let rate = hits as f64 / 500.0;
    ensure(rate >= 0.95, || format!("planted segment in top-{k} for {hits}/500 cases"))?;
    let (mut with_ka, mut without_ka) = (0.0, 0.0);
    for i in 0..200 {
        let case = planted_case(&mut rng, 1000 + i, true);
        with_ka += planted_rank(&case, &provider, 1.0, k).0 as f64;
        without_ka += planted_rank(&case, &provider, 0.0, k).0 as f64;
    }
    let (with_ka, without_ka) = (with_ka / 200.0, without_ka / 200.0);
    ensure(with_ka < without_ka, || format!("mean planted rank {with_ka:.2} with knowledge score vs {without_ka:.2} without"))?;
    Ok(format!(
        "top-{k} hit rate {:.1}% over 500 meetings (mean {:.1} segments); decoy cases mean planted rank {with_ka:.2} with knowledge score, {without_ka:.2} without",
        rate * 100.0,
        sizes as f64 / 500.0
    ))
}

// --- metrics -------------------------------------------------------------------

fn random_text(rng: &mut StdRng, max: usize) -> String {
    const V: &[&str] = &["a", "b", "c", "d", "e", "A", "b.", "c,", "running", "runs", "the", "-"];
    (0..rng.random_range(0..=max)).map(|_| V[rng.random_range(0..V.len())]).collect::<Vec<_>>().join(" ")
}

fn brute_overlap(c: &[String], r: &[String], n: usize) -> (usize, usize, usize) {
    let grams = |t: &[String]| -> Vec<Vec<String>> { if t.len() < n { vec![] } else { t.windows(n).map(<[String]>::to_vec).collect() } };
    let (cg, mut rg) = (grams(c), grams(r));
    let total_r = rg.len();
    let mut hits = 0;
    for g in &cg {
        if let Some(p) = rg.iter().position(|x| x == g) {
            rg.swap_remove(p);
            hits += 1;
        }
    }
    (hits, cg.len(), total_r)
}

fn brute_lcs(a: &[String], b: &[String]) -> usize {
    (0u32..1 << a.len())
        .filter(|m| {
            let mut it = b.iter();
            (0..a.len()).filter(|i| m & (1 << i) != 0).all(|i| it.any(|x| *x == a[i]))
        })
        .map(|m| m.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 { 0.0 } else { num as f64 / den as f64 }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) }
}

fn rouge_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    for case in 0..10_000 {
        let stem = case % 2 == 0;
        let (c, r) = (random_text(&mut rng, 12), random_text(&mut rng, 12));
        let (ct, rt) = (metric_tokens(&c, stem), metric_tokens(&r, stem));
        for n in [1, 2] {
            let (hits, nc, nr) = brute_overlap(&ct, &rt, n);
            let (p, rec) = (ratio(hits, nc), ratio(hits, nr));
            let got = rouge_n(&c, &r, n, stem);
            ensure(got.precision == p && got.recall == rec && got.f1 == f1(p, rec), || {
                format!("case {case}: ROUGE-{n} of {c:?} vs {r:?} is {got:?}, oracle p={p} r={rec}")
            })?;
            let back = rouge_n(&r, &c, n, stem);
            ensure(back.precision == got.recall && back.recall == got.precision && back.f1 == got.f1, || {
                format!("case {case}: ROUGE-{n} swap")
            })?;
        }
        let (c, r) = (random_text(&mut rng, 10), random_text(&mut rng, 10));
        let (ct, rt) = (metric_tokens(&c, stem), metric_tokens(&r, stem));
        let lcs = brute_lcs(&ct, &rt);
        ensure(lcs_len(&ct, &rt) == lcs, || format!("case {case}: LCS of {c:?} vs {r:?}"))?;
        let got = rouge_l(&c, &r, stem);
        let (p, rec) = (ratio(lcs, ct.len()), ratio(lcs, rt.len()));
        ensure(got.precision == p && got.recall == rec && got.f1 == f1(p, rec), || format!("case {case}: ROUGE-L"))?;
        let back = rouge_l(&r, &c, stem);
        ensure(back.precision == got.recall && back.recall == got.precision && back.f1 == got.f1, || {
            format!("case {case}: ROUGE-L swap")
        })?;
        if ct.len() >= 2 {
            for s in [rouge_n(&c, &c, 1, stem), rouge_n(&c, &c, 2, stem), rouge_l(&c, &c, stem)] {
                ensure((s.precision, s.recall, s.f1) == (1.0, 1.0, 1.0), || format!("case {case}: identity {c:?}"))?;
            }
        }
    }
    Ok("10,000 random text pairs: ROUGE-1/2 equal brute-force n-gram intersection, ROUGE-L equals exhaustive LCS, swap and identity exact".into())
}

fn entity_examples() -> Outcome {
    let x = EntityExtractor::default();
    let summary = "We will meet Anna on Friday.";
    let source = "The Budget was approved by Anna on Friday.";
    let (es, er) = (x.extract(summary), x.extract(source));
    ensure(es.iter().eq(["anna", "friday"].iter()), || format!("summary entities {es:?}"))?;
    ensure(er.iter().eq(["anna", "budget", "friday"].iter()), || format!("source entities {er:?}"))?;
    let common = es.intersection(&er).count() as f64;
    let (p, r) = (common / es.len() as f64, common / er.len() as f64);
    ensure(p == 1.0 && r == 2.0 / 3.0, || format!("p={p} r={r}"))?;
    let got = entity_f1(summary, source, &x);
    ensure((got - 0.8).abs() < 1e-12, || format!("Entity F-1 {got}, expected 0.8"))?;
    let none = entity_f1("we will meet soon.", source, &x);
    ensure(none == 0.0, || format!("no summary entities gave {none}"))?;
    ensure(entity_f1(source, source, &x) == 1.0, || "summary = source".into())?;
    let empty = Default::default();
    ensure(entity_f1_sets(&empty, &empty) == 1.0, || "both empty".into())?;
    ensure(entity_f1_sets(&er, &empty) == 0.0 && entity_f1_sets(&empty, &er) == 0.0, || "one empty".into())?;
    let speakers = EntityExtractor::with_speakers(["Anna"]);
    ensure(!speakers.extract("Anna: we met Bob.").contains("anna"), || "speaker label counted".into())?;
    Ok("{Anna, Friday} vs {Anna, Friday, Budget}: p=1, r=2/3, F-1=0.8; empty-set rules hold".into())
}

// --- pipeline ---------------------------------------------------------------

fn pipeline(input: &Path, out: &Path, max_segment_tokens: usize, ks: &[usize]) -> Result<(), String> {
    let config = PipelineConfig { max_segment_tokens, output_dir: out.to_path_buf(), ..PipelineConfig::default() };
    let p = Pipeline::new(config).map_err(|e| e.to_string())?;
    p.run(input, None, None).map_err(|e| e.to_string())?;
    p.sweep_k(ks, None).map_err(|e| e.to_string())?;
    Ok(())
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../kas/tests/fixtures")
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    walkdir::WalkDir::new(dir)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file() && e.file_name() != "kas.log")
        .map(|e| (e.path().strip_prefix(dir).unwrap().to_path_buf(), fs::read(e.path()).unwrap()))
        .collect()
}

fn reproducibility() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = match qmsum_dir() {
        d if d.exists() => d,
        _ => fixtures().join("qmsum"),
    };
    let mut snaps = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        pipeline(&input, &out, 512, &[4, 8])?;
        snaps.push(snapshot(&out));
    }
    ensure(snaps[0] == snaps[1], || {
        let diff: Vec<_> = snaps[0].iter().filter(|(k, v)| snaps[1].get(*k) != Some(v)).map(|(k, _)| k.display().to_string()).collect();
        format!("files differ: {diff:?}")
    })?;
    Ok(format!("{} interchange files byte-identical across two runs on {}", snaps[0].len(), input.display()))
}

fn check_score(v: &Value, at: &str) -> Result<(), String> {
    for key in ["precision", "recall", "f1"] {
        let x = v[key].as_f64().ok_or_else(|| format!("{at}.{key} missing"))?;
        ensure((0.0..=1.0).contains(&x), || format!("{at}.{key} = {x}"))?;
    }
    Ok(())
}

fn sweep_harness() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    pipeline(&fixtures().join("qmsum"), tmp.path(), 30, &[4, 8, 12])?;
    let read = |p: &str| -> Result<Value, String> {
        serde_json::from_str(&fs::read_to_string(tmp.path().join(p)).map_err(|e| format!("{p}: {e}"))?).map_err(|e| e.to_string())
    };
    let table = read("sweep/sweep.json")?;
    let ks: Vec<u64> = table["rows"].as_array().ok_or("rows missing")?.iter().filter_map(|r| r["k"].as_u64()).collect();
    ensure(ks == [4, 8, 12], || format!("sweep rows {ks:?}"))?;
    for k in [4, 8, 12] {
        let at = format!("k={k}");
        let report = read(&format!("sweep/k{k}/report.json"))?;
        ensure(report["format"] == "kas-report" && report["fingerprint"].as_str().is_some_and(|f| f.len() == 16), || {
            format!("{at}: header fields")
        })?;
        let samples = report["samples"].as_array().ok_or(format!("{at}: samples missing"))?;
        ensure(!samples.is_empty() && report["count"].as_u64() == Some(samples.len() as u64), || format!("{at}: count"))?;
        for s in samples {
            ensure(s["meeting"].is_string() && s["query"].is_string(), || format!("{at}: sample keys"))?;
            for m in ["r1", "r2", "rl"] {
                check_score(&s[m], &format!("{at}.{m}"))?;
            }
            ensure(s["entity_f1"].as_f64().is_some_and(|x| (0.0..=1.0).contains(&x)), || format!("{at}: entity_f1"))?;
        }
        for m in ["r1", "r2", "rl"] {
            check_score(&report["corpus"][m], &format!("{at}.corpus.{m}"))?;
            let mean = samples.iter().map(|s| s[m]["f1"].as_f64().unwrap()).sum::<f64>() / samples.len() as f64;
            let corpus = report["corpus"][m]["f1"].as_f64().unwrap();
            ensure((mean - corpus).abs() < 1e-12, || format!("{at}: corpus {m} is not the sample mean"))?;
        }
    }
    Ok("sweep.json plus one schema-valid report for each k in {4, 8, 12}".into())
}

fn hash_compatibility() -> Outcome {
    let base = fixtures().join("golden");
    let v: Value = serde_json::from_str(&fs::read_to_string(base.join("texts.json")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let texts: Vec<&str> = v["texts"].as_array().unwrap().iter().map(|t| t.as_str().unwrap()).collect();
    let provider = FileStoreProvider::open(&base.join("store.jsonl")).map_err(|e| e.to_string())?;
    let vectors = provider.embed(&texts).map_err(|e| e.to_string())?;
    ensure(vectors.len() == 100 && vectors.iter().all(|v| v.dim() == 768), || "count or dim".into())?;
    Ok("100 golden texts resolve through an externally written 768-dim store".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("QMSum ingestion statistics", qmsum_statistics),
        ("segmentation invariants", segmentation_suite),
        ("knowledge score normalization", knowledge_score_norm),
        ("semantic score and selection properties", semantic_and_rank_properties),
        ("planted relevance and knowledge ablation", planted_relevance),
        ("ROUGE oracle equivalence", rouge_oracle),
        ("Entity F-1 worked examples", entity_examples),
        ("pipeline reproducibility", reproducibility),
        ("k-sweep reports", sweep_harness),
        ("vector store hash compatibility (secondary)", hash_compatibility),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
