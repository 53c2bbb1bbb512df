//! Knowledge triples: extraction, query filtering, per-segment counts and
//! phrase sets.
//!
//! The extractor is rule based. Each sentence is cut into fragments at
//! punctuation and coordinating conjunctions; a fragment yields a triple when
//! it has a noun-phrase subject, a verb group and a non-empty remainder.
//! Fragments without a subject reuse the previous one ("and sent it"), and
//! fragments without a verb extend the previous relation ("the budget and the
//! logo").

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::text::{normalize_apostrophes, split_sentences, strip_speaker, StopWords, TermNormalizer};
use crate::transcript::{Query, Segment, SegmentId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KnowledgeError {
    #[error("triple refers to unknown segment {0}")]
    UnknownSegment(SegmentId),
    #[error("phrase set for {expected} received a triple of {found}")]
    MixedSegments { expected: SegmentId, found: SegmentId },
    #[error("triple for {0} has an empty subject, relation or object")]
    EmptyField(SegmentId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeTriple {
    pub segment: SegmentId,
    pub subject: Vec<String>,
    pub relation: Vec<String>,
    pub object: Vec<String>,
    /// 0-based sentence index within the segment.
    pub sentence: usize,
}

impl KnowledgeTriple {
    /// Builds a triple from whitespace-separated field strings, as found in
    /// imported triple files.
    pub fn from_strings(
        segment: SegmentId,
        subject: &str,
        relation: &str,
        object: &str,
        sentence: usize,
    ) -> Result<Self, KnowledgeError> {
        let split = |s: &str| s.split_whitespace().map(ToString::to_string).collect::<Vec<_>>();
        let triple = Self {
            subject: split(subject),
            relation: split(relation),
            object: split(object),
            segment,
            sentence,
        };
        if triple.subject.is_empty() || triple.relation.is_empty() || triple.object.is_empty() {
            return Err(KnowledgeError::EmptyField(triple.segment));
        }
        Ok(triple)
    }

    /// All tokens: subject, then relation, then object.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.subject
            .iter()
            .chain(&self.relation)
            .chain(&self.object)
            .map(String::as_str)
    }

    pub fn subject_text(&self) -> String {
        self.subject.join(" ")
    }

    pub fn relation_text(&self) -> String {
        self.relation.join(" ")
    }

    pub fn object_text(&self) -> String {
        self.object.join(" ")
    }
}

/// Per-segment set of knowledge words, in first-occurrence order.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KnowledgePhraseSet {
    pub segment: SegmentId,
    pub phrases: Vec<String>,
}

impl KnowledgePhraseSet {
    pub fn empty(segment: SegmentId) -> Self {
        Self { segment, phrases: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }
}

// --- lexicon ---------------------------------------------------------------

const AUXILIARIES: &[&str] = &[
    "'d", "'ll", "'m", "'re", "'s", "'ve", "ain't", "am", "are", "aren't", "be", "been", "being",
    "can", "can't", "cannot", "could", "couldn't", "did", "didn't", "do", "does", "doesn't",
    "don't", "gonna", "gotta", "had", "hadn't", "has", "hasn't", "have", "haven't", "is", "isn't",
    "may", "might", "mightn't", "must", "mustn't", "needn't", "shall", "shan't", "should",
    "shouldn't", "wanna", "was", "wasn't", "were", "weren't", "will", "won't", "would",
    "wouldn't",
];

const VERB_BASES: &[&str] = &[
    "accept", "achieve", "adapt", "add", "adjust", "admit", "advise", "affect", "agree", "allow",
    "analyse", "analyze", "announce", "answer", "appear", "apply", "approve", "argue", "arrange",
    "ask", "assign", "assume", "attach", "attend", "attract", "avoid", "base", "become", "begin",
    "believe", "bring", "build", "buy", "calculate", "call", "cancel", "cause", "celebrate",
    "change", "check", "choose", "claim", "clarify", "close", "collect", "combine", "come",
    "communicate", "compare", "compete", "complain", "complete", "compute", "conclude", "confirm",
    "connect", "consider", "consist", "contain", "continue", "contribute", "control", "convince",
    "copy", "correct", "cost", "count", "cover", "create", "criticize", "cut", "deal", "decide",
    "define", "delay", "deliver", "demonstrate", "deny", "depend", "derive", "describe", "design",
    "detect", "develop", "disagree", "discuss", "distribute", "divide", "doubt", "download",
    "draw", "drink", "drive", "drop", "earn", "eat", "emerge", "emphasize", "enable", "encourage",
    "end", "enjoy", "ensure", "enter", "establish", "estimate", "evaluate", "examine", "exceed",
    "exist", "expect", "explain", "explore", "express", "extend", "fail", "fall", "feel", "figure",
    "fill", "finance", "find", "finish", "fit", "fix", "fly", "focus", "follow", "forget",
    "forgive", "fund", "gain", "gather", "generate", "get", "give", "go", "grow", "guarantee",
    "guess", "handle", "hang", "happen", "hate", "hear", "help", "hide", "hire", "hit", "hold",
    "hope", "identify", "ignore", "imagine", "implement", "imply", "impress", "improve", "include",
    "increase", "indicate", "inform", "insist", "install", "integrate", "intend", "interpret",
    "introduce", "invest", "involve", "join", "justify", "keep", "kick", "kill", "know", "lack",
    "last", "launch", "lead", "learn", "leave", "lend", "let", "lift", "like", "limit", "link",
    "listen", "load", "look", "lose", "love", "lower", "maintain", "make", "manage", "match",
    "matter", "mean", "measure", "meet", "mention", "miss", "modify", "monitor", "move", "need",
    "negotiate", "note", "notice", "notify", "obey", "observe", "obtain", "occur", "offer", "open",
    "operate", "oppose", "order", "organize", "outline", "own", "parse", "participate", "pass",
    "pay", "perform", "persuade", "pick", "plan", "play", "point", "postpone", "predict", "prefer",
    "prepare", "present", "prevent", "print", "prioritize", "proceed", "produce", "promise",
    "promote", "pronounce", "propose", "protect", "prove", "provide", "publish", "pull",
    "purchase", "push", "put", "qualify", "question", "quote", "raise", "rank", "rate", "reach",
    "read", "realize", "receive", "recognize", "recommend", "record", "recover", "reduce", "refer",
    "reflect", "register", "regret", "reject", "relate", "release", "rely", "remain", "remember",
    "remind", "remove", "rent", "repeat", "replace", "reply", "report", "represent", "request",
    "require", "rescue", "research", "resign", "resolve", "respect", "respond", "restrict",
    "retire", "return", "reveal", "review", "ride", "ring", "rise", "run", "satisfy", "save",
    "say", "schedule", "search", "see", "seek", "seem", "select", "sell", "send", "separate",
    "serve", "set", "settle", "share", "show", "shut", "sign", "simplify", "sing", "sit", "skip",
    "sleep", "slow", "smell", "solve", "sound", "speak", "specify", "spell", "spend", "split",
    "stand", "start", "state", "stay", "steal", "stick", "stop", "strike", "struggle", "study",
    "submit", "succeed", "suffer", "suggest", "suit", "summarize", "supply", "support", "suppose",
    "surprise", "survive", "swim", "take", "talk", "target", "teach", "tell", "tend", "test",
    "think", "throw", "tolerate", "track", "train", "transfer", "translate", "travel", "treat",
    "trigger", "trust", "try", "turn", "type", "underestimate", "understand", "unify", "update",
    "upgrade", "use", "vanish", "vary", "verify", "visit", "vote", "wait", "wake", "walk",
    "wander", "want", "warm", "warn", "wash", "watch", "wear", "weigh", "welcome", "win", "wish",
    "withdraw", "wonder", "work", "worry", "write",
];

const IRREGULAR_FORMS: &[&str] = &[
    "ate", "became", "began", "begun", "bought", "brought", "built", "came", "chose", "chosen",
    "done", "drew", "drawn", "drove", "fell", "felt", "forgot", "forgotten", "fought", "found",
    "gave", "given", "gone", "got", "gotten", "grew", "grown", "heard", "held", "hid", "kept",
    "knew", "known", "led", "left", "lost", "made", "meant", "met", "paid", "ran", "rose", "said",
    "sat", "saw", "seen", "sent", "shown", "sold", "spent", "spoke", "spoken", "stood",
    "taken", "taught", "thought", "threw", "thrown", "told", "took", "understood", "went",
    "won", "wrote", "written",
];

const VERB_GROUP_ADVERBS: &[&str] = &[
    "actually", "all", "already", "also", "always", "basically", "definitely", "just", "maybe",
    "never", "not", "now", "probably", "really", "still", "then", "certainly", "finally",
];

/// Words that cannot directly precede a verb; a candidate after one of these is
/// read as a noun ("the plan", "our design").
const NOUN_MARKERS: &[&str] = &[
    "a", "about", "an", "any", "at", "by", "each", "every", "for", "from", "her", "his", "in",
    "into", "its", "my", "no", "of", "on", "our", "some", "the", "their", "these", "this",
    "those", "with", "your",
];

const FILLERS: &[&str] = &[
    "ah", "alright", "hmm", "like", "mm", "mm-hmm", "oh", "ok", "okay", "right", "so", "uh",
    "uh-huh", "um", "well", "yeah", "yep", "yes",
];

const SUBJECT_BREAKERS: &[&str] = &[
    "although", "as", "because", "if", "since", "than", "that", "though", "unless", "when",
    "whether", "where", "which", "while", "who",
];

const CONJUNCTIONS: &[&str] = &["and", "but", "or", "plus"];

const CLITIC_HOSTS: &[&str] = &[
    "he", "here", "how", "i", "it", "let", "she", "that", "there", "they", "we", "what", "where",
    "who", "you",
];

const MAX_SUBJECT_TOKENS: usize = 6;

fn has(list: &[&str], w: &str) -> bool {
    list.contains(&w)
}

fn is_aux(w: &str) -> bool {
    has(AUXILIARIES, w)
}

fn is_verb_base(w: &str) -> bool {
    has(VERB_BASES, w)
}

/// Inflected or base forms of lexicon verbs.
fn lexical_verb(w: &str) -> bool {
    if is_verb_base(w) || has(IRREGULAR_FORMS, w) {
        return true;
    }
    let undouble = |stem: &str| {
        let b = stem.as_bytes();
        b.len() >= 2 && b[b.len() - 1] == b[b.len() - 2] && is_verb_base(&stem[..stem.len() - 1])
    };
    let with_e = |stem: &str| {
        let mut s = String::from(stem);
        s.push('e');
        is_verb_base(&s)
    };
    let with_y = |stem: &str| {
        let mut s = String::from(stem);
        s.push('y');
        is_verb_base(&s)
    };
    if let Some(stem) = w.strip_suffix("ies").or_else(|| w.strip_suffix("ied")) {
        if with_y(stem) {
            return true;
        }
    }
    if let Some(stem) = w.strip_suffix("ed") {
        if is_verb_base(stem) || with_e(stem) || undouble(stem) {
            return true;
        }
    }
    if let Some(stem) = w.strip_suffix("ing") {
        if is_verb_base(stem) || with_e(stem) || undouble(stem) {
            return true;
        }
    }
    if let Some(stem) = w.strip_suffix("es") {
        if is_verb_base(stem) {
            return true;
        }
    }
    if let Some(stem) = w.strip_suffix('s') {
        if is_verb_base(stem) {
            return true;
        }
    }
    false
}

fn is_gerund(w: &str) -> bool {
    w.len() > 4 && w.ends_with("ing")
}

// --- tokens ----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Punct,
}

impl Tok {
    fn word(&self) -> Option<&str> {
        match self {
            Tok::Word(w) => Some(w),
            Tok::Punct => None,
        }
    }
}

fn tokenize_sentence(sentence: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    let mut chars = sentence.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c.is_alphanumeric() {
            let mut end = i + c.len_utf8();
            while let Some(&(j, n)) = chars.peek() {
                if n.is_alphanumeric() || n == '-' {
                    end = j + n.len_utf8();
                    chars.next();
                } else if n == '\'' || n == '\u{2019}' {
                    // keep inner apostrophes only
                    let mut look = chars.clone();
                    look.next();
                    if look.peek().is_some_and(|(_, a)| a.is_alphanumeric()) {
                        end = j + n.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                } else {
                    break;
                }
            }
            let word = normalize_apostrophes(&sentence[i..end].to_lowercase());
            let word = word.trim_end_matches('-');
            push_word(&mut out, word);
        } else if !c.is_whitespace() {
            out.push(Tok::Punct);
        }
    }
    out
}

fn push_word(out: &mut Vec<Tok>, word: &str) {
    if let Some(pos) = word.find('\'') {
        let (host, clitic) = word.split_at(pos);
        if has(CLITIC_HOSTS, host) && matches!(clitic, "'s" | "'re" | "'ve" | "'ll" | "'d" | "'m") {
            out.push(Tok::Word(host.to_string()));
            out.push(Tok::Word(clitic.to_string()));
            return;
        }
    }
    out.push(Tok::Word(word.to_string()));
}

/// A run of words between clause boundaries, with how it was introduced.
struct Fragment {
    words: Vec<String>,
    after_boundary: bool,
}

fn fragments(tokens: &[Tok]) -> Vec<Fragment> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let mut after_boundary = false;
    for t in tokens {
        match t.word() {
            Some(w) if !has(CONJUNCTIONS, w) => cur.push(w.to_string()),
            _ => {
                if !cur.is_empty() {
                    out.push(Fragment { words: core::mem::take(&mut cur), after_boundary });
                }
                after_boundary = true;
            }
        }
    }
    if !cur.is_empty() {
        out.push(Fragment { words: cur, after_boundary });
    }
    out
}

fn strip_fillers(words: &[String]) -> &[String] {
    let mut start = 0;
    let mut end = words.len();
    while start < end && has(FILLERS, &words[start]) {
        start += 1;
    }
    while end > start && has(FILLERS, &words[end - 1]) {
        end -= 1;
    }
    &words[start..end]
}

fn verb_candidate(words: &[String], i: usize) -> bool {
    let w = words[i].as_str();
    let prev = i.checked_sub(1).map(|p| words[p].as_str());
    if is_aux(w) {
        return true;
    }
    if !lexical_verb(w) || is_gerund(w) {
        return false;
    }
    !prev.is_some_and(|p| has(NOUN_MARKERS, p) || p == "to")
}

/// End (exclusive) of the verb group starting at `start`.
fn verb_group_end(words: &[String], start: usize) -> usize {
    let mut end = start + 1;
    while end < words.len() {
        let w = words[end].as_str();
        if is_aux(w) || lexical_verb(w) || has(VERB_GROUP_ADVERBS, w) {
            end += 1;
        } else if w == "to" && words.get(end + 1).is_some_and(|n| is_verb_base(n)) {
            end += 2;
        } else {
            break;
        }
    }
    // trailing adverbs belong to the object side
    while end > start + 1 && has(VERB_GROUP_ADVERBS, &words[end - 1]) && !is_aux(&words[end - 1]) {
        end -= 1;
    }
    end
}

fn subject_before(words: &[String], verb: usize) -> Vec<String> {
    let mut start = verb;
    while start > 0 && verb - start < MAX_SUBJECT_TOKENS {
        let w = words[start - 1].as_str();
        if has(FILLERS, w) || has(SUBJECT_BREAKERS, w) {
            break;
        }
        start -= 1;
    }
    strip_fillers(&words[start..verb]).to_vec()
}

struct Clause {
    subject: Vec<String>,
    relation: Vec<String>,
}

fn extract_sentence(tokens: &[Tok], mut emit: impl FnMut(Vec<String>, Vec<String>, Vec<String>)) {
    let mut prev: Option<Clause> = None;
    for frag in fragments(tokens) {
        let words = strip_fillers(&frag.words);
        if words.is_empty() {
            continue;
        }
        let mut matched = false;
        for v in (0..words.len()).filter(|&i| verb_candidate(words, i)) {
            let mut subject = subject_before(words, v);
            if subject.is_empty() {
                match &prev {
                    Some(p) if v == 0 => subject = p.subject.clone(),
                    _ => continue,
                }
            }
            let group_end = verb_group_end(words, v);
            let relation = words[v..group_end].to_vec();
            let object = strip_fillers(&words[group_end..]).to_vec();
            if !object.is_empty() {
                emit(subject.clone(), relation.clone(), object);
            }
            prev = Some(Clause { subject, relation });
            matched = true;
            break;
        }
        if !matched && frag.after_boundary {
            if let Some(p) = &prev {
                emit(p.subject.clone(), p.relation.clone(), words.to_vec());
            }
        }
    }
}

/// Extracts knowledge triples from a segment, in sentence order.
pub fn extract_triples(segment: &Segment) -> Vec<KnowledgeTriple> {
    let mut out = Vec::new();
    let mut sentence_index = 0;
    for line in segment.text.lines() {
        for sentence in split_sentences(strip_speaker(line)) {
            let tokens = tokenize_sentence(sentence);
            extract_sentence(&tokens, |subject, relation, object| {
                out.push(KnowledgeTriple {
                    segment: segment.id.clone(),
                    subject,
                    relation,
                    object,
                    sentence: sentence_index,
                });
            });
            sentence_index += 1;
        }
    }
    out
}

/// Keeps triples that share at least one content word with the query.
pub fn filter_by_query(
    triples: &[KnowledgeTriple],
    query: &Query,
    normalizer: &TermNormalizer<'_>,
) -> Vec<KnowledgeTriple> {
    let query_terms = normalizer.term_set(query.text());
    if query_terms.is_empty() {
        return Vec::new();
    }
    triples
        .iter()
        .filter(|t| {
            t.tokens()
                .flat_map(crate::text::words)
                .filter_map(|w| normalizer.term(w))
                .any(|term| query_terms.contains(&term))
        })
        .cloned()
        .collect()
}

/// Number of triples per segment, in segment order.
pub fn triple_counts(
    filtered: &[KnowledgeTriple],
    segments: &[Segment],
) -> Result<Vec<usize>, KnowledgeError> {
    let position: BTreeMap<&SegmentId, usize> =
        segments.iter().enumerate().map(|(i, s)| (&s.id, i)).collect();
    let mut counts = alloc::vec![0; segments.len()];
    for t in filtered {
        let i = position
            .get(&t.segment)
            .ok_or_else(|| KnowledgeError::UnknownSegment(t.segment.clone()))?;
        counts[*i] += 1;
    }
    Ok(counts)
}

/// Merges the words of one segment's triples into a phrase set: lowercased,
/// stop words removed, deduplicated in first-occurrence order.
pub fn build_phrases(
    segment: SegmentId,
    triples: &[KnowledgeTriple],
    stop_words: &StopWords,
) -> Result<KnowledgePhraseSet, KnowledgeError> {
    let normalizer = TermNormalizer::new(stop_words, false);
    let mut seen = BTreeSet::new();
    let mut phrases = Vec::new();
    for t in triples {
        if t.segment != segment {
            return Err(KnowledgeError::MixedSegments { expected: segment, found: t.segment.clone() });
        }
        for word in t.tokens().flat_map(crate::text::words) {
            if let Some(term) = normalizer.term(word) {
                if seen.insert(term.clone()) {
                    phrases.push(term);
                }
            }
        }
    }
    Ok(KnowledgePhraseSet { segment, phrases })
}

/// Phrase sets for every segment (empty where no triple survived).
pub fn phrases_by_segment(
    filtered: &[KnowledgeTriple],
    segments: &[Segment],
    stop_words: &StopWords,
) -> Result<Vec<KnowledgePhraseSet>, KnowledgeError> {
    let mut grouped: BTreeMap<&SegmentId, Vec<KnowledgeTriple>> =
        segments.iter().map(|s| (&s.id, Vec::new())).collect();
    for t in filtered {
        grouped
            .get_mut(&t.segment)
            .ok_or_else(|| KnowledgeError::UnknownSegment(t.segment.clone()))?
            .push(t.clone());
    }
    segments
        .iter()
        .map(|s| build_phrases(s.id.clone(), &grouped[&s.id], stop_words))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transcript::QueryKind;
    use alloc::vec;

    fn seg(text: &str) -> Segment {
        Segment {
            id: SegmentId::new("m", 0),
            first_utterance: 0,
            last_utterance: 0,
            text: text.into(),
            token_count: text.split_whitespace().count(),
            fragment: None,
        }
    }

    fn spo(t: &KnowledgeTriple) -> (String, String, String) {
        (t.subject_text(), t.relation_text(), t.object_text())
    }

    fn triple(s: &str, r: &str, o: &str) -> KnowledgeTriple {
        KnowledgeTriple::from_strings(SegmentId::new("m", 0), s, r, o, 0).unwrap()
    }

    fn query(text: &str) -> Query {
        Query::new("q", "m", text, QueryKind::Specific, None).unwrap()
    }

    #[test]
    fn simple_declarative() {
        let t = extract_triples(&seg("John approved the budget."));
        assert_eq!(t.len(), 1);
        assert_eq!(spo(&t[0]), ("john".into(), "approved".into(), "the budget".into()));
        assert_eq!(t[0].sentence, 0);
    }

    #[test]
    fn empty_and_filler_text() {
        assert!(extract_triples(&seg("")).is_empty());
        assert!(extract_triples(&seg("Um, yeah.")).is_empty());
        assert!(extract_triples(&seg("Marketing budget. Team logo, colour budget.")).is_empty());
    }

    #[test]
    fn conjunctions_split_clauses_and_objects() {
        let t = extract_triples(&seg("John approved the budget and Mary rejected the logo."));
        let got: Vec<_> = t.iter().map(spo).collect();
        assert_eq!(
            got,
            vec![
                ("john".into(), "approved".into(), "the budget".into()),
                ("mary".into(), "rejected".into(), "the logo".into()),
            ]
        );
        let t = extract_triples(&seg("We discussed the budget and the logo."));
        let objects: Vec<_> = t.iter().map(KnowledgeTriple::object_text).collect();
        assert_eq!(objects, vec!["the budget", "the logo"]);
        assert!(t.iter().all(|x| x.subject_text() == "we" && x.relation_text() == "discussed"));
        let t = extract_triples(&seg("Anna wrote the report and sent it to Bob."));
        assert_eq!(spo(&t[1]), ("anna".into(), "sent".into(), "it to bob".into()));
    }

    #[test]
    fn speaker_labels_fillers_and_verb_groups() {
        let t = extract_triples(&seg(
            "Project Manager: Um, so we need to decide the colour.\nMarketing: I've already checked the prices!",
        ));
        let got: Vec<_> = t.iter().map(spo).collect();
        assert_eq!(
            got,
            vec![
                ("we".into(), "need to decide".into(), "the colour".into()),
                ("i".into(), "'ve already checked".into(), "the prices".into()),
            ]
        );
        assert_eq!(t[1].sentence, 1);
    }

    #[test]
    fn determiners_block_noun_readings() {
        let t = extract_triples(&seg("The design team met on Friday."));
        assert_eq!(spo(&t[0]), ("the design team".into(), "met".into(), "on friday".into()));
    }

    #[test]
    fn tokens_come_from_the_segment_text() {
        let text = "Industrial Designer: We're going to use the rubber case. It's cheaper, isn't it?";
        let lower = text.to_lowercase();
        for t in extract_triples(&seg(text)) {
            for tok in t.tokens() {
                assert!(lower.contains(tok), "{tok} not in text");
            }
        }
    }

    #[test]
    fn query_filter_examples() {
        let stop = StopWords::english();
        let n = TermNormalizer::new(&stop, false);
        let kept = filter_by_query(&[triple("john", "approved", "the budget")], &query("What did John say about the budget?"), &n);
        assert_eq!(kept.len(), 1);
        let dropped = filter_by_query(&[triple("team", "met", "on friday")], &query("What was decided about the logo?"), &n);
        assert!(dropped.is_empty());
        assert!(filter_by_query(&[], &query("anything"), &n).is_empty());
    }

    #[test]
    fn stemmed_filter_matches_inflections() {
        let stop = StopWords::english();
        let t = [triple("team", "discussed", "the meetings")];
        let q = query("Summarize the discussion of meeting schedules");
        assert_eq!(filter_by_query(&t, &q, &TermNormalizer::new(&stop, false)).len(), 0);
        assert_eq!(filter_by_query(&t, &q, &TermNormalizer::new(&stop, true)).len(), 1);
    }

    #[test]
    fn counts_per_segment() {
        let segs: Vec<Segment> = (0..3)
            .map(|i| Segment { id: SegmentId::new("m", i), ..seg("x") })
            .collect();
        let mut filtered = Vec::new();
        for (ordinal, n) in [(0, 3), (1, 4)] {
            for _ in 0..n {
                let mut t = triple("a", "b", "c");
                t.segment = SegmentId::new("m", ordinal);
                filtered.push(t);
            }
        }
        assert_eq!(triple_counts(&filtered, &segs).unwrap(), vec![3, 4, 0]);
        assert_eq!(triple_counts(&[], &segs).unwrap(), vec![0, 0, 0]);
        let one = vec![segs[0].clone()];
        let five = vec![triple("a", "b", "c"); 5];
        assert_eq!(triple_counts(&five, &one).unwrap(), vec![5]);
        let mut stray = triple("a", "b", "c");
        stray.segment = SegmentId::new("other", 0);
        assert_eq!(
            triple_counts(&[stray], &segs),
            Err(KnowledgeError::UnknownSegment(SegmentId::new("other", 0)))
        );
    }

    #[test]
    fn phrase_examples() {
        let stop = StopWords::english();
        let id = SegmentId::new("m", 0);
        let p = build_phrases(id.clone(), &[triple("john", "approved", "the budget")], &stop).unwrap();
        assert_eq!(p.phrases, vec!["john", "approved", "budget"]);
        assert!(build_phrases(id.clone(), &[], &stop).unwrap().is_empty());
        let custom = StopWords::from_words(["a", "is"]);
        let p = build_phrases(id.clone(), &[triple("a", "is", "b"), triple("b", "is", "c")], &custom).unwrap();
        assert_eq!(p.phrases, vec!["b", "c"]);
        let mut other = triple("x", "y", "z");
        other.segment = SegmentId::new("m", 1);
        assert!(matches!(build_phrases(id, &[other], &stop), Err(KnowledgeError::MixedSegments { .. })));
    }

    #[test]
    fn imported_triples_need_all_fields() {
        assert!(KnowledgeTriple::from_strings(SegmentId::new("m", 0), "a", " ", "c", 0).is_err());
    }
}
