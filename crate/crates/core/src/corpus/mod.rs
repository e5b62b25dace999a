//! Question–answer corpus: loading, validation, affiliation lookup and the
//! analysis-subset filters.

pub mod conllu;
mod timeline;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use timeline::{Affiliation, GovernmentPeriod, Timeline};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub surface: String,
    pub lemma: String,
    pub pos_tag: String,
    /// 0 for the root, otherwise the 1-based index of the head token.
    pub head: usize,
    pub dep_label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSentence {
    /// `<pair_id>:q:<i>` or `<pair_id>:a:<i>`.
    pub id: String,
    pub tokens: Vec<Token>,
    pub is_question: bool,
    pub raw_text: String,
}

impl ParsedSentence {
    /// Builds a sentence, deriving `is_question` from the text and checking
    /// that the arcs form a single-rooted tree.
    pub fn new(id: impl Into<String>, raw_text: impl Into<String>, tokens: Vec<Token>) -> Result<Self> {
        let id = id.into();
        let raw_text = raw_text.into();
        validate_tree(&id, &tokens)?;
        Ok(ParsedSentence {
            is_question: raw_text.trim_end().ends_with('?'),
            id,
            tokens,
            raw_text,
        })
    }

    pub fn root(&self) -> Option<&Token> {
        self.tokens.iter().find(|t| t.head == 0)
    }

    /// Token at 1-based `index`.
    pub fn token(&self, index: usize) -> &Token {
        &self.tokens[index - 1]
    }

    pub fn children(&self, head: usize) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(move |t| t.head == head)
    }

    /// Smallest token index in the subtree rooted at `index`.
    pub fn subtree_start(&self, index: usize) -> usize {
        let mut best = index;
        let mut stack = vec![index];
        while let Some(h) = stack.pop() {
            for c in self.children(h) {
                best = best.min(c.index);
                stack.push(c.index);
            }
        }
        best
    }
}

fn validate_tree(id: &str, tokens: &[Token]) -> Result<()> {
    let invalid = |reason: String| Error::InvalidParse {
        sent_id: id.to_string(),
        reason,
    };
    let n = tokens.len();
    for (i, t) in tokens.iter().enumerate() {
        if t.index != i + 1 {
            return Err(invalid(format!("token ids must be 1..{n} in order")));
        }
        if t.head > n || t.head == t.index {
            return Err(invalid(format!("token {} has invalid head {}", t.index, t.head)));
        }
    }
    let roots = tokens.iter().filter(|t| t.head == 0).count();
    if n > 0 && roots != 1 {
        return Err(invalid(format!("expected exactly one root, found {roots}")));
    }
    // Walking up from every token must reach the root within n steps.
    for t in tokens {
        let mut cur = t.head;
        let mut steps = 0;
        while cur != 0 {
            steps += 1;
            if steps > n {
                return Err(invalid(format!("cycle through token {}", t.index)));
            }
            cur = tokens[cur - 1].head;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeakerMeta {
    pub speaker_id: String,
    pub party: String,
    /// Derived from `party` and the government timeline; never serialized.
    #[serde(skip)]
    pub affiliation: Option<Affiliation>,
    pub first_office_date: Option<NaiveDate>,
    pub is_minister: Option<bool>,
    pub is_shadow: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QAPair {
    pub pair_id: String,
    pub date: NaiveDate,
    pub question_text: String,
    pub answer_text: String,
    pub question_sentences: Vec<ParsedSentence>,
    pub answer_sentences: Vec<ParsedSentence>,
    pub asker: SpeakerMeta,
    pub answerer: SpeakerMeta,
    pub department: Option<String>,
}

impl QAPair {
    /// Whole years the asker had served when the question was asked.
    pub fn asker_tenure_years(&self) -> Option<u32> {
        let first = self.asker.first_office_date?;
        self.date.years_since(first)
    }

    pub fn question_count(&self) -> usize {
        self.question_sentences.iter().filter(|s| s.is_question).count()
    }
}

/// The sentences of an utterance that end in a question mark, in order.
pub fn question_sentences_of(pair: &QAPair) -> Vec<&ParsedSentence> {
    pair.question_sentences.iter().filter(|s| s.is_question).collect()
}

/// Metadata line as stored on disk.
#[derive(Debug, Serialize, Deserialize)]
struct MetadataRecord {
    pair_id: String,
    date: String,
    question_text: String,
    answer_text: String,
    asker: SpeakerMeta,
    answerer: SpeakerMeta,
    department: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordErrorKind {
    MalformedJson,
    InvalidDate,
    DuplicatePairId,
    OrphanParse,
    MissingParse,
    InvalidParse,
    NoQuestion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordError {
    pub kind: RecordErrorKind,
    /// Line number in the file the error was found in, if any.
    pub line: Option<usize>,
    pub id: Option<String>,
    pub message: String,
}

impl fmt::Display for RecordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind)?;
        if let Some(line) = self.line {
            write!(f, " (line {line})")?;
        }
        if let Some(id) = &self.id {
            write!(f, " [{id}]")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub errors: Vec<RecordError>,
}

impl LoadReport {
    pub fn count(&self, kind: RecordErrorKind) -> usize {
        self.errors.iter().filter(|e| e.kind == kind).count()
    }

    fn push(&mut self, kind: RecordErrorKind, line: Option<usize>, id: Option<&str>, message: impl Into<String>) {
        self.errors.push(RecordError {
            kind,
            line,
            id: id.map(str::to_string),
            message: message.into(),
        });
    }
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pairs: Vec<QAPair>,
    index: HashMap<String, usize>,
}

impl Corpus {
    /// Builds a corpus, ordering pairs by (date, pair_id). Later duplicates of
    /// a pair id are dropped.
    pub fn from_pairs(mut pairs: Vec<QAPair>) -> Self {
        pairs.sort_by(|a, b| (a.date, &a.pair_id).cmp(&(b.date, &b.pair_id)));
        pairs.dedup_by(|b, a| a.pair_id == b.pair_id);
        let index = pairs
            .iter()
            .enumerate()
            .map(|(i, p)| (p.pair_id.clone(), i))
            .collect();
        Corpus { pairs, index }
    }

    pub fn pairs(&self) -> &[QAPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, pair_id: &str) -> Option<&QAPair> {
        self.index.get(pair_id).map(|&i| &self.pairs[i])
    }

    pub fn position(&self, pair_id: &str) -> Option<usize> {
        self.index.get(pair_id).copied()
    }

    /// Fills in asker and answerer affiliations from the timeline.
    pub fn assign_affiliations(&mut self, timeline: &Timeline) {
        for pair in &mut self.pairs {
            pair.asker.affiliation = timeline.affiliation(&pair.asker.party, pair.date);
            pair.answerer.affiliation = timeline.affiliation(&pair.answerer.party, pair.date);
        }
    }

    /// Canonical metadata lines, one JSON object per pair.
    pub fn metadata_jsonl(&self) -> String {
        let mut out = String::new();
        for p in &self.pairs {
            let rec = MetadataRecord {
                pair_id: p.pair_id.clone(),
                date: p.date.format("%Y-%m-%d").to_string(),
                question_text: p.question_text.clone(),
                answer_text: p.answer_text.clone(),
                asker: p.asker.clone(),
                answerer: p.answerer.clone(),
                department: p.department.clone(),
            };
            out.push_str(&serde_json::to_string(&rec).expect("metadata serializes"));
            out.push('\n');
        }
        out
    }

    pub fn conllu(&self) -> String {
        let mut out = String::new();
        for p in &self.pairs {
            for s in p.question_sentences.iter().chain(&p.answer_sentences) {
                conllu::write_sentence(&mut out, s);
            }
        }
        out
    }

    pub fn save(&self, metadata_path: &Path, parses_path: &Path) -> Result<()> {
        fs::write(metadata_path, self.metadata_jsonl()).map_err(|e| Error::io(metadata_path, e))?;
        fs::write(parses_path, self.conllu()).map_err(|e| Error::io(parses_path, e))?;
        Ok(())
    }
}

/// Loads and validates a corpus from a metadata JSONL file and a CoNLL-U file.
/// Invalid records are reported, not silently dropped.
pub fn load_corpus(metadata_path: &Path, parses_path: &Path) -> Result<(Corpus, LoadReport)> {
    let meta = fs::read_to_string(metadata_path).map_err(|e| Error::io(metadata_path, e))?;
    let parses = fs::read_to_string(parses_path).map_err(|e| Error::io(parses_path, e))?;
    Ok(load_corpus_from_str(&meta, &parses))
}

pub fn load_corpus_from_str(metadata: &str, parses: &str) -> (Corpus, LoadReport) {
    let mut report = LoadReport::default();
    let mut records: BTreeMap<String, (usize, MetadataRecord, NaiveDate)> = BTreeMap::new();

    for (i, line) in metadata.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: MetadataRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                report.push(RecordErrorKind::MalformedJson, Some(lineno), None, e.to_string());
                continue;
            }
        };
        let date = match NaiveDate::parse_from_str(&rec.date, "%Y-%m-%d") {
            Ok(d) => d,
            Err(e) => {
                report.push(
                    RecordErrorKind::InvalidDate,
                    Some(lineno),
                    Some(&rec.pair_id),
                    format!("{:?}: {e}", rec.date),
                );
                continue;
            }
        };
        if records.contains_key(&rec.pair_id) {
            report.push(
                RecordErrorKind::DuplicatePairId,
                Some(lineno),
                Some(&rec.pair_id),
                "pair id already seen",
            );
            continue;
        }
        records.insert(rec.pair_id.clone(), (lineno, rec, date));
    }

    // pair_id -> (question sentences by index, answer sentences by index)
    type Sides = (BTreeMap<usize, ParsedSentence>, BTreeMap<usize, ParsedSentence>);
    let mut sentences: HashMap<String, Sides> = HashMap::new();
    let mut invalid_pairs: HashMap<String, String> = HashMap::new();

    let (blocks, block_errors) = conllu::read_blocks(parses);
    for e in block_errors {
        report.push(RecordErrorKind::InvalidParse, Some(e.line), None, e.reason);
    }
    for block in blocks {
        let Some(sent_id) = block.sent_id.clone() else {
            report.push(RecordErrorKind::OrphanParse, Some(block.line), None, "block has no sent_id");
            continue;
        };
        let Some((pair_id, side, idx)) = split_sent_id(&sent_id) else {
            report.push(
                RecordErrorKind::OrphanParse,
                Some(block.line),
                Some(&sent_id),
                "sent_id is not of the form <pair_id>:q|a:<i>",
            );
            continue;
        };
        if !records.contains_key(pair_id) {
            report.push(
                RecordErrorKind::OrphanParse,
                Some(block.line),
                Some(&sent_id),
                "no metadata record for this pair id",
            );
            continue;
        }
        let text = block.text.clone().unwrap_or_else(|| {
            block
                .tokens
                .iter()
                .map(|t| t.surface.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        });
        match ParsedSentence::new(sent_id.clone(), text, block.tokens) {
            Ok(s) => {
                let entry = sentences.entry(pair_id.to_string()).or_default();
                let map = if side == 'q' { &mut entry.0 } else { &mut entry.1 };
                map.insert(idx, s);
            }
            Err(e) => {
                report.push(RecordErrorKind::InvalidParse, Some(block.line), Some(&sent_id), e.to_string());
                invalid_pairs.insert(pair_id.to_string(), sent_id.clone());
            }
        }
    }

    let mut pairs = Vec::with_capacity(records.len());
    for (pair_id, (lineno, rec, date)) in records {
        if invalid_pairs.contains_key(&pair_id) {
            continue;
        }
        let (qs, ans) = sentences.remove(&pair_id).unwrap_or_default();
        let contiguous = |m: &BTreeMap<usize, ParsedSentence>| m.keys().copied().eq(0..m.len());
        if qs.is_empty() || !contiguous(&qs) {
            report.push(
                RecordErrorKind::MissingParse,
                Some(lineno),
                Some(&pair_id),
                "question parses missing or non-contiguous",
            );
            continue;
        }
        if (!rec.answer_text.trim().is_empty() && ans.is_empty()) || !contiguous(&ans) {
            report.push(
                RecordErrorKind::MissingParse,
                Some(lineno),
                Some(&pair_id),
                "answer parses missing or non-contiguous",
            );
            continue;
        }
        let question_sentences: Vec<ParsedSentence> = qs.into_values().collect();
        if !question_sentences.iter().any(|s| s.is_question) {
            report.push(
                RecordErrorKind::NoQuestion,
                Some(lineno),
                Some(&pair_id),
                "no sentence ends with a question mark",
            );
            continue;
        }
        pairs.push(QAPair {
            pair_id,
            date,
            question_text: rec.question_text,
            answer_text: rec.answer_text,
            question_sentences,
            answer_sentences: ans.into_values().collect(),
            asker: rec.asker,
            answerer: rec.answerer,
            department: rec.department,
        });
    }
    (Corpus::from_pairs(pairs), report)
}

fn split_sent_id(sent_id: &str) -> Option<(&str, char, usize)> {
    let (rest, idx) = sent_id.rsplit_once(':')?;
    let (pair_id, side) = rest.rsplit_once(':')?;
    let side = match side {
        "q" => 'q',
        "a" => 'a',
        _ => return None,
    };
    Some((pair_id, side, idx.parse().ok()?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub single_question_only: bool,
    pub require_metadata: bool,
    pub exclude_shadow: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            single_question_only: true,
            require_metadata: true,
            exclude_shadow: true,
        }
    }
}

impl FilterConfig {
    pub fn none() -> Self {
        FilterConfig {
            single_question_only: false,
            require_metadata: false,
            exclude_shadow: false,
        }
    }
}

/// Per-rule removal counts. Rules are applied in order and a pair is counted
/// against the first rule it fails, so the counts partition the input.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub input: usize,
    pub removed_multi_question: usize,
    pub removed_missing_metadata: usize,
    pub removed_shadow: usize,
    pub retained: usize,
}

fn has_metadata(p: &QAPair) -> bool {
    p.asker.affiliation.is_some()
        && p.answerer.affiliation.is_some()
        && p.asker.is_minister.is_some()
        && p.answerer.is_minister.is_some()
}

/// Restricts the corpus to the analysis subset. Affiliations must already be
/// assigned for `require_metadata` to keep anything.
pub fn filter_analysis_subset(corpus: &Corpus, rules: &FilterConfig) -> (Corpus, FilterReport) {
    let mut report = FilterReport {
        input: corpus.len(),
        ..Default::default()
    };
    let mut kept = Vec::new();
    for p in corpus.pairs() {
        if rules.single_question_only && p.question_count() != 1 {
            report.removed_multi_question += 1;
        } else if rules.require_metadata && !has_metadata(p) {
            report.removed_missing_metadata += 1;
        } else if rules.exclude_shadow && p.asker.is_shadow != Some(false) {
            report.removed_shadow += 1;
        } else {
            kept.push(p.clone());
        }
    }
    report.retained = kept.len();
    (Corpus::from_pairs(kept), report)
}
