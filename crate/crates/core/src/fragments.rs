//! Lexico-syntactic fragments of a parsed sentence: the root, the
//! (root, child) arcs that do not lead into a noun phrase or pronoun, and the
//! initial unigram and bigram.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{ParsedSentence, Token};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fragment {
    InitialUnigram(String),
    InitialBigram(String, String),
    RootOnly(String),
    RootArc {
        root: String,
        child: String,
        child_precedes_root: bool,
    },
}

impl Fragment {
    pub fn arc(root: &str, child: &str, child_precedes_root: bool) -> Self {
        Fragment::RootArc {
            root: root.to_string(),
            child: child.to_string(),
            child_precedes_root,
        }
    }

    /// Arrow notation: `what`, `what is`, `going→*`, `is←going`, `going→do`.
    pub fn canonical(&self) -> String {
        match self {
            Fragment::InitialUnigram(w) => escape(w),
            Fragment::InitialBigram(a, b) => format!("{} {}", escape(a), escape(b)),
            Fragment::RootOnly(r) => format!("{}→*", escape(r)),
            Fragment::RootArc {
                root,
                child,
                child_precedes_root: true,
            } => format!("{}←{}", escape(child), escape(root)),
            Fragment::RootArc {
                root,
                child,
                child_precedes_root: false,
            } => format!("{}→{}", escape(root), escape(child)),
        }
    }
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

const SPECIAL: [char; 6] = ['\\', ' ', '→', '←', '*', '|'];

fn escape(word: &str) -> String {
    let mut out = String::with_capacity(word.len());
    for c in word.chars() {
        if SPECIAL.contains(&c) {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

#[derive(Debug, PartialEq)]
enum Lexeme {
    Word(String),
    Sep(char),
}

fn lex(s: &str) -> Option<Vec<Lexeme>> {
    let mut out = Vec::new();
    let mut word: Option<String> = None;
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            word.get_or_insert_with(String::new).push(chars.next()?);
        } else if SPECIAL.contains(&c) {
            if let Some(w) = word.take() {
                out.push(Lexeme::Word(w));
            }
            out.push(Lexeme::Sep(c));
        } else {
            word.get_or_insert_with(String::new).push(c);
        }
    }
    if let Some(w) = word {
        out.push(Lexeme::Word(w));
    }
    Some(out)
}

impl FromStr for Fragment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use Lexeme::{Sep, Word};
        let lexemes = lex(s).ok_or_else(|| Error::Corrupt(format!("not a canonical fragment: {s:?}")))?;
        Ok(match lexemes.as_slice() {
            [Word(w)] => Fragment::InitialUnigram(w.clone()),
            [Word(a), Sep(' '), Word(b)] => Fragment::InitialBigram(a.clone(), b.clone()),
            [Word(r), Sep('→'), Sep('*')] => Fragment::RootOnly(r.clone()),
            [Word(r), Sep('→'), Word(c)] => Fragment::arc(r, c, false),
            [Word(c), Sep('←'), Word(r)] => Fragment::arc(r, c, true),
            _ => return Err(Error::Corrupt(format!("not a canonical fragment: {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FragmentConfig {
    /// Arcs with these labels lead into noun phrases and are dropped.
    pub np_dep_labels: BTreeSet<String>,
    /// Children with these tags are pronouns and are dropped.
    pub pronoun_pos_tags: BTreeSet<String>,
    /// An NP whose subtree starts with one of these tags contributes a
    /// (root, wh-word) arc instead of being dropped entirely.
    pub wdt_pos_tags: BTreeSet<String>,
    /// Children attached with these labels are treated as roots of
    /// sub-questions and mined recursively.
    pub recursion_dep_labels: BTreeSet<String>,
    /// Arcs with these labels never produce fragments.
    pub skip_dep_labels: BTreeSet<String>,
    /// Use the LEMMA column instead of the lowercased surface form.
    pub use_lemma: bool,
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for FragmentConfig {
    fn default() -> Self {
        FragmentConfig {
            np_dep_labels: set(&["nsubj", "nsubjpass", "dobj", "iobj", "pobj", "attr"]),
            pronoun_pos_tags: set(&["PRP", "PRP$"]),
            wdt_pos_tags: set(&["WDT", "WP"]),
            recursion_dep_labels: set(&["conj", "parataxis", "ccomp", "advcl"]),
            skip_dep_labels: set(&["punct"]),
            use_lemma: false,
        }
    }
}

impl FragmentConfig {
    fn word(&self, t: &Token) -> String {
        if self.use_lemma && !t.lemma.is_empty() && t.lemma != "_" {
            t.lemma.to_lowercase()
        } else {
            t.surface.to_lowercase()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentSet {
    pub owner_id: String,
    pub fragments: BTreeSet<Fragment>,
}

/// True iff the arc `root → child` leads into a noun phrase or a pronoun.
pub fn is_filtered_child(_root: &Token, child: &Token, _sentence: &ParsedSentence, cfg: &FragmentConfig) -> bool {
    cfg.np_dep_labels.contains(&child.dep_label) || cfg.pronoun_pos_tags.contains(&child.pos_tag)
}

pub fn extract_fragments(sentence: &ParsedSentence, cfg: &FragmentConfig) -> Result<FragmentSet> {
    let root = sentence.root().ok_or(Error::EmptySentence)?;
    let mut out = BTreeSet::new();

    let first = &sentence.tokens[0];
    out.insert(Fragment::InitialUnigram(cfg.word(first)));
    if let Some(second) = sentence.tokens.get(1) {
        out.insert(Fragment::InitialBigram(cfg.word(first), cfg.word(second)));
    }

    let mut visited = HashSet::new();
    extract_from_root(sentence, root, cfg, &mut out, &mut visited);
    Ok(FragmentSet {
        owner_id: sentence.id.clone(),
        fragments: out,
    })
}

fn extract_from_root(
    sentence: &ParsedSentence,
    root: &Token,
    cfg: &FragmentConfig,
    out: &mut BTreeSet<Fragment>,
    visited: &mut HashSet<usize>,
) {
    if !visited.insert(root.index) {
        return;
    }
    let root_word = cfg.word(root);
    out.insert(Fragment::RootOnly(root_word.clone()));
    for child in sentence.children(root.index) {
        if cfg.skip_dep_labels.contains(&child.dep_label) {
            continue;
        }
        if is_filtered_child(root, child, sentence, cfg) {
            if cfg.np_dep_labels.contains(&child.dep_label) {
                let start = sentence.token(sentence.subtree_start(child.index));
                if cfg.wdt_pos_tags.contains(&start.pos_tag) {
                    out.insert(Fragment::arc(&root_word, &cfg.word(start), start.index < root.index));
                }
            }
        } else {
            out.insert(Fragment::arc(&root_word, &cfg.word(child), child.index < root.index));
        }
        if cfg.recursion_dep_labels.contains(&child.dep_label) {
            extract_from_root(sentence, child, cfg, out, visited);
        }
    }
}

/// Fragment dump lines: `sentence_id<TAB>canonical`.
pub fn fragments_tsv<'a>(sets: impl IntoIterator<Item = &'a FragmentSet>) -> String {
    let mut out = String::from("sentence_id\tfragment\n");
    for set in sets {
        for f in &set.fragments {
            out.push_str(&set.owner_id);
            out.push('\t');
            out.push_str(&f.canonical());
            out.push('\n');
        }
    }
    out
}

/// Parses a dump written by [`fragments_tsv`], keeping sentence order.
pub fn parse_fragments_tsv(input: &str) -> Result<Vec<FragmentSet>> {
    let mut sets: Vec<FragmentSet> = Vec::new();
    for (i, line) in input.lines().enumerate() {
        if i == 0 || line.is_empty() {
            continue;
        }
        let (id, canon) = line
            .split_once('\t')
            .ok_or_else(|| Error::Corrupt(format!("fragment dump line {}: missing tab", i + 1)))?;
        let frag: Fragment = canon.parse()?;
        match sets.last_mut() {
            Some(last) if last.owner_id == id => {
                last.fragments.insert(frag);
            }
            _ => sets.push(FragmentSet {
                owner_id: id.to_string(),
                fragments: BTreeSet::from([frag]),
            }),
        }
    }
    Ok(sets)
}
