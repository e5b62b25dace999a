//! Generator for a small parsed question-answer corpus with planted question
//! families, used for end-to-end checks and as a demo dataset.
//!
//! Each family has its own question phrasings and its own answer vocabulary,
//! so a working pipeline should recover the families as types.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Affiliation, Corpus, GovernmentPeriod, ParsedSentence, QAPair, SpeakerMeta, Timeline, Token};
use crate::error::Result;

/// `(word, tag, head, dep)`; words starting with `$` name a slot.
type TokenSpec = (&'static str, &'static str, usize, &'static str);

struct Template {
    tokens: &'static [TokenSpec],
}

const SLOTS: &[(&str, &[&str])] = &[
    ("$np", &["economy", "budget", "settlement", "scheme", "programme", "strategy"]),
    ("$good", &["success", "triumph", "model", "milestone"]),
    ("$feeling", &["pride", "delight", "admiration"]),
    ("$act", &["tackle", "address", "fix"]),
    ("$problem", &["crisis", "shortfall", "backlog", "chaos", "waste"]),
    ("$worse", &["doubled", "soared", "collapsed"]),
    ("$improve", &["improve", "strengthen", "support"]),
    ("$doc", &["report", "review", "figures", "guidance"]),
];

pub const FAMILY_NAMES: [&str; 3] = ["agreement", "condemnatory", "issue-update"];

const QUESTIONS: [&[Template]; 3] = [
    &[
        Template {
            tokens: &[
                ("Does", "VBZ", 5, "aux"),
                ("the", "DT", 4, "det"),
                ("Prime", "NNP", 4, "compound"),
                ("Minister", "NNP", 5, "nsubj"),
                ("agree", "VB", 0, "ROOT"),
                ("that", "IN", 9, "mark"),
                ("the", "DT", 8, "det"),
                ("$np", "NN", 9, "nsubj"),
                ("is", "VBZ", 5, "ccomp"),
                ("a", "DT", 11, "det"),
                ("$good", "NN", 9, "attr"),
                ("?", ".", 5, "punct"),
            ],
        },
        Template {
            tokens: &[
                ("Will", "MD", 6, "aux"),
                ("my", "PRP$", 5, "poss"),
                ("right", "JJ", 5, "amod"),
                ("honourable", "JJ", 5, "amod"),
                ("friend", "NN", 6, "nsubj"),
                ("join", "VB", 0, "ROOT"),
                ("me", "PRP", 6, "dobj"),
                ("in", "IN", 6, "prep"),
                ("welcoming", "VBG", 8, "pcomp"),
                ("the", "DT", 11, "det"),
                ("$np", "NN", 9, "dobj"),
                ("?", ".", 6, "punct"),
            ],
        },
        Template {
            tokens: &[
                ("Does", "VBZ", 4, "aux"),
                ("the", "DT", 3, "det"),
                ("minister", "NN", 4, "nsubj"),
                ("share", "VB", 0, "ROOT"),
                ("my", "PRP$", 6, "poss"),
                ("$feeling", "NN", 4, "dobj"),
                ("at", "IN", 4, "prep"),
                ("the", "DT", 9, "det"),
                ("$np", "NN", 7, "pobj"),
                ("?", ".", 4, "punct"),
            ],
        },
    ],
    &[
        Template {
            tokens: &[
                ("Why", "WRB", 5, "advmod"),
                ("has", "VBZ", 5, "aux"),
                ("the", "DT", 4, "det"),
                ("government", "NN", 5, "nsubj"),
                ("failed", "VBN", 0, "ROOT"),
                ("to", "TO", 7, "aux"),
                ("$act", "VB", 5, "xcomp"),
                ("the", "DT", 9, "det"),
                ("$problem", "NN", 7, "dobj"),
                ("?", ".", 5, "punct"),
            ],
        },
        Template {
            tokens: &[
                ("How", "WRB", 5, "advmod"),
                ("can", "MD", 5, "aux"),
                ("the", "DT", 4, "det"),
                ("minister", "NN", 5, "nsubj"),
                ("justify", "VB", 0, "ROOT"),
                ("the", "DT", 7, "det"),
                ("$problem", "NN", 5, "dobj"),
                ("?", ".", 5, "punct"),
            ],
        },
        Template {
            tokens: &[
                ("Is", "VBZ", 0, "ROOT"),
                ("it", "PRP", 1, "nsubj"),
                ("not", "RB", 1, "neg"),
                ("a", "DT", 5, "det"),
                ("disgrace", "NN", 1, "attr"),
                ("that", "IN", 9, "mark"),
                ("the", "DT", 8, "det"),
                ("$problem", "NN", 9, "nsubj"),
                ("$worse", "VBN", 1, "ccomp"),
                ("?", ".", 1, "punct"),
            ],
        },
    ],
    &[
        Template {
            tokens: &[
                ("What", "WDT", 2, "det"),
                ("steps", "NNS", 6, "dobj"),
                ("is", "VBZ", 6, "aux"),
                ("the", "DT", 5, "det"),
                ("minister", "NN", 6, "nsubj"),
                ("taking", "VBG", 0, "ROOT"),
                ("to", "TO", 8, "aux"),
                ("$improve", "VB", 6, "advcl"),
                ("the", "DT", 10, "det"),
                ("$np", "NN", 8, "dobj"),
                ("?", ".", 6, "punct"),
            ],
        },
        Template {
            tokens: &[
                ("When", "WRB", 5, "advmod"),
                ("will", "MD", 5, "aux"),
                ("the", "DT", 4, "det"),
                ("minister", "NN", 5, "nsubj"),
                ("publish", "VB", 0, "ROOT"),
                ("the", "DT", 7, "det"),
                ("$doc", "NN", 5, "dobj"),
                ("?", ".", 5, "punct"),
            ],
        },
        Template {
            tokens: &[
                ("What", "WDT", 2, "det"),
                ("assessment", "NN", 6, "dobj"),
                ("has", "VBZ", 6, "aux"),
                ("the", "DT", 5, "det"),
                ("minister", "NN", 6, "nsubj"),
                ("made", "VBN", 0, "ROOT"),
                ("of", "IN", 6, "prep"),
                ("the", "DT", 9, "det"),
                ("$np", "NN", 7, "pobj"),
                ("?", ".", 6, "punct"),
            ],
        },
    ],
];

const PREAMBLE: &[TokenSpec] = &[
    ("The", "DT", 2, "det"),
    ("$np", "NN", 4, "nsubj"),
    ("has", "VBZ", 4, "aux"),
    ("$worse", "VBN", 0, "ROOT"),
    (".", ".", 4, "punct"),
];

/// Answer sentence shape: `<opener> we <verb> the <noun> <adverb> .`
const ANSWER: &[TokenSpec] = &[
    ("$open", "RB", 3, "advmod"),
    ("we", "PRP", 3, "nsubj"),
    ("$verb", "VBP", 0, "ROOT"),
    ("the", "DT", 5, "det"),
    ("$noun", "NN", 3, "dobj"),
    ("$adv", "RB", 3, "advmod"),
    (".", ".", 3, "punct"),
];

struct AnswerVocab {
    open: &'static [&'static str],
    verb: &'static [&'static str],
    noun: &'static [&'static str],
    adv: &'static [&'static str],
}

const ANSWERS: [AnswerVocab; 3] = [
    AnswerVocab {
        open: &["Indeed", "Certainly", "Absolutely", "Clearly"],
        verb: &["welcome", "support", "applaud", "share", "commend"],
        noun: &["commitment", "progress", "investment", "achievement"],
        adv: &["wholeheartedly", "warmly", "fully", "entirely"],
    },
    AnswerVocab {
        open: &["Frankly", "Actually", "Sadly", "Again"],
        verb: &["reject", "dispute", "deny", "dismiss", "refute"],
        noun: &["claim", "accusation", "allegation", "smear"],
        adv: &["completely", "utterly", "flatly", "firmly"],
    },
    AnswerVocab {
        open: &["Currently", "Shortly", "Next", "Meanwhile"],
        verb: &["review", "publish", "consult", "assess", "monitor"],
        noun: &["data", "proposals", "evidence", "options"],
        adv: &["carefully", "soon", "regularly", "thoroughly"],
    },
];

const DEPARTMENTS: &[&str] = &["Treasury", "Health", "Education", "Transport", "Defence"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub pairs: usize,
    pub askers: usize,
    /// Chance that an answer sentence comes from another family's vocabulary.
    pub answer_noise: f64,
    /// Chance that an utterance carries a second question.
    pub multi_question_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            pairs: 510,
            askers: 48,
            answer_noise: 0.08,
            multi_question_rate: 0.05,
            seed: 20,
        }
    }
}

pub struct SyntheticCorpus {
    pub corpus: Corpus,
    /// Planted family index per pair id.
    pub labels: BTreeMap<String, usize>,
}

impl SyntheticCorpus {
    pub fn labels_tsv(&self) -> String {
        let mut out = String::from("pair_id\tfamily\n");
        for (id, &f) in &self.labels {
            out.push_str(&format!("{id}\t{}\n", FAMILY_NAMES[f]));
        }
        out
    }
}

fn d(y: i32, m: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, day).expect("valid date")
}

/// Three governments: Conservative until 1997-05-01, Labour until
/// 2010-05-06, Conservative-led after.
pub fn synthetic_timeline() -> Timeline {
    Timeline::new(vec![
        GovernmentPeriod {
            start: d(1979, 5, 3),
            end: Some(d(1997, 5, 1)),
            government: "Conservative".into(),
            opposition: "Labour".into(),
        },
        GovernmentPeriod {
            start: d(1997, 5, 1),
            end: Some(d(2010, 5, 6)),
            government: "Labour".into(),
            opposition: "Conservative".into(),
        },
        GovernmentPeriod {
            start: d(2010, 5, 6),
            end: None,
            government: "Conservative".into(),
            opposition: "Labour".into(),
        },
    ])
    .expect("static timeline is valid")
}

pub fn synthetic_elections() -> Vec<NaiveDate> {
    vec![d(1997, 5, 1), d(2010, 5, 6)]
}

fn pick<'a, R: Rng>(rng: &mut R, xs: &[&'a str]) -> &'a str {
    xs[rng.random_range(0..xs.len())]
}

fn render<R: Rng>(
    rng: &mut R,
    id: String,
    spec: &[TokenSpec],
    fill: &mut dyn FnMut(&mut R, &str) -> &'static str,
) -> ParsedSentence {
    let mut chosen: BTreeMap<&str, &str> = BTreeMap::new();
    let tokens: Vec<Token> = spec
        .iter()
        .enumerate()
        .map(|(i, &(word, tag, head, dep))| {
            let surface = if let Some(w) = chosen.get(word) {
                w.to_string()
            } else if word.starts_with('$') {
                let w = fill(rng, word);
                chosen.insert(word, w);
                w.to_string()
            } else {
                word.to_string()
            };
            Token {
                index: i + 1,
                lemma: surface.to_lowercase(),
                surface,
                pos_tag: tag.into(),
                head,
                dep_label: dep.into(),
            }
        })
        .collect();
    let mut text = String::new();
    for t in &tokens {
        if !text.is_empty() && !matches!(t.surface.as_str(), "?" | "." | ",") {
            text.push(' ');
        }
        text.push_str(&t.surface);
    }
    ParsedSentence::new(id, text, tokens).expect("templates are valid trees")
}

fn slot<R: Rng>(rng: &mut R, name: &str) -> &'static str {
    let (_, words) = SLOTS.iter().find(|(n, _)| *n == name).expect("known slot");
    pick(rng, words)
}

fn question<R: Rng>(rng: &mut R, id: String, family: usize) -> ParsedSentence {
    let templates = QUESTIONS[family];
    let t = &templates[rng.random_range(0..templates.len())];
    render(rng, id, t.tokens, &mut |r, name| slot(r, name))
}

fn answer<R: Rng>(rng: &mut R, id: String, family: usize) -> ParsedSentence {
    let vocab = &ANSWERS[family];
    render(rng, id, ANSWER, &mut |r, name| match name {
        "$open" => pick(r, vocab.open),
        "$verb" => pick(r, vocab.verb),
        "$noun" => pick(r, vocab.noun),
        _ => pick(r, vocab.adv),
    })
}

fn family_weights(aff: Option<Affiliation>) -> [f64; 3] {
    match aff {
        Some(Affiliation::Government) => [0.6, 0.1, 0.3],
        Some(Affiliation::Opposition) => [0.1, 0.6, 0.3],
        _ => [0.2, 0.3, 0.5],
    }
}

fn weighted<R: Rng>(rng: &mut R, w: &[f64; 3]) -> usize {
    let x: f64 = rng.random::<f64>() * w.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, &wi) in w.iter().enumerate() {
        acc += wi;
        if x < acc {
            return i;
        }
    }
    w.len() - 1
}

fn random_day<R: Rng>(rng: &mut R, from: NaiveDate, to: NaiveDate) -> NaiveDate {
    let span = (to - from).num_days().max(1);
    from + Duration::days(rng.random_range(0..span))
}

fn askers<R: Rng>(rng: &mut R, n: usize) -> Vec<SpeakerMeta> {
    (0..n)
        .map(|i| {
            let party = ["Conservative", "Labour", "Conservative", "Labour", "Liberal Democrat"][i % 5];
            let first_office_date = match i % 8 {
                0 | 5 => Some(d(1997, 5, 1)),
                3 => Some(d(2010, 5, 6)),
                _ => Some(random_day(rng, d(1979, 5, 3), d(1996, 12, 31))),
            };
            SpeakerMeta {
                speaker_id: format!("mp{i:03}"),
                party: party.into(),
                affiliation: None,
                first_office_date: if i == n - 1 { None } else { first_office_date },
                is_minister: Some(false),
                is_shadow: if i == n - 2 { None } else { Some(i % 9 == 4) },
            }
        })
        .collect()
}

/// Generates the corpus. Output depends only on `cfg`.
pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticCorpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let timeline = synthetic_timeline();
    let speakers = askers(&mut rng, cfg.askers.max(2));
    let windows = [
        (d(1995, 1, 1), d(1997, 5, 1)),
        (d(1997, 5, 1), d(2010, 5, 6)),
        (d(2010, 5, 6), d(2013, 1, 1)),
    ];
    let mut pairs = Vec::with_capacity(cfg.pairs);
    let mut labels = BTreeMap::new();
    for n in 0..cfg.pairs {
        let pair_id = format!("syn{n:04}");
        let asker = speakers[rng.random_range(0..speakers.len())].clone();
        let earliest = asker.first_office_date.unwrap_or(windows[0].0);
        let open: Vec<(NaiveDate, NaiveDate)> = windows
            .iter()
            .filter(|w| w.1 > earliest)
            .map(|&(a, b)| (a.max(earliest), b))
            .collect();
        let (from, to) = open[rng.random_range(0..open.len())];
        let date = random_day(&mut rng, from, to);
        let family = weighted(&mut rng, &family_weights(timeline.affiliation(&asker.party, date)));

        let mut qs = Vec::new();
        if rng.random_bool(0.3) {
            qs.push(render(&mut rng, format!("{pair_id}:q:0"), PREAMBLE, &mut |r, name| slot(r, name)));
        }
        let n_questions = if rng.random_bool(cfg.multi_question_rate) { 2 } else { 1 };
        for _ in 0..n_questions {
            let id = format!("{pair_id}:q:{}", qs.len());
            qs.push(question(&mut rng, id, family));
        }
        let n_answers = rng.random_range(2..=3);
        let ans: Vec<ParsedSentence> = (0..n_answers)
            .map(|i| {
                let f = if rng.random_bool(cfg.answer_noise) {
                    (family + rng.random_range(1..3)) % 3
                } else {
                    family
                };
                answer(&mut rng, format!("{pair_id}:a:{i}"), f)
            })
            .collect();

        let government = timeline.period_at(date).map_or("Conservative", |p| p.government.as_str());
        let department = pick(&mut rng, DEPARTMENTS);
        let join = |ss: &[ParsedSentence]| ss.iter().map(|s| s.raw_text.as_str()).collect::<Vec<_>>().join(" ");
        pairs.push(QAPair {
            pair_id: pair_id.clone(),
            date,
            question_text: join(&qs),
            answer_text: join(&ans),
            question_sentences: qs,
            answer_sentences: ans,
            asker,
            answerer: SpeakerMeta {
                speaker_id: format!("minister-{}", department.to_lowercase()),
                party: government.into(),
                affiliation: None,
                first_office_date: Some(d(1983, 6, 9)),
                is_minister: Some(true),
                is_shadow: Some(false),
            },
            department: Some(department.into()),
        });
        labels.insert(pair_id, family);
    }
    Ok(SyntheticCorpus {
        corpus: Corpus::from_pairs(pairs),
        labels,
    })
}

/// Fraction of items whose cluster's majority label matches their own label.
pub fn purity(clusters: &[(usize, usize)]) -> f64 {
    if clusters.is_empty() {
        return 0.0;
    }
    let mut table: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for &(cluster, label) in clusters {
        *table.entry(cluster).or_default().entry(label).or_default() += 1;
    }
    let majority: usize = table.values().map(|m| m.values().max().copied().unwrap_or(0)).sum();
    majority as f64 / clusters.len() as f64
}
