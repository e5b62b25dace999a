mod common;

use qtypology::corpus::{filter_analysis_subset, load_corpus, load_corpus_from_str, FilterConfig, RecordErrorKind};
use qtypology::synthetic::{generate, synthetic_timeline, SyntheticConfig};

#[test]
fn synthetic_corpus_round_trips_through_files() {
    let syn = generate(&SyntheticConfig {
        pairs: 60,
        ..Default::default()
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (meta, parses) = (dir.path().join("m.jsonl"), dir.path().join("p.conllu"));
    syn.corpus.save(&meta, &parses).unwrap();
    let (loaded, report) = load_corpus(&meta, &parses).unwrap();
    assert!(report.errors.is_empty(), "{:?}", report.errors);
    assert_eq!(loaded.pairs(), syn.corpus.pairs());
    assert_eq!(loaded.metadata_jsonl(), syn.corpus.metadata_jsonl());
    assert_eq!(loaded.conllu(), syn.corpus.conllu());
}

#[test]
fn each_bad_record_is_reported_with_its_kind() {
    let ok = |id: &str| common::metadata_line(id, "2001-02-03", "mp1", "Labour");
    let meta = [
        ok("good"),
        ok("good"),
        "{not json".to_string(),
        common::metadata_line("baddate", "2001-13-40", "mp1", "Labour"),
        ok("noparse"),
        ok("statement"),
        ok("cyclic"),
    ]
    .join("\n");
    let statement = [("He", "PRP", 2, "nsubj"), ("acts", "VBZ", 0, "ROOT"), (".", ".", 2, "punct")];
    let cyclic = [("Will", "MD", 2, "aux"), ("he", "PRP", 1, "nsubj"), ("?", ".", 1, "punct")];
    let parses = [
        common::conllu_block("good:q:0", common::WILL_HE_ACT),
        common::conllu_block("good:a:0", &statement),
        common::conllu_block("stray:q:0", common::WILL_HE_ACT),
        common::conllu_block("statement:q:0", &statement),
        common::conllu_block("statement:a:0", &statement),
        common::conllu_block("cyclic:q:0", &cyclic),
        "# sent_id = broken:q:0\n1\tonly\tthree\n\n".to_string(),
    ]
    .concat();
    let (corpus, report) = load_corpus_from_str(&meta, &parses);
    assert_eq!(corpus.len(), 1, "{:?}", report.errors);
    assert!(corpus.get("good").is_some());
    for (kind, n) in [
        (RecordErrorKind::DuplicatePairId, 1),
        (RecordErrorKind::MalformedJson, 1),
        (RecordErrorKind::InvalidDate, 1),
        (RecordErrorKind::MissingParse, 1),
        (RecordErrorKind::NoQuestion, 1),
        (RecordErrorKind::OrphanParse, 1),
    ] {
        assert_eq!(report.count(kind.clone()), n, "{kind:?}: {:?}", report.errors);
    }
    assert!(report.count(RecordErrorKind::InvalidParse) >= 2, "{:?}", report.errors);
}

#[test]
fn analysis_filter_partitions_and_is_idempotent() {
    let mut syn = generate(&SyntheticConfig::default()).unwrap();
    syn.corpus.assign_affiliations(&synthetic_timeline());
    let rules = FilterConfig::default();
    let (subset, report) = filter_analysis_subset(&syn.corpus, &rules);
    assert_eq!(
        report.removed_multi_question + report.removed_missing_metadata + report.removed_shadow + report.retained,
        report.input
    );
    assert!(report.removed_multi_question > 0 && report.removed_shadow > 0);
    let (again, second) = filter_analysis_subset(&subset, &rules);
    assert_eq!(again.pairs(), subset.pairs());
    assert_eq!(second.retained, report.retained);
    let (all, none_removed) = filter_analysis_subset(&syn.corpus, &FilterConfig::none());
    assert_eq!(all.len(), syn.corpus.len());
    assert_eq!(none_removed.retained, none_removed.input);
}
