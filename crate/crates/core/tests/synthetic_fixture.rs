use std::fs;
use std::path::PathBuf;

use qtypology::corpus::load_corpus;
use qtypology::synthetic::{generate, SyntheticConfig};

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/synthetic")
}

/// The bundled files are exactly what the generator produces. Set
/// `QTYPE_UPDATE_FIXTURES=1` to rewrite them.
#[test]
fn bundled_fixture_matches_generator() {
    let syn = generate(&SyntheticConfig::default()).unwrap();
    let dir = fixture_dir();
    let files = [
        ("metadata.jsonl", syn.corpus.metadata_jsonl()),
        ("parses.conllu", syn.corpus.conllu()),
        ("labels.tsv", syn.labels_tsv()),
    ];
    if std::env::var_os("QTYPE_UPDATE_FIXTURES").is_some() {
        fs::create_dir_all(&dir).unwrap();
        for (name, text) in &files {
            fs::write(dir.join(name), text).unwrap();
        }
    }
    for (name, text) in &files {
        let on_disk = fs::read_to_string(dir.join(name)).unwrap();
        assert!(on_disk == *text, "{name} differs from the generator output");
    }
}

#[test]
fn bundled_fixture_loads_without_errors() {
    let dir = fixture_dir();
    let (corpus, report) = load_corpus(&dir.join("metadata.jsonl"), &dir.join("parses.conllu")).unwrap();
    assert!(report.errors.is_empty());
    assert_eq!(corpus.len(), SyntheticConfig::default().pairs);
}
