mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use qtypology::fragments::{extract_fragments, FragmentConfig};
use qtypology::motifs::{MotifModel, MotifParams};
use qtypology::synthetic::{generate, SyntheticConfig};

fn params(min_support: usize) -> MotifParams {
    MotifParams {
        min_support,
        max_size: 4,
        p: 0.9,
    }
}

#[test]
fn example_one_has_five_fragments() {
    let start = Instant::now();
    let s = common::sentence("ex1:q:0", common::EXAMPLE_ONE);
    let set = extract_fragments(&s, &FragmentConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let got: BTreeSet<String> = set.fragments.iter().map(|f| f.canonical()).collect();
    let want: BTreeSet<String> = ["what", "what is", "going→*", "is←going", "going→do"].map(String::from).into();
    assert_eq!(got, want);
    assert!(elapsed.as_secs_f64() < 1.0);
}

#[test]
fn example_one_has_a_single_sink() {
    let sets = common::example_one_corpus();
    for n in [4, 6, 8] {
        let model = MotifModel::build(&sets, &params(n)).unwrap();
        let view = model.question_view(&sets[0]);
        let sinks: Vec<String> = view.sink_motifs.iter().map(|&m| model.motifs()[m].canonical(&model.vocab)).collect();
        assert_eq!(sinks, ["going→do|is←going|what is"], "min support {n}");
    }
}

#[test]
fn dag_invariants_on_example_corpus() {
    let sets = common::example_one_corpus();
    for n in [1, 4, 8, 20] {
        let bad = common::dag_violations(&sets, &params(n));
        assert!(bad.is_empty(), "min support {n}: {bad:?}");
    }
}

#[test]
fn dag_invariants_on_synthetic_corpus() {
    let syn = generate(&SyntheticConfig::default()).unwrap();
    let sets = common::question_fragment_sets(&syn.corpus);
    for (n, p) in [(15, 0.9), (5, 0.6), (40, 1.0)] {
        let bad = common::dag_violations(&sets, &MotifParams { min_support: n, max_size: 4, p });
        assert!(bad.is_empty(), "n={n} p={p}: {:?}", &bad[..bad.len().min(5)]);
    }
}
