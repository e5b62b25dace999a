//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qtypology::corpus::{ParsedSentence, Token};
use qtypology::fragments::{extract_fragments, Fragment, FragmentConfig, FragmentSet};

/// `(surface, tag, head, dep)` per token.
pub type Rows = [(&'static str, &'static str, usize, &'static str)];

/// Builds a sentence from its token rows.
pub fn sentence(id: &str, rows: &Rows) -> ParsedSentence {
    let tokens = rows
        .iter()
        .enumerate()
        .map(|(i, &(w, tag, head, dep))| Token {
            index: i + 1,
            surface: w.into(),
            lemma: w.to_lowercase(),
            pos_tag: tag.into(),
            head,
            dep_label: dep.into(),
        })
        .collect::<Vec<_>>();
    let text = rows.iter().map(|r| r.0).collect::<Vec<_>>().join(" ");
    ParsedSentence::new(id, text, tokens).unwrap()
}

/// "What is the minister going to do about it?"
pub const EXAMPLE_ONE: &Rows = &[
    ("What", "WP", 7, "dobj"),
    ("is", "VBZ", 5, "aux"),
    ("the", "DT", 4, "det"),
    ("minister", "NN", 5, "nsubj"),
    ("going", "VBG", 0, "ROOT"),
    ("to", "TO", 7, "aux"),
    ("do", "VB", 5, "xcomp"),
    ("about", "IN", 7, "prep"),
    ("it", "PRP", 8, "pobj"),
    ("?", ".", 5, "punct"),
];

/// "What exactly is he going to do?"
const WHAT_EXACTLY: &Rows = &[
    ("What", "WP", 7, "dobj"),
    ("exactly", "RB", 5, "advmod"),
    ("is", "VBZ", 5, "aux"),
    ("he", "PRP", 5, "nsubj"),
    ("going", "VBG", 0, "ROOT"),
    ("to", "TO", 7, "aux"),
    ("do", "VB", 5, "xcomp"),
    ("?", ".", 5, "punct"),
];

/// "When is he going to act?"
const WHEN_ACT: &Rows = &[
    ("When", "WRB", 4, "advmod"),
    ("is", "VBZ", 4, "aux"),
    ("he", "PRP", 4, "nsubj"),
    ("going", "VBG", 0, "ROOT"),
    ("to", "TO", 6, "aux"),
    ("act", "VB", 4, "xcomp"),
    ("?", ".", 4, "punct"),
];

/// "What is the problem and when are we going to do something about it?"
const PROBLEM_AND_WHEN: &Rows = &[
    ("What", "WP", 2, "attr"),
    ("is", "VBZ", 0, "ROOT"),
    ("the", "DT", 4, "det"),
    ("problem", "NN", 2, "nsubj"),
    ("and", "CC", 2, "cc"),
    ("when", "WRB", 9, "advmod"),
    ("are", "VBP", 9, "aux"),
    ("we", "PRP", 9, "nsubj"),
    ("going", "VBG", 2, "conj"),
    ("to", "TO", 11, "aux"),
    ("do", "VB", 9, "xcomp"),
    ("something", "NN", 11, "dobj"),
    ("about", "IN", 11, "prep"),
    ("it", "PRP", 13, "pobj"),
    ("?", ".", 2, "punct"),
];

/// "What is he going to say?"
const WHAT_SAY: &Rows = &[
    ("What", "WP", 6, "dobj"),
    ("is", "VBZ", 4, "aux"),
    ("he", "PRP", 4, "nsubj"),
    ("going", "VBG", 0, "ROOT"),
    ("to", "TO", 6, "aux"),
    ("say", "VB", 4, "xcomp"),
    ("?", ".", 4, "punct"),
];

/// "What is the point?"
const WHAT_POINT: &Rows = &[
    ("What", "WP", 2, "attr"),
    ("is", "VBZ", 0, "ROOT"),
    ("the", "DT", 4, "det"),
    ("point", "NN", 2, "nsubj"),
    ("?", ".", 2, "punct"),
];

/// Question sentences around example (1): it and five related phrasings,
/// repeated so that the interesting fragment combinations are frequent.
pub fn example_one_corpus() -> Vec<FragmentSet> {
    let cfg = FragmentConfig::default();
    let families: [(&Rows, usize); 6] = [
        (EXAMPLE_ONE, 20),
        (WHAT_EXACTLY, 8),
        (WHEN_ACT, 8),
        (PROBLEM_AND_WHEN, 6),
        (WHAT_SAY, 6),
        (WHAT_POINT, 8),
    ];
    let mut out = Vec::new();
    for (f, (rows, copies)) in families.iter().enumerate() {
        for c in 0..*copies {
            let s = sentence(&format!("p{f}_{c}:q:0"), rows);
            out.push(extract_fragments(&s, &cfg).unwrap());
        }
    }
    out
}

/// A random mining instance: `(transactions, universe, min_support, max_size)`.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<Vec<u32>>, u32, usize, usize) {
    let universe = rng.random_range(1..=12u32);
    let n = rng.random_range(0..=200usize);
    let density = rng.random_range(0.05..0.7);
    let transactions = (0..n)
        .map(|_| (0..universe).filter(|_| rng.random_bool(density)).collect())
        .collect();
    let min_support = rng.random_range(1..=(n / 3).max(1));
    let max_size = rng.random_range(1..=6usize);
    (transactions, universe, min_support, max_size)
}

/// Every itemset with support at least `min_support` and at most `max_size`
/// items, by testing every subset of the universe against every transaction.
pub fn brute_force_itemsets(
    transactions: &[Vec<u32>],
    universe: u32,
    min_support: usize,
    max_size: usize,
) -> BTreeMap<Vec<u32>, usize> {
    let masks: Vec<u32> = transactions.iter().map(|t| t.iter().fold(0, |m, &i| m | (1 << i))).collect();
    let mut out = BTreeMap::new();
    for subset in 1u32..(1 << universe) {
        if subset.count_ones() as usize > max_size {
            continue;
        }
        let support = masks.iter().filter(|&&m| m & subset == subset).count();
        if support >= min_support.max(1) {
            let items = (0..universe).filter(|i| subset & (1 << i) != 0).collect();
            out.insert(items, support);
        }
    }
    out
}

/// Dense reference factorization, singular values in non-increasing order.
pub struct DenseSvd {
    pub u: nalgebra::DMatrix<f64>,
    pub s: Vec<f64>,
    pub v: nalgebra::DMatrix<f64>,
}

pub fn dense_svd(a: &qtypology::latent::DenseMatrix) -> DenseSvd {
    let m = nalgebra::DMatrix::from_row_slice(a.rows, a.cols, &a.data);
    let svd = m.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u = nalgebra::DMatrix::from_columns(&order.iter().map(|&i| u.column(i).into_owned()).collect::<Vec<_>>());
    let v = nalgebra::DMatrix::from_columns(&order.iter().map(|&i| vt.row(i).transpose()).collect::<Vec<_>>());
    DenseSvd { u, s, v }
}

/// Largest entrywise deviation between the truncated factorization of `a`
/// (and the projection of `q` through it) and the dense reference, after
/// matching each component's sign.
pub fn svd_deviation(a: &qtypology::latent::DenseMatrix, q: &qtypology::latent::DenseMatrix, d: usize, seed: u64) -> Result<f64, String> {
    use qtypology::latent::{project_rows_raw, LatentSpace, SparseMatrix};

    let mut sparse = SparseMatrix::from_dense(a);
    sparse.row_labels = (0..a.rows).map(|i| format!("r{i}")).collect();
    sparse.col_labels = (0..a.cols).map(|j| format!("c{j}")).collect();
    let space = LatentSpace::fit(&sparse, d, seed).map_err(|e| e.to_string())?;
    let oracle = dense_svd(a);
    let r = space.rank();
    let smax = oracle.s[0];
    let expected_rank = oracle.s.iter().take(d).filter(|&&x| x > 1e-10 * smax).count();
    if r != expected_rank {
        return Err(format!("rank {r}, oracle {expected_rank}"));
    }

    let mut worst: f64 = 0.0;
    let mut signs = Vec::with_capacity(r);
    for k in 0..r {
        worst = worst.max((space.s[k] - oracle.s[k]).abs());
        let dot: f64 = (0..a.rows).map(|i| space.u.get(i, k) * oracle.u[(i, k)]).sum();
        let sign = if dot < 0.0 { -1.0 } else { 1.0 };
        signs.push(sign);
        for i in 0..a.rows {
            worst = worst.max((space.u.get(i, k) - sign * oracle.u[(i, k)]).abs());
        }
        for j in 0..a.cols {
            worst = worst.max((space.v.get(j, k) - sign * oracle.v[(j, k)]).abs());
        }
    }

    let mut qs = SparseMatrix::from_dense(q);
    qs.row_labels = (0..q.rows).map(|i| format!("m{i}")).collect();
    qs.col_labels = sparse.col_labels.clone();
    let projected = project_rows_raw(&qs, &space).map_err(|e| e.to_string())?;
    for i in 0..q.rows {
        for k in 0..r {
            let expected: f64 = (0..q.cols).map(|j| q.get(i, j) * signs[k] * oracle.v[(j, k)]).sum::<f64>() / oracle.s[k];
            worst = worst.max((projected.get(i, k) - expected).abs());
        }
    }
    Ok(worst)
}

/// Midranks of `values`, computed by counting.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&x| {
            let below = values.iter().filter(|&&y| y < x).count() as f64;
            let equal = values.iter().filter(|&&y| y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Two-sided signed-rank p by visiting all sign patterns of the nonzero
/// differences. With `pratt`, zero differences take part in the ranking.
pub fn wilcoxon_enumerated(before: &[f64], after: &[f64], pratt: bool) -> (f64, f64) {
    let diffs: Vec<f64> = before.iter().zip(after).map(|(b, a)| a - b).collect();
    let ranked: Vec<f64> = if pratt {
        diffs.clone()
    } else {
        diffs.iter().copied().filter(|d| *d != 0.0).collect()
    };
    let ranks = midranks(&ranked.iter().map(|d| d.abs()).collect::<Vec<_>>());
    let kept: Vec<(f64, f64)> = ranked.iter().zip(&ranks).filter(|(d, _)| **d != 0.0).map(|(d, r)| (*d, *r)).collect();
    let observed: f64 = kept.iter().filter(|(d, _)| *d > 0.0).map(|(_, r)| r).sum::<f64>() + 0.0;
    let total: f64 = kept.iter().map(|(_, r)| r).sum();
    let n = kept.len();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| kept[i].1).sum();
        if w <= observed {
            le += 1;
        }
        if w >= observed {
            ge += 1;
        }
    }
    let p = ((2 * le.min(ge)) as f64 / (1u64 << n) as f64).min(1.0);
    (observed.min(total - observed), p)
}

/// Two-sided Mann-Whitney p by visiting every split of the pooled sample.
/// `U` is counted pairwise.
pub fn mann_whitney_enumerated(x: &[f64], y: &[f64]) -> (f64, f64) {
    let u_of = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .map(|&p| b.iter().map(|&q| if p > q { 1.0 } else if p == q { 0.5 } else { 0.0 }).sum::<f64>())
            .sum()
    };
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let (n1, n) = (x.len(), pooled.len());
    let centre = (x.len() * y.len()) as f64 / 2.0;
    let observed = u_of(x, y);
    let (mut extreme, mut all) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let a: Vec<f64> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| pooled[i]).collect();
        let b: Vec<f64> = (0..n).filter(|i| mask & (1 << i) == 0).map(|i| pooled[i]).collect();
        all += 1;
        if (u_of(&a, &b) - centre).abs() >= (observed - centre).abs() {
            extreme += 1;
        }
    }
    (observed, extreme as f64 / all as f64)
}

/// Two-sided binomial p for `p0 = num / den` in exact integer arithmetic.
pub fn binomial_enumerated(k: u64, n: u64, num: u64, den: u64) -> f64 {
    let choose = |n: u64, r: u64| -> u128 { (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128) };
    let weight = |i: u64| choose(n, i) * (num as u128).pow(i as u32) * ((den - num) as u128).pow((n - i) as u32);
    let at_k = weight(k);
    let extreme: u128 = (0..=n).map(weight).filter(|&w| w <= at_k).sum();
    (extreme as f64 / (den as u128).pow(n as u32) as f64).min(1.0)
}

/// Smallest within-cluster sum of squares over every assignment of the rows
/// of `points` to `k` nonempty clusters.
pub fn optimal_inertia(points: &[Vec<f64>], k: usize) -> f64 {
    let n = points.len();
    let dim = points[0].len();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        if counts.iter().all(|&c| c > 0) {
            let inertia: f64 = points
                .iter()
                .zip(&labels)
                .map(|(p, &l)| p.iter().zip(&sums[l]).map(|(x, s)| (x - s / counts[l] as f64).powi(2)).sum::<f64>())
                .sum();
            best = best.min(inertia);
        }
        // Odometer over labels; the first point is pinned to cluster 0.
        let mut i = n - 1;
        loop {
            if i == 0 {
                return best;
            }
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i -= 1;
        }
    }
}

/// A random `rows × cols` matrix with entries in `[0, 1)`, each kept with
/// probability `density`.
pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> qtypology::latent::DenseMatrix {
    let data = (0..rows * cols)
        .map(|_| if rng.random_bool(density) { rng.random::<f64>() } else { 0.0 })
        .collect();
    qtypology::latent::DenseMatrix { rows, cols, data }
}

/// Worst deviation from the dense SVD reference over `count` random
/// fixtures of at most 50 × 50.
pub fn svd_fixture_sweep(count: usize, seed: u64) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for case in 0..count {
        let rows = rng.random_range(2..=50);
        let cols = rng.random_range(2..=50);
        let density = rng.random_range(0.2..=1.0);
        let a = random_matrix(&mut rng, rows, cols, density);
        let d = rng.random_range(1..=rows.min(cols).min(25));
        let motifs = rng.random_range(1..=20);
        let q = random_matrix(&mut rng, motifs, cols, 0.5);
        let dev = svd_deviation(&a, &q, d, case as u64).map_err(|e| format!("fixture {case} ({rows}x{cols}, d={d}): {e}"))?;
        worst = worst.max(dev);
    }
    Ok(worst)
}

/// Mismatches between the library's hypothesis tests and the enumeration
/// oracles over random samples of every total size up to 12, with heavy ties.
pub fn stats_sweep(per_size: usize, seed: u64) -> Vec<String> {
    use qtypology::analysis::stats::{binomial_test, mann_whitney_u, wilcoxon_signed_rank, ZeroMethod};

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let sample = |rng: &mut ChaCha8Rng, n: usize| -> Vec<f64> {
        let spread = rng.random_range(1..=8);
        (0..n).map(|_| rng.random_range(0..=spread) as f64 * 0.5).collect()
    };

    for n in 1..=12 {
        for _ in 0..per_size {
            let before = sample(&mut rng, n);
            let after = sample(&mut rng, n);
            for (pratt, zero) in [(false, ZeroMethod::Wilcoxon), (true, ZeroMethod::Pratt)] {
                let got = wilcoxon_signed_rank(&before, &after, zero);
                if before == after {
                    if got.is_ok() {
                        failures.push(format!("wilcoxon accepted all-zero differences {before:?}"));
                    }
                    continue;
                }
                let (statistic, p) = wilcoxon_enumerated(&before, &after, pratt);
                match got {
                    Ok(r) if r.statistic == statistic && r.p == p && r.exact => {}
                    other => failures.push(format!("wilcoxon {zero:?} {before:?} {after:?}: {other:?}, oracle ({statistic}, {p})")),
                }
            }
        }
    }

    for total in 2..=12 {
        for n1 in 1..total {
            for _ in 0..per_size.div_ceil(4) {
                let x = sample(&mut rng, n1);
                let y = sample(&mut rng, total - n1);
                let (statistic, p) = mann_whitney_enumerated(&x, &y);
                match mann_whitney_u(&x, &y) {
                    Ok(r) if r.statistic == statistic && r.p == p && r.exact => {}
                    other => failures.push(format!("mann-whitney {x:?} {y:?}: {other:?}, oracle ({statistic}, {p})")),
                }
            }
        }
    }

    for n in 1..=12u64 {
        for den in 2..=10u64 {
            for num in 1..den {
                for k in 0..=n {
                    let expected = binomial_enumerated(k, n, num, den);
                    let got = binomial_test(k, n, num as f64 / den as f64).unwrap();
                    if (got - expected).abs() > 1e-14 {
                        failures.push(format!("binomial k={k} n={n} p0={num}/{den}: {got}, oracle {expected}"));
                    }
                }
            }
        }
    }
    failures
}

/// One metadata line for a pair asked on `date` by `asker` of `party`.
pub fn metadata_line(pair_id: &str, date: &str, asker: &str, party: &str) -> String {
    serde_json::json!({
        "pair_id": pair_id,
        "date": date,
        "question_text": "Will he act?",
        "answer_text": "See parses.",
        "asker": {"speaker_id": asker, "party": party, "first_office_date": "1990-01-01", "is_minister": false, "is_shadow": false},
        "answerer": {"speaker_id": "pm", "party": "Labour", "first_office_date": "1980-01-01", "is_minister": true, "is_shadow": false},
        "department": null
    })
    .to_string()
}

/// CoNLL-U block for `sent_id` from `(surface, tag, head, dep)` rows.
pub fn conllu_block(sent_id: &str, rows: &[(&str, &str, usize, &str)]) -> String {
    let mut out = format!("# sent_id = {sent_id}\n");
    out.push_str(&format!("# text = {}\n", rows.iter().map(|r| r.0).collect::<Vec<_>>().join(" ")));
    for (i, (w, tag, head, dep)) in rows.iter().enumerate() {
        out.push_str(&format!("{}\t{w}\t{}\t{tag}\t{tag}\t_\t{head}\t{dep}\t_\t_\n", i + 1, w.to_lowercase()));
    }
    out.push('\n');
    out
}

pub const WILL_HE_ACT: &Rows = &[
    ("Will", "MD", 3, "aux"),
    ("he", "PRP", 3, "nsubj"),
    ("act", "VB", 0, "ROOT"),
    ("?", ".", 3, "punct"),
];

/// Structural problems with the motif graph built from `sets`: the mined
/// graph must be acyclic with exactly the superset-by-one edges, the
/// contracted graph must be acyclic with every edge witnessed by a mined
/// edge, and every question's sinks must have no successor among the motifs
/// it contains.
pub fn dag_violations(sets: &[FragmentSet], params: &qtypology::motifs::MotifParams) -> Vec<String> {
    use qtypology::motifs::{build_dag, mine_motifs, MotifModel};

    let mut bad = Vec::new();
    let mined = mine_motifs(sets, params.min_support, params.max_size).unwrap();
    let raw = build_dag(&mined.motifs);
    if raw.topological_order().is_none() {
        bad.push("mined graph has a cycle".to_string());
    }
    let by_items: BTreeMap<&[u32], usize> = mined.motifs.iter().map(|m| (m.items.as_slice(), m.motif_id)).collect();
    let mut expected_edges = Vec::new();
    for m in &mined.motifs {
        for skip in 0..m.items.len() {
            if m.items.len() < 2 {
                break;
            }
            let sub: Vec<u32> = m.items.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &x)| x).collect();
            match by_items.get(sub.as_slice()) {
                Some(&parent) => expected_edges.push((parent, m.motif_id)),
                None => bad.push(format!("subset {sub:?} of frequent motif {} is not frequent", m.motif_id)),
            }
        }
    }
    expected_edges.sort_unstable();
    if raw.edges != expected_edges {
        bad.push("mined edges are not exactly the superset-by-one pairs".to_string());
    }

    let model = MotifModel::build(sets, params).unwrap();
    if model.graph.topological_order().is_none() {
        bad.push("contracted graph has a cycle".to_string());
    }
    if model.merged.len() != mined.motifs.len() {
        bad.push("merge table does not cover every mined motif".to_string());
    }
    let rep: Vec<usize> = model.merged.iter().map(|(_, r)| *r).collect();
    for (i, (canon, _)) in model.merged.iter().enumerate() {
        if *canon != mined.motifs[i].canonical(&mined.vocab) {
            bad.push(format!("merge table row {i} is out of order"));
        }
    }
    let witnessed: std::collections::BTreeSet<(usize, usize)> =
        raw.edges.iter().map(|&(a, b)| (rep[a], rep[b])).filter(|(a, b)| a != b).collect();
    for e in &model.graph.edges {
        if !witnessed.contains(e) {
            bad.push(format!("contracted edge {e:?} has no mined witness"));
        }
    }
    for e in &witnessed {
        if model.graph.edges.binary_search(e).is_err() {
            bad.push(format!("mined edge between groups {e:?} lost in contraction"));
        }
    }

    for set in sets {
        let view = model.question_view(set);
        let present: std::collections::BTreeSet<&Fragment> = set.fragments.iter().collect();
        for m in model.motifs() {
            let inside = m.fragments(&model.vocab).all(|f| present.contains(f));
            if inside != view.contained_motifs.contains(&m.motif_id) {
                bad.push(format!("{}: containment of motif {} wrong", set.owner_id, m.motif_id));
            }
        }
        for &m in &view.contained_motifs {
            let leads_on = model.graph.successors(m).iter().any(|s| view.contained_motifs.contains(s));
            if leads_on == view.sink_motifs.contains(&m) {
                bad.push(format!("{}: sink status of motif {m} wrong", set.owner_id));
            }
        }
    }
    bad
}

/// Fragment sets of every question sentence in the corpus.
pub fn question_fragment_sets(corpus: &qtypology::corpus::Corpus) -> Vec<FragmentSet> {
    let cfg = FragmentConfig::default();
    corpus
        .pairs()
        .iter()
        .flat_map(qtypology::corpus::question_sentences_of)
        .map(|s| extract_fragments(s, &cfg).unwrap())
        .collect()
}
