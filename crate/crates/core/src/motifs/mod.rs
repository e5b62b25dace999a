//! Motifs: frequent sets of question fragments, merged when they are
//! near-equivalent, organised in a DAG where each edge adds one fragment.

pub mod apriori;
mod dag;
mod merge;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fragments::{Fragment, FragmentSet};

pub use apriori::Item;
pub use dag::{build_dag, MotifGraph};
pub use merge::{merge_equivalent, Equivalence};

/// Fragment ↔ integer id mapping. Ids follow the order of canonical strings,
/// so sorted id lists are also sorted canonically.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    fragments: Vec<Fragment>,
    index: HashMap<Fragment, Item>,
}

impl Vocabulary {
    pub fn new(fragments: impl IntoIterator<Item = Fragment>) -> Self {
        let mut keyed: Vec<(String, Fragment)> = fragments
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|f| (f.canonical(), f))
            .collect();
        keyed.sort();
        let fragments: Vec<Fragment> = keyed.into_iter().map(|(_, f)| f).collect();
        let index = fragments
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i as Item))
            .collect();
        Vocabulary { fragments, index }
    }

    pub fn len(&self) -> usize {
        self.fragments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fragments.is_empty()
    }

    pub fn id(&self, f: &Fragment) -> Option<Item> {
        self.index.get(f).copied()
    }

    pub fn fragment(&self, id: Item) -> &Fragment {
        &self.fragments[id as usize]
    }

    /// Sorted ids of the known fragments of `set`; unknown fragments are skipped.
    pub fn encode(&self, set: &FragmentSet) -> Vec<Item> {
        let mut ids: Vec<Item> = set.fragments.iter().filter_map(|f| self.id(f)).collect();
        ids.sort_unstable();
        ids
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Motif {
    pub motif_id: usize,
    /// Sorted fragment ids into the owning [`Vocabulary`].
    pub items: Vec<Item>,
    /// Number of question sentences containing every fragment.
    pub support: usize,
}

impl Motif {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn fragments<'v>(&self, vocab: &'v Vocabulary) -> impl Iterator<Item = &'v Fragment> + use<'v, '_> {
        self.items.iter().map(move |&i| vocab.fragment(i))
    }

    /// Fragment canonical strings in order, joined by `|`.
    pub fn canonical(&self, vocab: &Vocabulary) -> String {
        self.fragments(vocab).map(Fragment::canonical).collect::<Vec<_>>().join("|")
    }
}

/// Result of frequent-itemset mining over question fragment sets.
#[derive(Debug, Clone)]
pub struct MinedMotifs {
    pub vocab: Vocabulary,
    /// Ordered by (size, canonical string); `motif_id` is the position.
    pub motifs: Vec<Motif>,
    /// Sorted indices of the fragment sets containing each motif.
    pub occurrences: Vec<Vec<u32>>,
}

pub fn mine_motifs(fragment_sets: &[FragmentSet], min_support: usize, max_size: usize) -> Result<MinedMotifs> {
    if min_support == 0 {
        return Err(Error::InvalidParameter {
            name: "min_support",
            reason: "must be at least 1".into(),
        });
    }
    if max_size == 0 {
        return Err(Error::InvalidParameter {
            name: "max_size",
            reason: "must be at least 1".into(),
        });
    }
    let vocab = Vocabulary::new(fragment_sets.iter().flat_map(|s| s.fragments.iter().cloned()));
    let transactions: Vec<Vec<Item>> = fragment_sets.iter().map(|s| vocab.encode(s)).collect();
    let itemsets = apriori::frequent_itemsets(&transactions, min_support, max_size);

    let mut keyed: Vec<(usize, String, apriori::Itemset)> = itemsets
        .into_iter()
        .map(|s| {
            let canon = s
                .items
                .iter()
                .map(|&i| vocab.fragment(i).canonical())
                .collect::<Vec<_>>()
                .join("|");
            (s.items.len(), canon, s)
        })
        .collect();
    keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));

    let mut motifs = Vec::with_capacity(keyed.len());
    let mut occurrences = Vec::with_capacity(keyed.len());
    for (id, (_, _, set)) in keyed.into_iter().enumerate() {
        motifs.push(Motif {
            motif_id: id,
            support: set.support(),
            items: set.items,
        });
        occurrences.push(set.tids);
    }
    Ok(MinedMotifs {
        vocab,
        motifs,
        occurrences,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotifParams {
    /// Minimum number of question sentences containing a motif.
    pub min_support: usize,
    /// Largest motif, in fragments.
    pub max_size: usize,
    /// Equivalence threshold on both conditional containment probabilities.
    pub p: f64,
}

impl Default for MotifParams {
    fn default() -> Self {
        MotifParams {
            min_support: 100,
            max_size: 4,
            p: 0.9,
        }
    }
}

/// The motif universe used downstream: representative motifs, their DAG and
/// a record of which mined motifs were merged into which representative.
#[derive(Debug, Clone)]
pub struct MotifModel {
    /// Vocabulary over the fragments appearing in representative motifs.
    pub vocab: Vocabulary,
    pub graph: MotifGraph,
    /// Canonical string of every mined motif with the id of its representative.
    pub merged: Vec<(String, usize)>,
    first_item_index: HashMap<Item, Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionMotifView {
    pub pair_id: String,
    pub contained_motifs: BTreeSet<usize>,
    pub sink_motifs: BTreeSet<usize>,
}

impl MotifModel {
    /// Mines, merges and contracts the motif DAG for the given question
    /// fragment sets.
    pub fn build(fragment_sets: &[FragmentSet], params: &MotifParams) -> Result<Self> {
        if !(params.p > 0.5 && params.p <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: format!("{} is outside (0.5, 1]", params.p),
            });
        }
        let mined = mine_motifs(fragment_sets, params.min_support, params.max_size)?;
        let equivalence = merge_equivalent(&mined, params.p);
        let (reps, edges, rep_of) = dag::contract(&mined, &equivalence);

        // Re-encode the representatives over a vocabulary of their own fragments.
        let vocab = Vocabulary::new(
            reps.iter()
                .flat_map(|m| m.items.iter().map(|&i| mined.vocab.fragment(i).clone())),
        );
        let remap = |items: &[Item]| -> Vec<Item> {
            let mut v: Vec<Item> = items
                .iter()
                .map(|&i| vocab.id(mined.vocab.fragment(i)).expect("fragment in vocabulary"))
                .collect();
            v.sort_unstable();
            v
        };
        let nodes: Vec<Motif> = reps
            .iter()
            .map(|m| Motif {
                motif_id: m.motif_id,
                items: remap(&m.items),
                support: m.support,
            })
            .collect();
        let merged = mined
            .motifs
            .iter()
            .map(|m| (m.canonical(&mined.vocab), rep_of[m.motif_id]))
            .collect();
        Ok(Self::from_parts(vocab, MotifGraph::from_edges(nodes, edges), merged))
    }

    pub fn from_parts(vocab: Vocabulary, graph: MotifGraph, merged: Vec<(String, usize)>) -> Self {
        let mut first_item_index: HashMap<Item, Vec<usize>> = HashMap::new();
        for m in &graph.nodes {
            if let Some(&first) = m.items.first() {
                first_item_index.entry(first).or_default().push(m.motif_id);
            }
        }
        MotifModel {
            vocab,
            graph,
            merged,
            first_item_index,
        }
    }

    pub fn motifs(&self) -> &[Motif] {
        &self.graph.nodes
    }

    pub fn len(&self) -> usize {
        self.graph.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.nodes.is_empty()
    }

    /// Motifs whose fragments are all in `items` (sorted ids).
    fn contained_in(&self, items: &[Item]) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for first in items {
            if let Some(cands) = self.first_item_index.get(first) {
                for &m in cands {
                    if apriori::is_subset(&self.graph.nodes[m].items, items) {
                        out.insert(m);
                    }
                }
            }
        }
        out
    }

    /// Contained motifs and sinks for a single question sentence.
    pub fn question_view(&self, question: &FragmentSet) -> QuestionMotifView {
        let items = self.vocab.encode(question);
        let contained = self.contained_in(&items);
        let sinks = self.graph.sinks_within(&contained);
        QuestionMotifView {
            pair_id: question.owner_id.clone(),
            contained_motifs: contained,
            sink_motifs: sinks,
        }
    }

    /// Utterance-level view: the union of the views of its question sentences.
    pub fn utterance_view(&self, pair_id: &str, questions: &[FragmentSet]) -> QuestionMotifView {
        let mut view = QuestionMotifView {
            pair_id: pair_id.to_string(),
            contained_motifs: BTreeSet::new(),
            sink_motifs: BTreeSet::new(),
        };
        for q in questions {
            let v = self.question_view(q);
            view.contained_motifs.extend(v.contained_motifs);
            view.sink_motifs.extend(v.sink_motifs);
        }
        view
    }

    /// `motif_id<TAB>support<TAB>fragments` with fragments joined by `|`.
    pub fn motif_table_tsv(&self) -> String {
        let mut out = String::from("motif_id\tsupport\tfragments\n");
        for m in &self.graph.nodes {
            out.push_str(&format!("{}\t{}\t{}\n", m.motif_id, m.support, m.canonical(&self.vocab)));
        }
        out
    }

    pub fn merged_tsv(&self) -> String {
        let mut out = String::from("motif\trepresentative_id\n");
        for (canon, rep) in &self.merged {
            out.push_str(&format!("{canon}\t{rep}\n"));
        }
        out
    }

    pub fn dag_json(&self) -> String {
        let doc = DagDoc {
            nodes: self.graph.nodes.len(),
            edges: self.graph.edges.clone(),
        };
        serde_json::to_string(&doc).expect("edge list serializes")
    }

    /// Reads back the artifacts written by [`Self::motif_table_tsv`],
    /// [`Self::dag_json`] and [`Self::merged_tsv`].
    pub fn from_artifacts(motif_table: &str, dag_json: &str, merged_tsv: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in motif_table.lines().enumerate().skip(1) {
            let cols: Vec<&str> = line.split('\t').collect();
            let bad = || Error::Corrupt(format!("motif table line {}", i + 1));
            if cols.len() != 3 {
                return Err(bad());
            }
            let id: usize = cols[0].parse().map_err(|_| bad())?;
            let support: usize = cols[1].parse().map_err(|_| bad())?;
            let frags = split_motif_canonical(cols[2])
                .into_iter()
                .map(|s| s.parse::<Fragment>())
                .collect::<Result<Vec<_>>>()?;
            if id != rows.len() {
                return Err(bad());
            }
            rows.push((support, frags));
        }
        let vocab = Vocabulary::new(rows.iter().flat_map(|(_, f)| f.iter().cloned()));
        let nodes = rows
            .into_iter()
            .enumerate()
            .map(|(id, (support, frags))| {
                let mut items: Vec<Item> = frags.iter().map(|f| vocab.id(f).unwrap()).collect();
                items.sort_unstable();
                Motif {
                    motif_id: id,
                    items,
                    support,
                }
            })
            .collect::<Vec<_>>();
        let doc: DagDoc = serde_json::from_str(dag_json).map_err(|e| Error::json("motif DAG", e))?;
        if doc.nodes != nodes.len() || doc.edges.iter().any(|&(a, b)| a >= doc.nodes || b >= doc.nodes) {
            return Err(Error::Corrupt("motif DAG does not match the motif table".into()));
        }
        let mut merged = Vec::new();
        for (i, line) in merged_tsv.lines().enumerate().skip(1) {
            let (canon, rep) = line
                .rsplit_once('\t')
                .ok_or_else(|| Error::Corrupt(format!("merged table line {}", i + 1)))?;
            let rep = rep
                .parse()
                .map_err(|_| Error::Corrupt(format!("merged table line {}", i + 1)))?;
            merged.push((canon.to_string(), rep));
        }
        Ok(Self::from_parts(vocab, MotifGraph::from_edges(nodes, doc.edges), merged))
    }
}

#[derive(Serialize, Deserialize)]
struct DagDoc {
    nodes: usize,
    edges: Vec<(usize, usize)>,
}

/// Splits a motif canonical string on unescaped `|`.
fn split_motif_canonical(s: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut cur = String::new();
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                cur.push(c);
                if let Some(n) = chars.next() {
                    cur.push(n);
                }
            }
            '|' => parts.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    parts.push(cur);
    parts
}
