use std::collections::{BTreeSet, HashMap};

use super::merge::{Equivalence, UnionFind};
use super::{Item, MinedMotifs, Motif};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotifGraph {
    /// Node `i` is the motif with `motif_id == i`.
    pub nodes: Vec<Motif>,
    /// Sorted, distinct `(from, to)` pairs.
    pub edges: Vec<(usize, usize)>,
    out: Vec<Vec<usize>>,
}

impl MotifGraph {
    pub fn from_edges(nodes: Vec<Motif>, mut edges: Vec<(usize, usize)>) -> Self {
        debug_assert!(nodes.iter().enumerate().all(|(i, m)| m.motif_id == i));
        edges.sort_unstable();
        edges.dedup();
        let mut out = vec![Vec::new(); nodes.len()];
        for &(a, b) in &edges {
            out[a].push(b);
        }
        MotifGraph { nodes, edges, out }
    }

    pub fn successors(&self, node: usize) -> &[usize] {
        &self.out[node]
    }

    /// Members of `subset` with no edge to another member of `subset`.
    pub fn sinks_within(&self, subset: &BTreeSet<usize>) -> BTreeSet<usize> {
        subset
            .iter()
            .copied()
            .filter(|&m| !self.out[m].iter().any(|t| *t != m && subset.contains(t)))
            .collect()
    }

    /// Kahn's algorithm; `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        for &(_, b) in &self.edges {
            indeg[b] += 1;
        }
        let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).rev().collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop() {
            order.push(v);
            for &w in &self.out[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.push(w);
                }
            }
        }
        (order.len() == n).then_some(order)
    }
}

/// Edges from each motif to every motif with exactly one more fragment that
/// contains it. Motif ids must equal positions in `motifs`.
pub fn build_dag(motifs: &[Motif]) -> MotifGraph {
    let edges = superset_by_one_pairs(motifs);
    MotifGraph::from_edges(motifs.to_vec(), edges)
}

fn superset_by_one_pairs(motifs: &[Motif]) -> Vec<(usize, usize)> {
    let by_items: HashMap<&[Item], usize> = motifs.iter().map(|m| (m.items.as_slice(), m.motif_id)).collect();
    let mut edges = Vec::new();
    let mut sub = Vec::new();
    for m in motifs.iter().filter(|m| m.items.len() >= 2) {
        for skip in 0..m.items.len() {
            sub.clear();
            sub.extend(m.items.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
            if let Some(&parent) = by_items.get(sub.as_slice()) {
                edges.push((parent, m.motif_id));
            }
        }
    }
    edges
}

/// Collapses each equivalence group of mined motifs to its representative.
/// Edges of the contracted graph are the superset-by-one edges among all
/// mined motifs, mapped through the grouping; groups that end up on a common
/// cycle are merged so that the result is acyclic.
///
/// Returns the representatives renumbered `0..`, the contracted edges over the
/// new ids, and the new representative id of every mined motif.
pub(crate) fn contract(mined: &MinedMotifs, equivalence: &Equivalence) -> (Vec<Motif>, Vec<(usize, usize)>, Vec<usize>) {
    let n = mined.motifs.len();
    let raw_edges = superset_by_one_pairs(&mined.motifs);
    let mut uf = UnionFind::new(n);
    for (i, &r) in equivalence.representative.iter().enumerate() {
        uf.union(i, r);
    }

    loop {
        let eq = Equivalence::from_union_find(&mut uf);
        let rep = &eq.representative;
        let mut edges: Vec<(usize, usize)> = raw_edges
            .iter()
            .map(|&(a, b)| (rep[a], rep[b]))
            .filter(|(a, b)| a != b)
            .collect();
        edges.sort_unstable();
        edges.dedup();

        let cyclic = strongly_connected(n, &edges);
        if cyclic.iter().all(|c| c.len() == 1) {
            let mut new_id = vec![usize::MAX; n];
            let mut reps = Vec::new();
            for i in 0..n {
                if rep[i] == i {
                    new_id[i] = reps.len();
                    reps.push(Motif {
                        motif_id: reps.len(),
                        items: mined.motifs[i].items.clone(),
                        support: mined.motifs[i].support,
                    });
                }
            }
            let edges = edges.into_iter().map(|(a, b)| (new_id[a], new_id[b])).collect();
            let rep_of = (0..n).map(|i| new_id[rep[i]]).collect();
            return (reps, edges, rep_of);
        }
        for component in cyclic.into_iter().filter(|c| c.len() > 1) {
            log::debug!("merging {} motif groups that form a cycle", component.len());
            for w in component.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
    }
}

/// Strongly connected components of the graph on `0..n` (Kosaraju).
fn strongly_connected(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut fwd = vec![Vec::new(); n];
    let mut rev = vec![Vec::new(); n];
    for &(a, b) in edges {
        fwd[a].push(b);
        rev[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut finish = Vec::with_capacity(n);
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![(s, 0usize)];
        while let Some((v, i)) = stack.pop() {
            if i < fwd[v].len() {
                stack.push((v, i + 1));
                let w = fwd[v][i];
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                finish.push(v);
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for &s in finish.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        let c = out.len();
        let mut members = vec![s];
        comp[s] = c;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &w in &rev[v] {
                if comp[w] == usize::MAX {
                    comp[w] = c;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn motif(id: usize, items: &[u32]) -> Motif {
        Motif {
            motif_id: id,
            items: items.to_vec(),
            support: 1,
        }
    }

    #[test]
    fn equal_sizes_have_no_edge() {
        let g = build_dag(&[motif(0, &[0]), motif(1, &[1])]);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn one_edge_between_nested() {
        let g = build_dag(&[motif(0, &[1]), motif(1, &[0, 1])]);
        assert_eq!(g.edges, vec![(0, 1)]);
        assert_eq!(g.topological_order(), Some(vec![0, 1]));
    }

    #[test]
    fn scc_finds_cycle() {
        let comps = strongly_connected(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]);
        let mut sizes: Vec<usize> = comps.iter().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 3]);
    }

    #[test]
    fn sinks_ignore_outside_nodes() {
        let g = build_dag(&[motif(0, &[0]), motif(1, &[0, 1]), motif(2, &[0, 2])]);
        let within: BTreeSet<usize> = [0, 1].into();
        assert_eq!(g.sinks_within(&within), [1].into());
        let only_root: BTreeSet<usize> = [0].into();
        assert_eq!(g.sinks_within(&only_root), [0].into());
    }
}
