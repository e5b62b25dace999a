use rayon::prelude::*;

use super::apriori::intersection_len;
use super::MinedMotifs;

/// Partition of mined motifs into equivalence groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equivalence {
    /// For each mined motif id, the id of its group's representative.
    pub representative: Vec<usize>,
}

impl Equivalence {
    pub fn identity(n: usize) -> Self {
        Equivalence {
            representative: (0..n).collect(),
        }
    }

    pub fn is_representative(&self, id: usize) -> bool {
        self.representative[id] == id
    }

    pub(crate) fn from_union_find(uf: &mut UnionFind) -> Self {
        let n = uf.parent.len();
        // Mined ids are ordered by (size, canonical), so the smallest id in a
        // group is the preferred representative.
        let mut best = vec![usize::MAX; n];
        for i in 0..n {
            let r = uf.find(i);
            best[r] = best[r].min(i);
        }
        Equivalence {
            representative: (0..n).map(|i| best[uf.find(i)]).collect(),
        }
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Groups motifs `m1`, `m2` with `Pr(m1 | m2) > p` and `Pr(m2 | m1) > p`
/// (probabilities over question sentences), closed transitively. Each group
/// is represented by its member with the fewest fragments, ties going to the
/// lexicographically smallest canonical string.
pub fn merge_equivalent(mined: &MinedMotifs, p: f64) -> Equivalence {
    let n = mined.motifs.len();
    let occ = &mined.occurrences;
    let mut by_support: Vec<usize> = (0..n).collect();
    by_support.sort_by_key(|&i| (occ[i].len(), i));

    // For a pair with supports s_small <= s_big, the intersection is at most
    // s_small, so s_small > p * s_big is necessary.
    let pairs: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|pos| {
            let i = by_support[pos];
            let si = occ[i].len() as f64;
            let mut found = Vec::new();
            for &j in &by_support[pos + 1..] {
                let sj = occ[j].len() as f64;
                if si <= p * sj {
                    break;
                }
                let inter = intersection_len(&occ[i], &occ[j]) as f64;
                if inter > p * si && inter > p * sj {
                    found.push((i, j));
                }
            }
            found
        })
        .collect();

    let mut uf = UnionFind::new(n);
    for (a, b) in pairs {
        uf.union(a, b);
    }
    Equivalence::from_union_find(&mut uf)
}
