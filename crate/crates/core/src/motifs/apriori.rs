//! Level-wise apriori over integer items, counting support with sorted
//! transaction-id lists so that every frequent itemset also carries the exact
//! set of transactions containing it.

use std::collections::HashSet;

use rayon::prelude::*;

pub type Item = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Itemset {
    /// Sorted, distinct items.
    pub items: Vec<Item>,
    /// Sorted indices of the transactions containing every item.
    pub tids: Vec<u32>,
}

impl Itemset {
    pub fn support(&self) -> usize {
        self.tids.len()
    }
}

/// Every itemset of at most `max_size` items contained in at least
/// `min_support` transactions, ordered by (size, items).
///
/// Transactions may contain duplicate or unsorted items.
pub fn frequent_itemsets(transactions: &[Vec<Item>], min_support: usize, max_size: usize) -> Vec<Itemset> {
    let min_support = min_support.max(1);
    if max_size == 0 || transactions.len() < min_support {
        return Vec::new();
    }

    let universe = transactions.iter().flatten().copied().max().map_or(0, |m| m as usize + 1);
    let mut tidlists: Vec<Vec<u32>> = vec![Vec::new(); universe];
    for (t, items) in transactions.iter().enumerate() {
        let mut items = items.clone();
        items.sort_unstable();
        items.dedup();
        for i in items {
            tidlists[i as usize].push(t as u32);
        }
    }

    let mut level: Vec<Itemset> = tidlists
        .into_iter()
        .enumerate()
        .filter(|(_, tids)| tids.len() >= min_support)
        .map(|(i, tids)| Itemset {
            items: vec![i as Item],
            tids,
        })
        .collect();

    let mut out = Vec::new();
    for _size in 2..=max_size {
        if level.len() < 2 {
            break;
        }
        let next = next_level(&level, min_support);
        out.append(&mut level);
        level = next;
    }
    out.append(&mut level);
    out
}

/// Joins itemsets sharing all but their last item, prunes candidates with an
/// infrequent subset, and keeps those meeting the support bound.
fn next_level(level: &[Itemset], min_support: usize) -> Vec<Itemset> {
    let known: HashSet<&[Item]> = level.iter().map(|s| s.items.as_slice()).collect();
    let k = level[0].items.len();

    // `level` is sorted, so itemsets with a common prefix are contiguous.
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=level.len() {
        if i == level.len() || level[i].items[..k - 1] != level[start].items[..k - 1] {
            groups.push(start..i);
            start = i;
        }
    }

    let per_group: Vec<Vec<Itemset>> = groups
        .into_par_iter()
        .map(|range| {
            let mut found = Vec::new();
            let mut scratch = Vec::with_capacity(k + 1);
            for a in range.clone() {
                for b in a + 1..range.end {
                    let (x, y) = (&level[a], &level[b]);
                    scratch.clear();
                    scratch.extend_from_slice(&x.items);
                    scratch.push(*y.items.last().unwrap());
                    if !all_subsets_known(&scratch, &known) {
                        continue;
                    }
                    let tids = intersect(&x.tids, &y.tids);
                    if tids.len() >= min_support {
                        found.push(Itemset {
                            items: scratch.clone(),
                            tids,
                        });
                    }
                }
            }
            found
        })
        .collect();
    per_group.into_iter().flatten().collect()
}

fn all_subsets_known(candidate: &[Item], known: &HashSet<&[Item]>) -> bool {
    if candidate.len() <= 2 {
        return true;
    }
    let mut sub = Vec::with_capacity(candidate.len() - 1);
    // Dropping either of the last two items yields the joined parents.
    (0..candidate.len() - 2).all(|skip| {
        sub.clear();
        sub.extend(candidate.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
        known.contains(sub.as_slice())
    })
}

pub fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

pub fn intersection_len(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// True iff sorted `small` is a subset of sorted `big`.
pub fn is_subset(small: &[Item], big: &[Item]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}
