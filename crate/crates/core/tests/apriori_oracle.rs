mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qtypology::motifs::apriori::frequent_itemsets;

#[test]
fn apriori_matches_subset_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..1000 {
        let (transactions, universe, min_support, max_size) = common::random_instance(&mut rng);
        let mined: std::collections::BTreeMap<Vec<u32>, usize> = frequent_itemsets(&transactions, min_support, max_size)
            .into_iter()
            .map(|s| {
                let support = s.support();
                (s.items, support)
            })
            .collect();
        let expected = common::brute_force_itemsets(&transactions, universe, min_support, max_size);
        assert_eq!(mined, expected, "case {case}: universe {universe}, min_support {min_support}, max_size {max_size}");
    }
}

#[test]
fn tid_lists_name_the_containing_transactions() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let (transactions, _, min_support, max_size) = common::random_instance(&mut rng);
        for set in frequent_itemsets(&transactions, min_support, max_size) {
            let expected: Vec<u32> = transactions
                .iter()
                .enumerate()
                .filter(|(_, t)| set.items.iter().all(|i| t.contains(i)))
                .map(|(i, _)| i as u32)
                .collect();
            assert_eq!(set.tids, expected);
        }
    }
}

#[test]
fn duplicate_and_unsorted_items_count_once() {
    let transactions = vec![vec![3, 1, 3], vec![1, 3], vec![3]];
    let sets = frequent_itemsets(&transactions, 2, 2);
    let found: Vec<(Vec<u32>, usize)> = sets.iter().map(|s| (s.items.clone(), s.support())).collect();
    assert_eq!(found, vec![(vec![1], 2), (vec![3], 3), (vec![1, 3], 2)]);
}
