use std::collections::BTreeSet;

use hmp_core::{Error, Skeleton};
use proptest::prelude::*;

fn tree(parents: &[isize]) -> Skeleton {
    let offsets = parents.iter().map(|&p| if p < 0 { 0.0 } else { 1.0 }).collect();
    Skeleton::from_parent_indices(parents, offsets).unwrap()
}

#[test]
fn chain_star_and_y_orders() {
    assert_eq!(tree(&[-1, 0, 1]).traversal_order(), &[(0, 1), (1, 2)]);
    assert_eq!(tree(&[-1, 0, 0, 0]).traversal_order(), &[(0, 1), (0, 2), (0, 3)]);
    assert_eq!(tree(&[-1, 0, 1, 1]).traversal_order(), &[(0, 1), (1, 2), (1, 3)]);
}

#[test]
fn validation_errors() {
    let cycle = Skeleton::from_parent_indices(&[1, 0], vec![1.0, 1.0]);
    assert!(matches!(cycle, Err(Error::CycleDetected { .. })));
    let negative = Skeleton::from_parent_indices(&[-1, 0], vec![0.0, -1.0]);
    assert!(matches!(negative, Err(Error::NonPositiveOffset { joint: 1, .. })));
    let two_roots = Skeleton::from_parent_indices(&[-1, -1], vec![0.0, 0.0]);
    assert!(matches!(two_roots, Err(Error::MultipleRoots { .. })));
    let out_of_range = Skeleton::from_parent_indices(&[-1, 5], vec![0.0, 1.0]);
    assert!(matches!(out_of_range, Err(Error::InvalidParent { .. })));
}

#[test]
fn humanoid_is_valid() {
    let s = Skeleton::humanoid();
    s.validate().unwrap();
    assert_eq!(s.joint_count(), 17);
    assert_eq!(s.eval_subset().len(), 16);
    assert!(!s.eval_subset().contains(&s.root()));
    assert_eq!(s.traversal_order().len(), 16);
}

/// Depth of every joint by walking parent links; independent of the BFS.
fn depths(parents: &[Option<usize>]) -> Vec<usize> {
    parents
        .iter()
        .enumerate()
        .map(|(mut j, _)| {
            let mut d = 0;
            while let Some(p) = parents[j] {
                j = p;
                d += 1;
            }
            d
        })
        .collect()
}

/// Random tree on `n` joints rooted at a random joint.
fn random_tree() -> impl Strategy<Value = Vec<isize>> {
    (1usize..=64).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(any::<prop::sample::Index>(), n),
            Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
        )
            .prop_map(|(n, picks, perm)| {
                // perm[0] is the root; perm[i] hangs below one of perm[..i]
                let mut parents = vec![-1isize; n];
                for i in 1..n {
                    parents[perm[i]] = perm[picks[i].index(i)] as isize;
                }
                parents
            })
    })
}

proptest! {
    #[test]
    fn traversal_covers_each_bone_once(parents in random_tree()) {
        let s = tree(&parents);
        let order = s.traversal_order();
        prop_assert_eq!(order.len(), parents.len() - 1);
        let children: BTreeSet<usize> = order.iter().map(|&(_, c)| c).collect();
        prop_assert_eq!(children.len(), order.len());
        for &(p, c) in order {
            prop_assert_eq!(parents[c], p as isize);
        }
    }

    #[test]
    fn traversal_prefixes_are_connected(parents in random_tree()) {
        let s = tree(&parents);
        let mut visited = BTreeSet::from([s.root()]);
        for &(p, c) in s.traversal_order() {
            prop_assert!(visited.contains(&p));
            visited.insert(c);
        }
    }

    #[test]
    fn traversal_is_breadth_first_by_index(parents in random_tree()) {
        let s = tree(&parents);
        let depth = depths(s.parents());
        let keys: Vec<(usize, usize, usize)> = s
            .traversal_order()
            .iter()
            .map(|&(p, c)| (depth[c], p, c))
            .collect();
        // levels never decrease; within a level, parents are met in visit
        // order and siblings ascend
        for w in keys.windows(2) {
            prop_assert!(w[0].0 <= w[1].0);
            if w[0].1 == w[1].1 {
                prop_assert!(w[0].2 < w[1].2);
            }
        }
    }
}
