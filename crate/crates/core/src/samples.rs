//! Bundled example trees and seeded random tree generation.

use crate::tree::{LengthTree, NodeId, TreeNode};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct TreeBuilder {
    nodes: Vec<TreeNode>,
}

impl TreeBuilder {
    fn new() -> Self {
        TreeBuilder {
            nodes: vec![TreeNode {
                id: 0,
                parent: None,
                weight_to_parent: None,
                children: Vec::new(),
                label: None,
            }],
        }
    }

    fn add_child(&mut self, parent: NodeId, weight: f64) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            id,
            parent: Some(parent),
            weight_to_parent: Some(weight),
            children: Vec::new(),
            label: None,
        });
        self.nodes[parent].children.push(id);
        id
    }

    fn build(self) -> LengthTree {
        LengthTree::from_nodes(self.nodes, 0).expect("generated tree is well formed")
    }
}

/// Star with edge lengths (2, 3, 1).
pub fn fig3_tree() -> LengthTree {
    star_tree(&[2.0, 3.0, 1.0])
}

/// Star with edge lengths (3, 1, 4, 2, 1).
pub fn fig4_tree() -> LengthTree {
    star_tree(&[3.0, 1.0, 4.0, 2.0, 1.0])
}

pub fn star_tree(weights: &[f64]) -> LengthTree {
    let mut b = TreeBuilder::new();
    for &w in weights {
        b.add_child(0, w);
    }
    b.build()
}

/// A height-3 tree with 8 leaves, 13 edges and longest root path 5;
/// the bundled representative of the fig5 demo class, built at λ = L = 5.
pub fn fig5_class_tree() -> LengthTree {
    let mut b = TreeBuilder::new();
    let a = b.add_child(0, 2.0);
    let bb = b.add_child(0, 0.5);
    let c = b.add_child(0, 0.5);
    let a1 = b.add_child(a, 1.5);
    b.add_child(a, 0.5);
    b.add_child(a1, 1.5); // depth-3 leaf: 2 + 1.5 + 1.5 = 5
    b.add_child(a1, 0.5);
    let b1 = b.add_child(bb, 0.5);
    b.add_child(bb, 0.5);
    b.add_child(b1, 0.5);
    b.add_child(b1, 0.5);
    b.add_child(c, 0.5);
    b.add_child(c, 0.5);
    b.build()
}

/// Regular degree-3 tree with 48 leaves (root of degree 3, binary below,
/// leaves at depth 5) and seeded random edge lengths.
pub fn fig6_class_tree(seed: u64) -> LengthTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = TreeBuilder::new();
    let mut level: Vec<NodeId> = (0..3)
        .map(|_| {
            let w = rng.random_range(0.25..0.75);
            b.add_child(0, w)
        })
        .collect();
    for _ in 0..4 {
        let mut next = Vec::with_capacity(level.len() * 2);
        for &v in &level {
            for _ in 0..2 {
                let w = rng.random_range(0.25..0.75);
                next.push(b.add_child(v, w));
            }
        }
        level = next;
    }
    b.build()
}

/// Random normalized tree: root degree in 3..=5, internal nodes with 2..=4
/// children, exactly `leaves` leaves, weights uniform in [wmin, wmax).
/// Deterministic under the seed.
pub fn random_normalized_tree_with_leaves(
    seed: u64,
    leaves: usize,
    wmin: f64,
    wmax: f64,
) -> LengthTree {
    assert!(leaves >= 3, "need at least 3 leaves for a normalized root");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = TreeBuilder::new();

    fn split(budget: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let mut bins = vec![1usize; k];
        for _ in 0..(budget - k) {
            bins[rng.random_range(0..k)] += 1;
        }
        bins
    }

    fn grow(
        b: &mut TreeBuilder,
        parent: NodeId,
        budget: usize,
        wmin: f64,
        wmax: f64,
        rng: &mut ChaCha8Rng,
    ) {
        let w = rng.random_range(wmin..wmax);
        let node = b.add_child(parent, w);
        if budget == 1 {
            return;
        }
        let k = rng.random_range(2..=budget.min(4));
        for sub in split(budget, k, rng) {
            grow(b, node, sub, wmin, wmax, rng);
        }
    }

    let k0 = rng.random_range(3..=leaves.min(5));
    for sub in split(leaves, k0, &mut rng) {
        grow(&mut b, 0, sub, wmin, wmax, &mut rng);
    }
    b.build()
}

/// Random normalized tree with a leaf count drawn in [3, max_leaves].
pub fn random_normalized_tree(seed: u64, max_leaves: usize, wmin: f64, wmax: f64) -> LengthTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
    let leaves = rng.random_range(3..=max_leaves.max(3));
    random_normalized_tree_with_leaves(seed, leaves, wmin, wmax)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig5_class_shape() {
        let t = fig5_class_tree();
        let s = t.stats();
        assert_eq!(s.m, 13);
        assert_eq!(s.n_leaves, 8);
        assert_eq!(s.depth, 3);
        assert!((s.longest_root_path - 5.0).abs() < 1e-12);
        // normalized: no degree-2 nodes anywhere
        assert!(t.canonical_eq(&t.normalize()));
    }

    #[test]
    fn fig6_class_shape() {
        let t = fig6_class_tree(1);
        let s = t.stats();
        assert_eq!(s.n_leaves, 48);
        assert_eq!(s.m, 93);
        assert_eq!(s.depth, 5);
        for n in t.nodes() {
            if !t.is_leaf(n.id) && n.id != t.root() {
                assert_eq!(t.degree(n.id), 3);
            }
        }
    }

    #[test]
    fn random_trees_are_normalized() {
        for seed in 0..50 {
            let t = random_normalized_tree(seed, 32, 0.1, 10.0);
            let leaves = t.leaf_count();
            assert!((3..=32).contains(&leaves));
            assert!(t.node(t.root()).children.len() >= 3);
            for n in t.nodes() {
                if n.id != t.root() && !t.is_leaf(n.id) {
                    assert!(n.children.len() >= 2);
                }
            }
            // deterministic
            let t2 = random_normalized_tree(seed, 32, 0.1, 10.0);
            assert!(t.canonical_eq(&t2));
        }
    }
}
