//! Seeded random trees and models for property checks and the CLI.

use std::ops::RangeInclusive;

use indexmap::IndexMap;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classic::{NodeKind, TypedNode, TypedTree};
use crate::temperature::InverseTemperature;
use crate::tree::{DecisionTree, EdgeSpec, NodeSpec, TreeSpec};

/// Default seed for reproducible runs.
pub const DEFAULT_SEED: u64 = 0xF3EE;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer; derives independent sub-seeds from `(seed, index)`.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Strictly positive probability vector with entries bounded away from 0.
pub fn positive_probs<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// How node kinds are assigned in random typed trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindPattern {
    /// Max at even depths, chance at odd depths.
    Expectimax,
    /// Max at even depths, min at odd depths.
    Minimax,
    /// Max, chance, min, chance, repeating by depth.
    Expectiminimax,
    /// Independent uniform choice per node.
    Mixed,
}

impl KindPattern {
    fn kind<R: Rng>(self, rng: &mut R, depth: usize) -> NodeKind {
        use NodeKind::*;
        match self {
            KindPattern::Expectimax => [Max, Chance][depth % 2],
            KindPattern::Minimax => [Max, Min][depth % 2],
            KindPattern::Expectiminimax => [Max, Chance, Min, Chance][depth % 4],
            KindPattern::Mixed => [Max, Min, Chance][rng.gen_range(0..3)],
        }
    }
}

/// Full-depth typed tree with rewards and leaf values uniform in `[-1, 1]`.
pub fn random_typed_tree<R: Rng>(
    rng: &mut R,
    depth: usize,
    branching: RangeInclusive<usize>,
    pattern: KindPattern,
) -> TypedTree {
    fn grow<R: Rng>(
        rng: &mut R,
        name: String,
        d: usize,
        depth: usize,
        branching: &RangeInclusive<usize>,
        pattern: KindPattern,
    ) -> TypedNode {
        if d == depth {
            return TypedNode::leaf(name, rng.gen_range(-1.0..=1.0));
        }
        let kind = pattern.kind(rng, d);
        let k = rng.gen_range(branching.clone());
        let q = positive_probs(rng, k);
        let children = q
            .into_iter()
            .enumerate()
            .map(|(i, qi)| {
                let r = rng.gen_range(-1.0..=1.0);
                (
                    qi,
                    r,
                    grow(rng, format!("{name}.{i}"), d + 1, depth, branching, pattern),
                )
            })
            .collect();
        TypedNode::internal(name, kind, children)
    }
    TypedTree::new(grow(rng, "r".into(), 0, depth, &branching, pattern))
}

/// Full-depth decision tree with per-node temperatures drawn by `beta_at`
/// (called with the node depth), rewards uniform in `[-1, 1]` and leaf
/// values from `leaf_values` (or 0).
pub fn random_decision_tree<R: Rng>(
    rng: &mut R,
    depth: usize,
    branching: RangeInclusive<usize>,
    leaf_values: bool,
    mut beta_at: impl FnMut(&mut R, usize) -> InverseTemperature,
) -> DecisionTree {
    let mut nodes = IndexMap::new();
    let mut stack = vec![("r".to_string(), 0usize)];
    while let Some((name, d)) = stack.pop() {
        if d == depth {
            let leaf_value = if leaf_values {
                Some(rng.gen_range(-1.0..=1.0))
            } else {
                None
            };
            nodes.insert(
                name,
                NodeSpec {
                    beta: None,
                    leaf_value,
                    edges: vec![],
                },
            );
            continue;
        }
        let beta = beta_at(rng, d);
        let k = rng.gen_range(branching.clone());
        let q = positive_probs(rng, k);
        let edges: Vec<EdgeSpec> = q
            .into_iter()
            .enumerate()
            .map(|(i, qi)| EdgeSpec {
                label: i.to_string(),
                q: qi,
                r: rng.gen_range(-1.0..=1.0),
                child: format!("{name}.{i}"),
            })
            .collect();
        for e in edges.iter().rev() {
            stack.push((e.child.clone(), d + 1));
        }
        nodes.insert(
            name,
            NodeSpec {
                beta: Some(beta),
                leaf_value: None,
                edges,
            },
        );
    }
    let spec = TreeSpec {
        horizon: depth as i64,
        root: "r".into(),
        nodes,
    };
    DecisionTree::from_spec(&spec).expect("generated tree is valid")
}

/// Nonzero finite temperature with magnitude in `[0.2, 3]` and random sign.
pub fn nonzero_finite<R: Rng>(rng: &mut R) -> InverseTemperature {
    let m = rng.gen_range(0.2..=3.0);
    InverseTemperature::Finite(if rng.gen_bool(0.5) { m } else { -m })
}
