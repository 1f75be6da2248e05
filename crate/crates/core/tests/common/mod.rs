//! Brute-force oracles shared by the integration tests. Nothing here calls
//! the solver; everything is computed by enumerating trajectories.

#![allow(dead_code)]

use fetree::free_energy::TrajectoryUtilities;
use fetree::tree::{enumerate_trajectories, DecisionTree, Policy};

/// `Q(x_≤T)` for every trajectory, in enumeration order.
pub fn base_path_probs(tree: &DecisionTree) -> Vec<f64> {
    enumerate_trajectories(tree, &Policy::base(tree))
        .unwrap()
        .iter()
        .map(|t| t.probability)
        .collect()
}

/// `Q e^{αU(x_≤T)} / Z` over trajectories, computed in one shot.
pub fn global_boltzmann(
    tree: &DecisionTree,
    utilities: &TrajectoryUtilities,
    alpha: f64,
) -> Vec<f64> {
    let trajs = enumerate_trajectories(tree, &Policy::base(tree)).unwrap();
    let logs: Vec<f64> = trajs
        .iter()
        .map(|t| t.probability.ln() + alpha * utilities.get(t.leaf()))
        .collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter().map(|x| x / z).collect()
}

/// `(1/α) log Σ Q(x_≤T) e^{αU(x_≤T)}` by direct summation.
pub fn global_log_partition_value(
    tree: &DecisionTree,
    utilities: &TrajectoryUtilities,
    alpha: f64,
) -> f64 {
    let trajs = enumerate_trajectories(tree, &Policy::base(tree)).unwrap();
    let z: f64 = trajs
        .iter()
        .map(|t| t.probability * (alpha * utilities.get(t.leaf())).exp())
        .sum();
    z.ln() / alpha
}

/// Total reward (plus leaf value) of every trajectory.
pub fn path_returns(tree: &DecisionTree) -> Vec<f64> {
    enumerate_trajectories(tree, &Policy::base(tree))
        .unwrap()
        .iter()
        .map(|t| {
            let mut total = 0.0;
            for (&n, &e) in t.nodes.iter().zip(&t.edges) {
                total += tree.node(n).edges[e].r;
            }
            total + tree.node(t.leaf()).leaf_value
        })
        .collect()
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Max-of-expectations backup for a depth-2 tree (agent node over chance
/// nodes), written against the raw tree.
pub fn hand_bellman(tree: &DecisionTree) -> f64 {
    let root = tree.node(tree.root());
    root.edges
        .iter()
        .map(|a| {
            let chance = tree.node(a.child);
            a.r + chance
                .edges
                .iter()
                .map(|s| s.q * (s.r + tree.node(s.child).leaf_value))
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Sampling model with 2 to 6 outcomes, utility gaps in [0.1, 1] and
/// probabilities bounded away from 0.
pub fn random_model<R: rand::Rng>(rng: &mut R) -> fetree::sampling::SampleModel {
    use fetree::distribution::labels;
    use fetree::{Distribution, UtilityVector};
    use rand::seq::SliceRandom;
    let n = rng.gen_range(2..=6);
    let mut u = Vec::with_capacity(n);
    let mut level = rng.gen_range(-1.0..1.0);
    for _ in 0..n {
        u.push(level);
        level += rng.gen_range(0.1..=1.0);
    }
    u.shuffle(rng);
    let m: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let q: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    fetree::sampling::SampleModel::new(
        Distribution::from_weights(labels(n), m).unwrap(),
        Distribution::from_weights(labels(n), q).unwrap(),
        UtilityVector::new(labels(n), u).unwrap(),
    )
    .unwrap()
}
