//! Backward recursion computing soft-extremum values and policies.
//!
//! Every internal node combines its continuation values `R + V(child)` with
//! its own inverse temperature:
//!
//! ```text
//! V(x_<t) = (1/β) log Σ Q exp{β [R + V(x_≤t)]}     finite β
//!         = Σ Q [R + V(x_≤t)]                       β = 0
//!         = max / min [R + V(x_≤t)]                 β = ±∞
//! ```
//!
//! with `V = leaf_value` at the leaves. At finite nodes `log Z` is reported
//! and the policy row is the Boltzmann distribution `Q e^{β(R+V)}/Z`; at the
//! limits the policy is `Q` itself (β = 0) or `Q` renormalized over the
//! arg-extremum set.

use rayon::prelude::*;

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::numeric::{node_operator, NodeOutput, TIE_TOLERANCE};
use crate::temperature::InverseTemperature;
use crate::tree::{enumerate_trajectories, DecisionTree, NodeId, Policy, Trajectory};

/// Per-node output of [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub value: Vec<f64>,
    /// `log Z` at finite-β nodes, 0 at leaves, `None` at limit nodes.
    pub log_partition: Vec<Option<f64>>,
    pub policy: Policy,
}

impl SolveResult {
    pub fn value(&self, id: NodeId) -> f64 {
        self.value[id.0]
    }

    pub fn root_value(&self) -> f64 {
        self.value[0]
    }

    pub fn log_partition(&self, id: NodeId) -> Option<f64> {
        self.log_partition[id.0]
    }
}

fn evaluate(tree: &DecisionTree, id: NodeId, value: &[f64]) -> NodeOutput {
    let node = tree.node(id);
    let q: Vec<f64> = node.edges.iter().map(|e| e.q).collect();
    let x: Vec<f64> = node.edges.iter().map(|e| e.r + value[e.child.0]).collect();
    node_operator(&q, &x, node.beta, TIE_TOLERANCE)
}

struct Tables {
    value: Vec<f64>,
    log_partition: Vec<Option<f64>>,
    rows: Vec<Option<Distribution>>,
}

impl Tables {
    fn new(tree: &DecisionTree) -> Self {
        let n = tree.len();
        let mut t = Self {
            value: vec![0.0; n],
            log_partition: vec![None; n],
            rows: vec![None; n],
        };
        for node in tree.nodes().iter().filter(|n| n.is_leaf()) {
            t.value[node.id.0] = node.leaf_value;
            t.log_partition[node.id.0] = Some(0.0);
        }
        t
    }

    fn store(&mut self, tree: &DecisionTree, id: NodeId, out: NodeOutput) {
        self.value[id.0] = out.value;
        self.log_partition[id.0] = out.log_partition;
        self.rows[id.0] = Some(Distribution::from_parts_unchecked(
            tree.node(id).labels(),
            out.weights,
        ));
    }

    fn finish(self) -> SolveResult {
        SolveResult {
            value: self.value,
            log_partition: self.log_partition,
            policy: Policy::from_rows_unchecked(self.rows),
        }
    }
}

/// Solves the tree leaves-to-root.
pub fn solve(tree: &DecisionTree) -> SolveResult {
    let mut tables = Tables::new(tree);
    // Preorder ids: every child has a larger id than its parent.
    for node in tree.nodes().iter().rev().filter(|n| !n.is_leaf()) {
        let out = evaluate(tree, node.id, &tables.value);
        tables.store(tree, node.id, out);
    }
    tables.finish()
}

/// Same result as [`solve`], bit for bit, with each depth level evaluated in
/// parallel. Each node is reduced sequentially in edge order, so the
/// schedule cannot change any value.
pub fn solve_parallel(tree: &DecisionTree) -> SolveResult {
    let mut tables = Tables::new(tree);
    for level in tree.levels().into_iter().rev() {
        let outputs: Vec<(NodeId, NodeOutput)> = level
            .par_iter()
            .filter(|&&id| !tree.node(id).is_leaf())
            .map(|&id| (id, evaluate(tree, id, &tables.value)))
            .collect();
        for (id, out) in outputs {
            tables.store(tree, id, out);
        }
    }
    tables.finish()
}

/// Chains the solved policy rows into a distribution over trajectories.
pub fn equilibrium_trajectory_distribution(
    tree: &DecisionTree,
    result: &SolveResult,
) -> Result<Vec<Trajectory>> {
    if result.value.len() != tree.len() || result.log_partition.len() != tree.len() {
        return Err(Error::InvalidArgument(format!(
            "solve result covers {} nodes, tree has {}",
            result.value.len(),
            tree.len()
        )));
    }
    enumerate_trajectories(tree, &result.policy)
}

/// Root value as the temperature of `node` is swept over `betas`.
pub fn value_curve(
    tree: &DecisionTree,
    node: NodeId,
    betas: &[InverseTemperature],
) -> Result<Vec<(InverseTemperature, f64)>> {
    if node.0 >= tree.len() {
        return Err(Error::UnknownNode(node.to_string()));
    }
    if tree.node(node).is_leaf() {
        return Err(Error::InvalidArgument(format!(
            "node `{}` is a leaf",
            tree.node(node).name
        )));
    }
    betas
        .iter()
        .map(|&b| Ok((b, solve(&tree.with_beta(node, b)?).root_value())))
        .collect()
}

/// Finite-β nodes where some exponent `|β (R + V)|` exceeds `threshold`
/// before shifting.
pub fn large_exponent_nodes(
    tree: &DecisionTree,
    result: &SolveResult,
    threshold: f64,
) -> Vec<NodeId> {
    tree.internal_nodes()
        .filter(|n| match n.beta {
            InverseTemperature::Finite(b) => n
                .edges
                .iter()
                .any(|e| (b * (e.r + result.value[e.child.0])).abs() > threshold),
            _ => false,
        })
        .map(|n| n.id)
        .collect()
}
