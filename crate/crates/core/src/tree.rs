//! Generalized decision trees: construction, validation, policies and
//! trajectory enumeration.
//!
//! Nodes live in an arena indexed by [`NodeId`]. Ids are assigned in
//! preorder from the root with children visited in edge order, so a parent
//! always has a smaller id than any of its descendants and iteration order
//! is fully determined by the input.

use std::collections::{HashMap, HashSet};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::distribution::{Distribution, NORMALIZATION_TOL};
use crate::error::{Error, Result};
use crate::temperature::InverseTemperature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Transition from a node to one of its children.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub label: String,
    /// Base probability `Q(x_t | x_<t)`, strictly positive.
    pub q: f64,
    /// Immediate reward `R(x_t | x_<t)`.
    pub r: f64,
    pub child: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    /// Identifier used in the JSON representation.
    pub name: String,
    pub beta: InverseTemperature,
    pub edges: Vec<Edge>,
    /// Terminal payoff; always 0 on internal nodes.
    pub leaf_value: f64,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.edges.iter().map(|e| e.label.clone()).collect()
    }

    pub fn base_probs(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.q).collect()
    }
}

/// A validated, immutable decision tree of uniform depth `horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    depth: Vec<usize>,
    parent: Vec<Option<NodeId>>,
    horizon: usize,
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub label: String,
    pub q: f64,
    pub r: f64,
    pub child: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    /// Required on internal nodes; leaves may omit it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<InverseTemperature>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaf_value: Option<f64>,
    #[serde(default)]
    pub edges: Vec<EdgeSpec>,
}

/// Serialized tree description, as read from and written to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSpec {
    pub horizon: i64,
    pub root: String,
    pub nodes: IndexMap<String, NodeSpec>,
}

impl TreeSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree spec serializes")
    }
}

/// Validates a tree description and lays it out in the arena.
pub fn build_tree(spec: &TreeSpec) -> Result<DecisionTree> {
    DecisionTree::from_spec(spec)
}

impl DecisionTree {
    pub fn from_spec(spec: &TreeSpec) -> Result<Self> {
        if spec.horizon < 1 {
            return Err(Error::InvalidHorizon);
        }
        let horizon = spec.horizon as usize;
        if !spec.nodes.contains_key(&spec.root) {
            return Err(Error::UnknownNode(spec.root.clone()));
        }

        // Preorder layout; a name seen twice means a second parent or a cycle.
        let mut order: Vec<(&str, usize, Option<NodeId>)> = Vec::with_capacity(spec.nodes.len());
        let mut ids: HashMap<&str, NodeId> = HashMap::with_capacity(spec.nodes.len());
        let mut seen: HashSet<&str> = HashSet::with_capacity(spec.nodes.len());
        let mut stack: Vec<(&str, usize, Option<NodeId>)> = vec![(spec.root.as_str(), 0, None)];
        seen.insert(spec.root.as_str());
        while let Some((name, depth, parent)) = stack.pop() {
            let id = NodeId(order.len());
            ids.insert(name, id);
            order.push((name, depth, parent));
            let node = &spec.nodes[name];
            for edge in node.edges.iter().rev() {
                let child = edge.child.as_str();
                if !spec.nodes.contains_key(child) {
                    return Err(Error::UnknownNode(child.to_string()));
                }
                if !seen.insert(child) {
                    return Err(Error::NotATree(child.to_string()));
                }
                stack.push((child, depth + 1, Some(id)));
            }
        }
        if let Some(orphan) = spec.nodes.keys().find(|k| !seen.contains(k.as_str())) {
            return Err(Error::Unreachable(orphan.clone()));
        }

        let mut nodes = Vec::with_capacity(order.len());
        let mut depths = Vec::with_capacity(order.len());
        let mut parents = Vec::with_capacity(order.len());
        for (index, &(name, depth, parent)) in order.iter().enumerate() {
            let ns = &spec.nodes[name];
            let leaf_value = ns.leaf_value.unwrap_or(0.0);
            if !leaf_value.is_finite() {
                return Err(Error::NonFinite {
                    node: name.to_string(),
                    what: "leaf_value",
                });
            }
            let is_leaf = ns.edges.is_empty();
            if is_leaf {
                if depth != horizon {
                    return Err(Error::NonUniformDepth {
                        node: name.to_string(),
                        depth,
                        horizon,
                    });
                }
            } else {
                if leaf_value != 0.0 {
                    return Err(Error::LeafValueOnInternal(name.to_string()));
                }
                if ns.beta.is_none() {
                    return Err(Error::MissingTemperature(name.to_string()));
                }
            }
            let edges = validate_edges(name, &ns.edges, &ids)?;
            nodes.push(Node {
                id: NodeId(index),
                name: name.to_string(),
                beta: ns.beta.unwrap_or(InverseTemperature::Zero),
                edges,
                leaf_value,
            });
            depths.push(depth);
            parents.push(parent);
        }

        Ok(Self {
            nodes,
            depth: depths,
            parent: parents,
            horizon,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_spec(&TreeSpec::from_json(text)?)
    }

    /// Serializable description; nodes are listed in arena order.
    pub fn to_spec(&self) -> TreeSpec {
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                let spec = NodeSpec {
                    beta: Some(n.beta),
                    leaf_value: n.is_leaf().then_some(n.leaf_value),
                    edges: n
                        .edges
                        .iter()
                        .map(|e| EdgeSpec {
                            label: e.label.clone(),
                            q: e.q,
                            r: e.r,
                            child: self.nodes[e.child.0].name.clone(),
                        })
                        .collect(),
                };
                (n.name.clone(), spec)
            })
            .collect();
        TreeSpec {
            horizon: self.horizon as i64,
            root: self.nodes[0].name.clone(),
            nodes,
        }
    }

    pub fn to_json(&self) -> String {
        self.to_spec().to_json()
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self, id: NodeId) -> usize {
        self.depth[id.0]
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.parent[id.0]
    }

    pub fn find(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.name == name).map(|n| n.id)
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| !n.is_leaf())
    }

    /// Node ids grouped by depth, `0..=horizon`.
    pub fn levels(&self) -> Vec<Vec<NodeId>> {
        let mut levels = vec![Vec::new(); self.horizon + 1];
        for n in &self.nodes {
            levels[self.depth[n.id.0]].push(n.id);
        }
        levels
    }

    /// Copy of the tree with one node's temperature replaced.
    pub fn with_beta(&self, id: NodeId, beta: InverseTemperature) -> Result<Self> {
        if id.0 >= self.nodes.len() {
            return Err(Error::UnknownNode(id.to_string()));
        }
        let mut tree = self.clone();
        tree.nodes[id.0].beta = beta;
        Ok(tree)
    }

    /// Copy of the tree with every internal node at temperature `beta`.
    pub fn with_uniform_beta(&self, beta: InverseTemperature) -> Self {
        let mut tree = self.clone();
        for n in tree.nodes.iter_mut().filter(|n| !n.edges.is_empty()) {
            n.beta = beta;
        }
        tree
    }

    pub(crate) fn nodes_mut(&mut self) -> &mut [Node] {
        &mut self.nodes
    }
}

fn validate_edges(
    name: &str,
    specs: &[EdgeSpec],
    ids: &HashMap<&str, NodeId>,
) -> Result<Vec<Edge>> {
    let mut labels = HashSet::with_capacity(specs.len());
    let mut edges = Vec::with_capacity(specs.len());
    let mut sum = 0.0;
    for e in specs {
        if !labels.insert(e.label.as_str()) {
            return Err(Error::DuplicateLabel {
                node: name.to_string(),
                label: e.label.clone(),
            });
        }
        if !(e.q.is_finite() && e.q > 0.0 && e.q <= 1.0) {
            return Err(Error::InvalidProbability {
                node: name.to_string(),
                label: e.label.clone(),
                q: e.q,
            });
        }
        if !e.r.is_finite() {
            return Err(Error::NonFinite {
                node: name.to_string(),
                what: "reward",
            });
        }
        sum += e.q;
        edges.push(Edge {
            label: e.label.clone(),
            q: e.q,
            r: e.r,
            child: ids[e.child.as_str()],
        });
    }
    if !specs.is_empty() && (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized {
            node: name.to_string(),
            sum,
        });
    }
    Ok(edges)
}

// ---------------------------------------------------------------------------
// Policies and trajectories
// ---------------------------------------------------------------------------

/// One conditional distribution over edges per internal node.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    rows: Vec<Option<Distribution>>,
}

impl Policy {
    /// Validates that every internal node has a row over its edge labels.
    pub fn from_rows(tree: &DecisionTree, rows: Vec<Option<Distribution>>) -> Result<Self> {
        let policy = Self { rows };
        policy.check_against(tree)?;
        Ok(policy)
    }

    /// Rows built from raw per-edge weights in edge order (leaves: empty).
    pub fn from_edge_probs(tree: &DecisionTree, probs: Vec<Vec<f64>>) -> Result<Self> {
        if probs.len() != tree.len() {
            return Err(Error::Policy(format!(
                "{} rows for {} nodes",
                probs.len(),
                tree.len()
            )));
        }
        let rows = tree
            .nodes()
            .iter()
            .zip(probs)
            .map(|(n, p)| {
                if n.is_leaf() {
                    Ok(None)
                } else {
                    Distribution::new(n.labels(), p)
                        .map(Some)
                        .map_err(|e| Error::Policy(format!("node `{}`: {e}", n.name)))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(tree, rows)
    }

    /// The uncontrolled dynamics: every row equals `Q`.
    pub fn base(tree: &DecisionTree) -> Self {
        let rows = tree
            .nodes()
            .iter()
            .map(|n| {
                (!n.is_leaf())
                    .then(|| Distribution::from_parts_unchecked(n.labels(), n.base_probs()))
            })
            .collect();
        Self { rows }
    }

    pub fn uniform(tree: &DecisionTree) -> Self {
        let rows = tree
            .nodes()
            .iter()
            .map(|n| {
                (!n.is_leaf()).then(|| {
                    let k = n.edges.len();
                    Distribution::from_parts_unchecked(n.labels(), vec![1.0 / k as f64; k])
                })
            })
            .collect();
        Self { rows }
    }

    pub(crate) fn from_rows_unchecked(rows: Vec<Option<Distribution>>) -> Self {
        Self { rows }
    }

    pub fn row(&self, id: NodeId) -> Option<&Distribution> {
        self.rows.get(id.0).and_then(|r| r.as_ref())
    }

    pub fn rows(&self) -> &[Option<Distribution>] {
        &self.rows
    }

    /// Probability of taking edge `edge` at `node`.
    pub fn edge_prob(&self, node: NodeId, edge: usize) -> f64 {
        self.rows[node.0].as_ref().map_or(0.0, |r| r.probs()[edge])
    }

    pub fn check_against(&self, tree: &DecisionTree) -> Result<()> {
        if self.rows.len() != tree.len() {
            return Err(Error::Policy(format!(
                "policy has {} rows, tree has {} nodes",
                self.rows.len(),
                tree.len()
            )));
        }
        for n in tree.internal_nodes() {
            let row = self.rows[n.id.0]
                .as_ref()
                .ok_or_else(|| Error::Policy(format!("missing row for node `{}`", n.name)))?;
            if row.len() != n.edges.len()
                || row
                    .support()
                    .iter()
                    .zip(&n.edges)
                    .any(|(l, e)| *l != e.label)
            {
                return Err(Error::Policy(format!(
                    "row for node `{}` does not match its edges",
                    n.name
                )));
            }
            let sum: f64 = row.probs().iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::Policy(format!(
                    "row for node `{}` sums to {sum}",
                    n.name
                )));
            }
        }
        Ok(())
    }
}

/// A root-to-leaf path with its probability under some policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `(x_1, …, x_T)`.
    pub labels: Vec<String>,
    /// Visited nodes from the root to the leaf (`T + 1` entries).
    pub nodes: Vec<NodeId>,
    /// Edge index taken at each step (`T` entries).
    pub edges: Vec<usize>,
    pub probability: f64,
}

impl Trajectory {
    pub fn leaf(&self) -> NodeId {
        *self.nodes.last().expect("trajectory has at least the root")
    }

    /// `(parent, edge)` pairs along the path.
    pub fn steps<'a>(
        &'a self,
        tree: &'a DecisionTree,
    ) -> impl Iterator<Item = (&'a Node, &'a Edge)> {
        self.nodes.iter().zip(&self.edges).map(move |(&n, &e)| {
            let node = tree.node(n);
            (node, &node.edges[e])
        })
    }
}

/// All root-to-leaf paths in edge order, weighted by `policy`.
pub fn enumerate_trajectories(tree: &DecisionTree, policy: &Policy) -> Result<Vec<Trajectory>> {
    policy.check_against(tree)?;
    let mut out = Vec::new();
    let mut nodes = vec![tree.root()];
    let mut edges = Vec::with_capacity(tree.horizon());
    let mut labels = Vec::with_capacity(tree.horizon());
    walk(
        tree,
        policy,
        1.0,
        &mut nodes,
        &mut edges,
        &mut labels,
        &mut out,
    );
    Ok(out)
}

fn walk(
    tree: &DecisionTree,
    policy: &Policy,
    prob: f64,
    nodes: &mut Vec<NodeId>,
    edges: &mut Vec<usize>,
    labels: &mut Vec<String>,
    out: &mut Vec<Trajectory>,
) {
    let node = tree.node(*nodes.last().unwrap());
    if node.is_leaf() {
        out.push(Trajectory {
            labels: labels.clone(),
            nodes: nodes.clone(),
            edges: edges.clone(),
            probability: prob,
        });
        return;
    }
    for (i, e) in node.edges.iter().enumerate() {
        nodes.push(e.child);
        edges.push(i);
        labels.push(e.label.clone());
        walk(
            tree,
            policy,
            prob * policy.edge_prob(node.id, i),
            nodes,
            edges,
            labels,
            out,
        );
        labels.pop();
        edges.pop();
        nodes.pop();
    }
}
