//! Reference Expectimax, Minimax and Expectiminimax on trees whose internal
//! nodes are typed max / min / chance.
//!
//! This module keeps its own recursive tree representation and plain
//! recursion so it can serve as an oracle for [`crate::solver`].

use std::collections::HashSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::temperature::InverseTemperature;
use crate::tree::{DecisionTree, EdgeSpec, NodeSpec, TreeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Max,
    Min,
    Chance,
}

impl NodeKind {
    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Max => "max",
            NodeKind::Min => "min",
            NodeKind::Chance => "chance",
        }
    }

    /// Max → +∞, Min → −∞, Chance → 0.
    pub fn temperature(self) -> InverseTemperature {
        match self {
            NodeKind::Max => InverseTemperature::PosInf,
            NodeKind::Min => InverseTemperature::NegInf,
            NodeKind::Chance => InverseTemperature::Zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedEdge {
    pub label: String,
    pub q: f64,
    pub r: f64,
    pub child: TypedNode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedNode {
    pub name: String,
    /// `None` for leaves.
    pub kind: Option<NodeKind>,
    pub leaf_value: f64,
    pub edges: Vec<TypedEdge>,
}

impl TypedNode {
    pub fn leaf(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            kind: None,
            leaf_value: value,
            edges: Vec::new(),
        }
    }

    /// Internal node; `children` are `(q, r, child)` and labels are their
    /// positions.
    pub fn internal(
        name: impl Into<String>,
        kind: NodeKind,
        children: Vec<(f64, f64, TypedNode)>,
    ) -> Self {
        Self {
            name: name.into(),
            kind: Some(kind),
            leaf_value: 0.0,
            edges: children
                .into_iter()
                .enumerate()
                .map(|(i, (q, r, child))| TypedEdge {
                    label: i.to_string(),
                    q,
                    r,
                    child,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedTree {
    pub root: TypedNode,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TypedNodeSpec {
    #[serde(default)]
    kind: Option<NodeKind>,
    #[serde(default)]
    leaf_value: Option<f64>,
    #[serde(default)]
    edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TypedTreeSpec {
    horizon: i64,
    root: String,
    nodes: IndexMap<String, TypedNodeSpec>,
}

impl TypedTree {
    pub fn new(root: TypedNode) -> Self {
        Self { root }
    }

    /// Parses the tree JSON schema with `"kind"` in place of `"beta"`.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: TypedTreeSpec =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if spec.horizon < 1 {
            return Err(Error::InvalidHorizon);
        }
        let mut visited = HashSet::new();
        let root = build(&spec, &spec.root, &mut visited)?;
        if visited.len() != spec.nodes.len() {
            let orphan = spec.nodes.keys().find(|k| !visited.contains(*k)).unwrap();
            return Err(Error::Unreachable(orphan.clone()));
        }
        Ok(Self { root })
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn go(n: &TypedNode) -> usize {
            n.edges.iter().map(|e| 1 + go(&e.child)).max().unwrap_or(0)
        }
        go(&self.root)
    }

    /// Copy with every `from` node turned into `to`; nodes that become
    /// chance nodes get a uniform `q`.
    pub fn relaxed(&self, from: NodeKind, to: NodeKind) -> Self {
        fn go(n: &TypedNode, from: NodeKind, to: NodeKind) -> TypedNode {
            let mut out = n.clone();
            if n.kind == Some(from) {
                out.kind = Some(to);
                if to == NodeKind::Chance {
                    let k = out.edges.len() as f64;
                    for e in &mut out.edges {
                        e.q = 1.0 / k;
                    }
                }
            }
            for (e, orig) in out.edges.iter_mut().zip(&n.edges) {
                e.child = go(&orig.child, from, to);
            }
            out
        }
        Self {
            root: go(&self.root, from, to),
        }
    }

    /// The same tree with each kind mapped to its limit temperature.
    pub fn to_tree_spec(&self) -> TreeSpec {
        fn go(n: &TypedNode, nodes: &mut IndexMap<String, NodeSpec>) {
            nodes.insert(
                n.name.clone(),
                NodeSpec {
                    beta: n.kind.map(NodeKind::temperature),
                    leaf_value: n.kind.is_none().then_some(n.leaf_value),
                    edges: n
                        .edges
                        .iter()
                        .map(|e| EdgeSpec {
                            label: e.label.clone(),
                            q: e.q,
                            r: e.r,
                            child: e.child.name.clone(),
                        })
                        .collect(),
                },
            );
            for e in &n.edges {
                go(&e.child, nodes);
            }
        }
        let mut nodes = IndexMap::new();
        go(&self.root, &mut nodes);
        TreeSpec {
            horizon: self.depth() as i64,
            root: self.root.name.clone(),
            nodes,
        }
    }

    pub fn to_decision_tree(&self) -> Result<DecisionTree> {
        DecisionTree::from_spec(&self.to_tree_spec())
    }
}

fn build(spec: &TypedTreeSpec, name: &str, visited: &mut HashSet<String>) -> Result<TypedNode> {
    let ns = spec
        .nodes
        .get(name)
        .ok_or_else(|| Error::UnknownNode(name.to_string()))?;
    if !visited.insert(name.to_string()) {
        return Err(Error::NotATree(name.to_string()));
    }
    if ns.edges.is_empty() {
        return Ok(TypedNode::leaf(name, ns.leaf_value.unwrap_or(0.0)));
    }
    let kind = ns
        .kind
        .ok_or_else(|| Error::MissingTemperature(name.to_string()))?;
    if kind == NodeKind::Chance {
        let total: f64 = ns.edges.iter().map(|e| e.q).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized {
                node: name.to_string(),
                sum: total,
            });
        }
    }
    let mut edges = Vec::with_capacity(ns.edges.len());
    for e in &ns.edges {
        edges.push(TypedEdge {
            label: e.label.clone(),
            q: e.q,
            r: e.r,
            child: build(spec, &e.child, visited)?,
        });
    }
    Ok(TypedNode {
        name: name.to_string(),
        kind: Some(kind),
        leaf_value: 0.0,
        edges,
    })
}

fn value(n: &TypedNode) -> f64 {
    match n.kind {
        None => n.leaf_value,
        Some(NodeKind::Max) => {
            let mut best = f64::NEG_INFINITY;
            for e in &n.edges {
                let v = e.r + value(&e.child);
                if v > best {
                    best = v;
                }
            }
            best
        }
        Some(NodeKind::Min) => {
            let mut worst = f64::INFINITY;
            for e in &n.edges {
                let v = e.r + value(&e.child);
                if v < worst {
                    worst = v;
                }
            }
            worst
        }
        Some(NodeKind::Chance) => {
            let mut acc = 0.0;
            for e in &n.edges {
                acc += e.q * (e.r + value(&e.child));
            }
            acc
        }
    }
}

fn forbid(n: &TypedNode, kind: NodeKind, rule: &'static str) -> Result<()> {
    if n.kind == Some(kind) {
        return Err(Error::KindNotAllowed {
            kind: kind.name(),
            rule,
        });
    }
    n.edges
        .iter()
        .try_for_each(|e| forbid(&e.child, kind, rule))
}

/// Max and chance nodes only.
pub fn expectimax(t: &TypedTree) -> Result<f64> {
    forbid(&t.root, NodeKind::Min, "expectimax")?;
    Ok(value(&t.root))
}

/// Max and min nodes only.
pub fn minimax(t: &TypedTree) -> Result<f64> {
    forbid(&t.root, NodeKind::Chance, "minimax")?;
    Ok(value(&t.root))
}

pub fn expectiminimax(t: &TypedTree) -> Result<f64> {
    Ok(value(&t.root))
}

/// Bellman backup for an agent node over chance nodes:
/// `max_a { R(a) + Σ_s Q(s|a) [R(s|a) + V(s)] }`, written out as two nested
/// loops rather than through the generic recursion.
pub fn bellman_backup(t: &TypedTree) -> Result<f64> {
    let root = &t.root;
    if root.kind != Some(NodeKind::Max) {
        return Err(Error::InvalidArgument(
            "bellman root must be a max node".into(),
        ));
    }
    let mut best = f64::NEG_INFINITY;
    for action in &root.edges {
        let chance = &action.child;
        if chance.kind != Some(NodeKind::Chance) {
            return Err(Error::InvalidArgument(
                "bellman second level must be chance".into(),
            ));
        }
        let mut expected = 0.0;
        for outcome in &chance.edges {
            expected += outcome.q * (outcome.r + value(&outcome.child));
        }
        best = best.max(action.r + expected);
    }
    Ok(best)
}
