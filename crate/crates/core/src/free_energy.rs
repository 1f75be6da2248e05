//! Free-energy machinery for a single decision variable and its lift to
//! whole trajectories of a decision tree.
//!
//! For a base distribution `Q`, utilities `U` and inverse temperature `α`:
//!
//! * the equilibrium distribution is `P(x) ∝ Q(x) e^{αU(x)}`;
//! * the free energy of any `P` is `Σ P U − (1/α) Σ P log(P/Q)`;
//! * its extremum is the soft maximum `(1/α) log Σ Q e^{αU}`, which becomes
//!   `max U`, `E_Q[U]` and `min U` for `α = +∞, 0, −∞`.

use crate::distribution::{require_same_support, Distribution, UtilityVector};
use crate::error::{Error, Result};
use crate::numeric::{node_operator, TIE_TOLERANCE};
use crate::solver;
use crate::temperature::InverseTemperature;
use crate::tree::{enumerate_trajectories, DecisionTree, NodeId, Policy};

/// Utility `U(x_≤t)` attached to every node of a tree, including `U(ε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryUtilities {
    values: Vec<f64>,
}

impl TrajectoryUtilities {
    pub fn new(tree: &DecisionTree, values: Vec<f64>) -> Result<Self> {
        if values.len() != tree.len() {
            return Err(Error::InvalidArgument(format!(
                "{} utilities for {} nodes",
                values.len(),
                tree.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite utility".into()));
        }
        Ok(Self { values })
    }

    /// Accumulates rewards from the root (`U(ε) = 0`) and adds each leaf's
    /// terminal value, so `U(x_≤T)` is the total payoff of the path.
    pub fn from_rewards(tree: &DecisionTree) -> Self {
        let mut values = vec![0.0; tree.len()];
        for node in tree.nodes() {
            for e in &node.edges {
                values[e.child.0] = values[node.id.0] + e.r;
            }
            if node.is_leaf() {
                values[node.id.0] += node.leaf_value;
            }
        }
        Self { values }
    }

    pub fn get(&self, id: NodeId) -> f64 {
        self.values[id.0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Which side of the trajectory free-energy identity to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeEnergyMode {
    /// `Σ P(x_≤T) [U(x_≤T) − (1/α) log(P/Q)(x_≤T)]`.
    Global,
    /// `U(ε) + Σ P(x_≤T) Σ_t [R − (1/β(x_<t)) log(P_t/Q_t)]` with the tree's
    /// own rewards and temperatures.
    Telescoped,
}

fn check_pair(q: &Distribution, u: &UtilityVector) -> Result<()> {
    require_same_support(q.support(), u.support())?;
    if let Some(i) = q.probs().iter().position(|&p| p <= 0.0) {
        return Err(Error::ZeroProbability(q.support()[i].clone()));
    }
    Ok(())
}

/// `P(x) ∝ Q(x) e^{αU(x)}`; limits use `Q` renormalized over the
/// arg-extremum set (ties within `tie_tol`).
pub fn equilibrium_distribution_with_tolerance(
    q: &Distribution,
    u: &UtilityVector,
    alpha: InverseTemperature,
    tie_tol: f64,
) -> Result<Distribution> {
    check_pair(q, u)?;
    let out = node_operator(q.probs(), u.values(), alpha, tie_tol);
    Ok(Distribution::from_parts_unchecked(
        q.support().to_vec(),
        out.weights,
    ))
}

pub fn equilibrium_distribution(
    q: &Distribution,
    u: &UtilityVector,
    alpha: InverseTemperature,
) -> Result<Distribution> {
    equilibrium_distribution_with_tolerance(q, u, alpha, TIE_TOLERANCE)
}

/// Free energy of an arbitrary choice distribution `p`.
///
/// At `α = ±∞` the information term vanishes. At `α = 0` the functional is
/// only defined when `p = q`; any divergence makes it unbounded.
pub fn free_energy_value(
    p: &Distribution,
    q: &Distribution,
    u: &UtilityVector,
    alpha: InverseTemperature,
) -> Result<f64> {
    require_same_support(p.support(), q.support())?;
    require_same_support(p.support(), u.support())?;
    let mut expected = 0.0;
    let mut divergence = 0.0;
    for ((label, &pi), (&qi, &ui)) in p
        .support()
        .iter()
        .zip(p.probs())
        .zip(q.probs().iter().zip(u.values()))
    {
        if pi == 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return Err(Error::NotAbsolutelyContinuous(label.clone()));
        }
        expected += pi * ui;
        divergence += pi * (pi / qi).ln();
    }
    match alpha.reciprocal() {
        Some(inv) => Ok(expected - inv * divergence),
        None if divergence.abs() < 1e-15 => Ok(expected),
        None => Err(Error::ZeroTemperature(format!(
            "free energy diverges for p != q (KL = {divergence})"
        ))),
    }
}

/// `(1/α) log Σ Q e^{αU}` and its exact limits. Always within `[min U, max U]`.
pub fn extremum_value(
    q: &Distribution,
    u: &UtilityVector,
    alpha: InverseTemperature,
) -> Result<f64> {
    check_pair(q, u)?;
    Ok(node_operator(q.probs(), u.values(), alpha, TIE_TOLERANCE).value)
}

/// Utilities that keep `p` as the equilibrium after moving from `α` to `β`:
/// `V = U − (1/α − 1/β) log(p/q)`.
pub fn temperature_change_utility(
    u: &UtilityVector,
    p: &Distribution,
    q: &Distribution,
    alpha: InverseTemperature,
    beta: InverseTemperature,
) -> Result<UtilityVector> {
    require_same_support(u.support(), p.support())?;
    require_same_support(u.support(), q.support())?;
    let inv_alpha = alpha
        .reciprocal()
        .ok_or_else(|| Error::ZeroTemperature("source temperature".into()))?;
    let inv_beta = beta
        .reciprocal()
        .ok_or_else(|| Error::ZeroTemperature("target temperature".into()))?;
    let mut values = Vec::with_capacity(u.len());
    for (i, label) in u.support().iter().enumerate() {
        let (pi, qi) = (p.probs()[i], q.probs()[i]);
        if pi <= 0.0 || qi <= 0.0 {
            return Err(Error::ZeroProbability(label.clone()));
        }
        values.push(u.values()[i] - (inv_alpha - inv_beta) * (pi / qi).ln());
    }
    UtilityVector::new(u.support().to_vec(), values)
}

fn uniform_finite_alpha(tree: &DecisionTree) -> Result<f64> {
    let mut alpha = None;
    for n in tree.internal_nodes() {
        match (n.beta, alpha) {
            (InverseTemperature::Finite(b), None) => alpha = Some(b),
            (InverseTemperature::Finite(b), Some(a)) if b == a => {}
            _ => {
                return Err(Error::InvalidTemperature(format!(
                "source tree must carry one finite temperature on every node (node `{}` has {})",
                n.name, n.beta
            )))
            }
        }
    }
    alpha.ok_or_else(|| Error::InvalidArgument("tree has no internal nodes".into()))
}

/// Conditionals `P(x_t|x_<t)` of the trajectory Boltzmann distribution
/// `P(x_≤T) ∝ Q(x_≤T) e^{αU(x_≤T)}`, obtained by running the backward
/// recursion on a copy of the tree whose rewards are the utility increments.
pub fn global_equilibrium_policy(
    tree: &DecisionTree,
    utilities: &TrajectoryUtilities,
    alpha: InverseTemperature,
) -> Result<Policy> {
    if !alpha.is_finite() {
        return Err(Error::InvalidTemperature(format!(
            "global equilibrium needs a finite temperature, got {alpha}"
        )));
    }
    let mut increments = tree.with_uniform_beta(alpha);
    for node in increments.nodes_mut() {
        let here = utilities.get(node.id);
        for e in &mut node.edges {
            e.r = utilities.get(e.child) - here;
        }
        node.leaf_value = 0.0;
    }
    Ok(solver::solve(&increments).policy)
}

/// Rewrites the edge rewards so that `policy` stays put when each node moves
/// from temperature `α` to `target_betas[node]`:
/// `R = [U(x_≤t) − U(x_<t)] − (1/α − 1/β(x_<t)) log(P/Q)`.
/// Leaf values of the output are 0; `target_betas` is indexed by node id and
/// entries for leaves are ignored.
pub fn reward_transform(
    tree: &DecisionTree,
    utilities: &TrajectoryUtilities,
    policy: &Policy,
    alpha: InverseTemperature,
    target_betas: &[InverseTemperature],
) -> Result<DecisionTree> {
    policy.check_against(tree)?;
    if target_betas.len() != tree.len() {
        return Err(Error::InvalidArgument(format!(
            "{} target temperatures for {} nodes",
            target_betas.len(),
            tree.len()
        )));
    }
    let inv_alpha = alpha
        .reciprocal()
        .ok_or_else(|| Error::ZeroTemperature("source temperature".into()))?;
    let mut out = tree.clone();
    for node in out.nodes_mut() {
        node.leaf_value = 0.0;
        if node.edges.is_empty() {
            continue;
        }
        let beta = target_betas[node.id.0];
        let inv_beta = beta.reciprocal().ok_or_else(|| {
            Error::ZeroTemperature(format!("target temperature at node `{}`", node.name))
        })?;
        node.beta = beta;
        let here = utilities.get(node.id);
        for (i, e) in node.edges.iter_mut().enumerate() {
            let p = policy.edge_prob(node.id, i);
            if p <= 0.0 {
                return Err(Error::ZeroProbability(format!("{}/{}", node.name, e.label)));
            }
            e.r = (utilities.get(e.child) - here) - (inv_alpha - inv_beta) * (p / e.q).ln();
        }
    }
    Ok(out)
}

/// Translates a uniform-temperature tree into one with per-node
/// temperatures `target_betas` that has the same equilibrium policy.
pub fn transform_tree(
    tree: &DecisionTree,
    utilities: &TrajectoryUtilities,
    target_betas: &[InverseTemperature],
) -> Result<DecisionTree> {
    let alpha = InverseTemperature::Finite(uniform_finite_alpha(tree)?);
    let policy = global_equilibrium_policy(tree, utilities, alpha)?;
    reward_transform(tree, utilities, &policy, alpha, target_betas)
}

/// Free energy of the trajectory distribution induced by `p`, evaluated
/// either globally or as the per-step reward decomposition.
pub fn trajectory_free_energy(
    tree: &DecisionTree,
    p: &Policy,
    utilities: &TrajectoryUtilities,
    alpha: InverseTemperature,
    mode: FreeEnergyMode,
) -> Result<f64> {
    let inv_alpha = match alpha {
        InverseTemperature::Finite(a) => 1.0 / a,
        other => {
            return Err(Error::InvalidTemperature(format!(
                "trajectory free energy needs a finite temperature, got {other}"
            )))
        }
    };
    let trajectories = enumerate_trajectories(tree, p)?;
    let mut total = 0.0;
    for traj in &trajectories {
        let mut log_ratio = 0.0;
        let mut steps = 0.0;
        for (&id, &idx) in traj.nodes.iter().zip(&traj.edges) {
            let node = tree.node(id);
            let edge = &node.edges[idx];
            let pt = p.edge_prob(id, idx);
            if pt <= 0.0 {
                return Err(Error::ZeroProbability(format!(
                    "{}/{}",
                    node.name, edge.label
                )));
            }
            let lr = (pt / edge.q).ln();
            match mode {
                FreeEnergyMode::Global => log_ratio += lr,
                FreeEnergyMode::Telescoped => {
                    let inv_beta = node
                        .beta
                        .reciprocal()
                        .ok_or_else(|| Error::ZeroTemperature(format!("node `{}`", node.name)))?;
                    steps += edge.r - inv_beta * lr;
                }
            }
        }
        total += traj.probability
            * match mode {
                FreeEnergyMode::Global => utilities.get(traj.leaf()) - inv_alpha * log_ratio,
                FreeEnergyMode::Telescoped => steps,
            };
    }
    Ok(match mode {
        FreeEnergyMode::Global => total,
        FreeEnergyMode::Telescoped => utilities.get(tree.root()) + total,
    })
}
