//! Solver for generalized decision trees in which every node carries its own
//! inverse temperature.
//!
//! A node with inverse temperature `β` aggregates its continuation values
//! with the soft extremum `(1/β) log Σ Q e^{β(R + V)}`. Taking `β` to `+∞`,
//! `0` or `−∞` recovers a max node, a chance node or a min node, so
//! Expectimax, Minimax, Expectiminimax and the Bellman backup are all special
//! cases of one backward recursion ([`solver::solve`]).
//!
//! ```
//! use fetree::{solver, DecisionTree};
//!
//! let tree = DecisionTree::from_json(r#"{
//!   "horizon": 1, "root": "s",
//!   "nodes": {
//!     "s": { "beta": 1, "edges": [
//!       { "label": "a", "q": 0.5, "r": 0, "child": "a" },
//!       { "label": "b", "q": 0.5, "r": 1, "child": "b" } ] },
//!     "a": {}, "b": {} } }"#).unwrap();
//! let result = solver::solve(&tree);
//! let e = std::f64::consts::E;
//! assert!((result.root_value() - ((1.0 + e) / 2.0).ln()).abs() < 1e-15);
//! ```

pub mod classic;
pub mod cli;
pub mod distribution;
pub mod error;
pub mod free_energy;
mod numeric;
pub mod output;
pub mod random;
pub mod sampling;
pub mod solver;
pub mod temperature;
pub mod tree;

pub use distribution::{Distribution, UtilityVector};
pub use error::{Error, Result};
pub use numeric::TIE_TOLERANCE;
pub use solver::SolveResult;
pub use temperature::InverseTemperature;
pub use tree::{
    build_tree, enumerate_trajectories, DecisionTree, NodeId, Policy, Trajectory, TreeSpec,
};
