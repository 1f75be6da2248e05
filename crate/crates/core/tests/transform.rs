mod common;

use fetree::free_energy::{
    global_equilibrium_policy, reward_transform, trajectory_free_energy, transform_tree,
    FreeEnergyMode, TrajectoryUtilities,
};
use fetree::random;
use fetree::solver::{equilibrium_trajectory_distribution, solve};
use fetree::tree::enumerate_trajectories;
use fetree::{DecisionTree, Error, InverseTemperature};
use proptest::prelude::*;
use rand::Rng;

fn uniform_tree(seed: u64, depth: usize, alpha: f64) -> DecisionTree {
    random::random_decision_tree(&mut random::rng(seed), depth, 1..=3, true, |_, _| {
        InverseTemperature::Finite(alpha)
    })
}

fn two_step() -> DecisionTree {
    DecisionTree::from_json(include_str!("fixtures/two_step_uniform.json")).unwrap()
}

fn path_probs(tree: &DecisionTree) -> Vec<f64> {
    equilibrium_trajectory_distribution(tree, &solve(tree))
        .unwrap()
        .iter()
        .map(|t| t.probability)
        .collect()
}

#[test]
fn same_temperature_leaves_utility_increments() {
    let tree = uniform_tree(1, 3, 1.5);
    let u = TrajectoryUtilities::from_rewards(&tree);
    let betas = vec![InverseTemperature::Finite(1.5); tree.len()];
    let out = transform_tree(&tree, &u, &betas).unwrap();
    for (a, b) in tree.nodes().iter().zip(out.nodes()) {
        for (ea, eb) in a.edges.iter().zip(&b.edges) {
            let du = u.get(ea.child) - u.get(a.id);
            assert!((eb.r - du).abs() < 1e-15);
        }
    }
}

#[test]
fn depth_one_heating_recovers_policy() {
    let tree = uniform_tree(2, 1, 1.0);
    let u = TrajectoryUtilities::from_rewards(&tree);
    let target = vec![InverseTemperature::Finite(2.0); tree.len()];
    let out = transform_tree(&tree, &u, &target).unwrap();
    let expected = common::global_boltzmann(&tree, &u, 1.0);
    let got = solve(&out).policy.row(out.root()).unwrap().probs().to_vec();
    for (g, e) in got.iter().zip(&expected) {
        assert!((g - e).abs() < 1e-10);
    }
}

#[test]
fn mixed_temperatures_keep_fixture_policy() {
    let tree = two_step();
    let u = TrajectoryUtilities::from_rewards(&tree);
    let mut betas = vec![InverseTemperature::Finite(1.0); tree.len()];
    betas[tree.find("0").unwrap().0] = InverseTemperature::Finite(3.0);
    betas[tree.find("1").unwrap().0] = InverseTemperature::Finite(0.5);
    let out = transform_tree(&tree, &u, &betas).unwrap();
    let oracle = common::global_boltzmann(&tree, &u, 1.0);
    assert!(common::total_variation(&path_probs(&out), &oracle) < 1e-10);
    let w = common::global_log_partition_value(&tree, &u, 1.0);
    assert!((solve(&out).root_value() + u.get(tree.root()) - w).abs() < 1e-10);
}

#[test]
fn zero_target_is_rejected() {
    let tree = two_step();
    let u = TrajectoryUtilities::from_rewards(&tree);
    let mut betas = vec![InverseTemperature::Finite(1.0); tree.len()];
    betas[tree.find("0").unwrap().0] = InverseTemperature::Zero;
    assert!(matches!(
        transform_tree(&tree, &u, &betas),
        Err(Error::ZeroTemperature(_))
    ));
}

#[test]
fn global_free_energy_of_equilibrium_is_log_partition() {
    for seed in 0..30 {
        let alpha = [0.5, 1.0, 2.0, -1.0][seed as usize % 4];
        let tree = uniform_tree(seed, 3, alpha);
        let u = TrajectoryUtilities::from_rewards(&tree);
        let a = InverseTemperature::Finite(alpha);
        let p = global_equilibrium_policy(&tree, &u, a).unwrap();
        let fe = trajectory_free_energy(&tree, &p, &u, a, FreeEnergyMode::Global).unwrap();
        let w = common::global_log_partition_value(&tree, &u, alpha);
        assert!((fe - w).abs() < 1e-10, "{fe} vs {w}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transformed_tree_reproduces_global_equilibrium(seed in 0u64..100_000) {
        let mut rng = random::rng(seed);
        let alpha = [0.5, 1.0, 2.0, -1.0][rng.gen_range(0..4)];
        let tree = uniform_tree(seed, 3, alpha);
        let u = TrajectoryUtilities::from_rewards(&tree);
        let mut betas: Vec<InverseTemperature> =
            (0..tree.len()).map(|_| random::nonzero_finite(&mut rng)).collect();
        let finite_only = rng.gen_bool(0.5);
        if !finite_only {
            for b in betas.iter_mut() {
                if rng.gen_bool(0.2) {
                    *b = if rng.gen_bool(0.5) { InverseTemperature::PosInf } else { InverseTemperature::NegInf };
                }
            }
        }
        let a = InverseTemperature::Finite(alpha);
        let p = global_equilibrium_policy(&tree, &u, a).unwrap();
        let out = reward_transform(&tree, &u, &p, a, &betas).unwrap();

        let w = common::global_log_partition_value(&tree, &u, alpha);
        prop_assert!((solve(&out).root_value() + u.get(tree.root()) - w).abs() < 1e-10);

        let global = trajectory_free_energy(&tree, &p, &u, a, FreeEnergyMode::Global).unwrap();
        let telescoped = trajectory_free_energy(&out, &p, &u, a, FreeEnergyMode::Telescoped).unwrap();
        prop_assert!((global - telescoped).abs() < 1e-10, "{global} vs {telescoped}");

        if finite_only {
            let oracle = common::global_boltzmann(&tree, &u, alpha);
            prop_assert!(common::total_variation(&path_probs(&out), &oracle) < 1e-10);
        }
    }

    #[test]
    fn global_policy_matches_brute_force(seed in 0u64..100_000) {
        let alpha = [0.5, 1.0, 2.0, -1.0][(seed % 4) as usize];
        let tree = uniform_tree(seed, 3, alpha);
        let u = TrajectoryUtilities::from_rewards(&tree);
        let p = global_equilibrium_policy(&tree, &u, InverseTemperature::Finite(alpha)).unwrap();
        let chained: Vec<f64> = enumerate_trajectories(&tree, &p).unwrap().iter().map(|t| t.probability).collect();
        prop_assert!(common::total_variation(&chained, &common::global_boltzmann(&tree, &u, alpha)) < 1e-10);
    }
}
