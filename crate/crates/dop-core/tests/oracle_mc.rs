//! Monte Carlo cross-checks: simulated incomes must agree with the exact
//! expected utilities, and mirrored attacks must produce bit-identical
//! simulations because the same rounds trigger the same exclusion.

use dop_core::game::utilities_under_profile;
use dop_core::simulator::{
    compare_to_closed_form, ethereum_expected_utilities, simulate, simulate_ethereum, SimConfig,
};
use dop_core::systems::{CosmosParams, CosmosReward, EthereumParams};
use dop_core::{PowerDistribution, RewardSpec, StrategyProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn mirrored_attacks_simulate_bit_identically() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let catalog = RewardSpec::catalog_defaults();
    for trial in 0..20usize {
        let attacker_power = rng.random_range(0.02..1.0 / 3.0);
        let victim_power = rng.random_range(0.02..1.0 / 3.0);
        let dist = PowerDistribution::pair_with_fillers(attacker_power, victim_power).unwrap();
        let spec = catalog[trial % catalog.len()];
        let reward = spec.build();
        let omission = StrategyProfile::omission(0, 1).unwrap();
        let delay = StrategyProfile::delay(1, 0).unwrap();
        let cfg = SimConfig { rounds: 100_000, seed: 1000 + trial as u64 };
        let sim_om = simulate(&dist, &omission, reward.as_ref(), cfg).unwrap();
        let sim_dl = simulate(&dist, &delay, reward.as_ref(), cfg).unwrap();
        assert_eq!(
            sim_om,
            sim_dl,
            "trial {trial}: {} mirror runs diverged",
            spec.label()
        );
    }
}

#[test]
fn cosmos_omission_run_matches_expected_utilities() {
    let dist = PowerDistribution::pair_with_fillers(0.25, 0.15).unwrap();
    let params = CosmosParams::default();
    let reward = CosmosReward(params);
    let omission = StrategyProfile::omission(0, 1).unwrap();
    let sim = simulate(&dist, &omission, &reward, SimConfig::default()).unwrap();
    let expected = utilities_under_profile(&dist, &omission, &reward).unwrap();
    let report = compare_to_closed_form(&sim, expected.as_slice()).unwrap();
    assert!(report.pass, "z-scores {:?}", report.z_scores);
    // The pool pays out in full every round, not just on average.
    assert!((sim.min_round_total - params.rmax).abs() < 1e-12);
    assert!((sim.max_round_total - params.rmax).abs() < 1e-12);
}

#[test]
fn cosmos_honest_run_matches_expected_utilities() {
    let dist = PowerDistribution::new(vec![0.3, 0.25, 0.25, 0.2]).unwrap();
    let reward = CosmosReward(CosmosParams::default());
    let cfg = SimConfig { rounds: 300_000, seed: 5 };
    let sim = simulate(&dist, &StrategyProfile::Honest, &reward, cfg).unwrap();
    let expected = utilities_under_profile(&dist, &StrategyProfile::Honest, &reward).unwrap();
    let report = compare_to_closed_form(&sim, expected.as_slice()).unwrap();
    assert!(report.pass, "z-scores {:?}", report.z_scores);
}

#[test]
fn ethereum_omission_sampler_matches_the_rounded_model() {
    let dist = PowerDistribution::pair_with_fillers(0.21, 0.10).unwrap();
    let params = EthereumParams::default();
    let omission = StrategyProfile::omission(0, 1).unwrap();
    let sim = simulate_ethereum(&dist, &omission, &params, SimConfig::default()).unwrap();
    let expected = ethereum_expected_utilities(&dist, &omission, &params).unwrap();
    let report = compare_to_closed_form(&sim, expected.as_slice()).unwrap();
    assert!(report.pass, "z-scores {:?}", report.z_scores);
}

#[test]
fn ethereum_delay_run_matches_expected_utilities() {
    let dist = PowerDistribution::pair_with_fillers(0.15, 0.30).unwrap();
    let params = EthereumParams::default();
    let delay = StrategyProfile::delay(0, 1).unwrap();
    let cfg = SimConfig { rounds: 300_000, seed: 13 };
    let sim = simulate_ethereum(&dist, &delay, &params, cfg).unwrap();
    let expected = ethereum_expected_utilities(&dist, &delay, &params).unwrap();
    let report = compare_to_closed_form(&sim, expected.as_slice()).unwrap();
    assert!(report.pass, "z-scores {:?}", report.z_scores);
}
