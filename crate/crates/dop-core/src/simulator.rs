//! Round-by-round Monte Carlo simulation of the vote collection game.
//!
//! The simulator exists to validate closed-form utilities, so it is built
//! for reproducibility: every round draws from its own counter-derived RNG
//! stream, and rounds are aggregated in fixed-size blocks that are folded in
//! block order. Results are bit-identical across runs and across worker
//! thread counts.

use crate::error::{invalid, Result};
use crate::game::{
    exclusion, utilities_under_profile_feasible, AttackKind, PowerDistribution, RewardFunction,
    RewardInputs, StrategyProfile, UtilityVector,
};
use crate::systems::{EthereumParams, EthereumReward};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Rounds per aggregation block. Fixed so that results do not depend on how
/// blocks are distributed over threads.
const BLOCK_ROUNDS: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub rounds: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(rounds: u64, seed: u64) -> Result<Self> {
        if rounds == 0 {
            return Err(invalid("simulation needs at least one round"));
        }
        Ok(Self { rounds, seed })
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { rounds: 1_000_000, seed: 7 }
    }
}

/// Per-player simulation summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    pub mean_utility: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    pub rounds: u64,
    pub min_round_payout: f64,
    pub max_round_payout: f64,
}

/// Simulation summary for all players plus round-total extremes, which pin
/// down budget-conservation properties exactly instead of on average.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub players: Vec<SimResult>,
    pub min_round_total: f64,
    pub max_round_total: f64,
}

impl SimOutcome {
    pub fn means(&self) -> Vec<f64> {
        self.players.iter().map(|p| p.mean_utility).collect()
    }
}

struct BlockAccumulator {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    min: Vec<f64>,
    max: Vec<f64>,
    min_total: f64,
    max_total: f64,
}

impl BlockAccumulator {
    fn new(players: usize) -> Self {
        Self {
            sum: vec![0.0; players],
            sum_sq: vec![0.0; players],
            min: vec![f64::INFINITY; players],
            max: vec![f64::NEG_INFINITY; players],
            min_total: f64::INFINITY,
            max_total: f64::NEG_INFINITY,
        }
    }

    fn fold(mut self, other: &BlockAccumulator) -> Self {
        for p in 0..self.sum.len() {
            self.sum[p] += other.sum[p];
            self.sum_sq[p] += other.sum_sq[p];
            self.min[p] = self.min[p].min(other.min[p]);
            self.max[p] = self.max[p].max(other.max[p]);
        }
        self.min_total = self.min_total.min(other.min_total);
        self.max_total = self.max_total.max(other.max_total);
        self
    }
}

fn pick_leader(powers: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in powers.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    powers.len() - 1
}

/// Simulate `cfg.rounds` rounds. `omission_trial` is consulted once per
/// round in which the attacker leads and plans a leader-side omission; it
/// returns whether the omission goes through that round.
fn simulate_rounds<R, F>(
    dist: &PowerDistribution,
    profile: &StrategyProfile,
    reward: &R,
    cfg: SimConfig,
    omission_trial: F,
) -> Result<SimOutcome>
where
    R: RewardFunction + Sync + ?Sized,
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    profile.validate_for(dist)?;
    let powers = dist.powers();
    let n = powers.len();
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let blocks = cfg.rounds.div_ceil(BLOCK_ROUNDS);
    let wants_omission = matches!(
        profile.kind(),
        Some(AttackKind::Omission) | Some(AttackKind::Combined)
    );

    let acc = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut acc = BlockAccumulator::new(n);
            let first = block * BLOCK_ROUNDS;
            let last = (first + BLOCK_ROUNDS).min(cfg.rounds);
            for round in first..last {
                let mut rng = base.clone();
                rng.set_stream(round);
                let leader = pick_leader(powers, &mut rng);
                let (mut excluded, leader_side) = exclusion(profile, leader);
                if leader_side && wants_omission && !omission_trial(&mut rng) {
                    excluded = None;
                }
                let included_power = match excluded {
                    None => 1.0,
                    Some(e) => 1.0 - powers[e],
                };
                let mut total = 0.0;
                for (player, &own_power) in powers.iter().enumerate() {
                    let pay = reward.reward(&RewardInputs {
                        is_leader: player == leader,
                        is_included: excluded != Some(player),
                        own_power,
                        included_power,
                    });
                    acc.sum[player] += pay;
                    acc.sum_sq[player] += pay * pay;
                    acc.min[player] = acc.min[player].min(pay);
                    acc.max[player] = acc.max[player].max(pay);
                    total += pay;
                }
                acc.min_total = acc.min_total.min(total);
                acc.max_total = acc.max_total.max(total);
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(BlockAccumulator::new(n), |a, b| a.fold(&b));

    let rounds_f = cfg.rounds as f64;
    let players = (0..n)
        .map(|p| {
            let mean = acc.sum[p] / rounds_f;
            let std_error = if cfg.rounds > 1 {
                let var = ((acc.sum_sq[p] - acc.sum[p] * acc.sum[p] / rounds_f)
                    / (rounds_f - 1.0))
                    .max(0.0);
                (var / rounds_f).sqrt()
            } else {
                0.0
            };
            SimResult {
                mean_utility: mean,
                std_error,
                rounds: cfg.rounds,
                min_round_payout: acc.min[p],
                max_round_payout: acc.max[p],
            }
        })
        .collect();
    Ok(SimOutcome {
        players,
        min_round_total: acc.min_total,
        max_round_total: acc.max_total,
    })
}

/// Simulate with leader-side omissions always succeeding.
pub fn simulate<R>(
    dist: &PowerDistribution,
    profile: &StrategyProfile,
    reward: &R,
    cfg: SimConfig,
) -> Result<SimOutcome>
where
    R: RewardFunction + Sync + ?Sized,
{
    simulate_rounds(dist, profile, reward, cfg, |_| true)
}

/// Simulate the Ethereum-style model with aggregation sampled per round: the
/// attacker gets a whole number of committee seats, and an omission goes
/// through only if at least one of those seats is drawn as an aggregator.
pub fn simulate_ethereum(
    dist: &PowerDistribution,
    profile: &StrategyProfile,
    params: &EthereumParams,
    cfg: SimConfig,
) -> Result<SimOutcome> {
    let reward = EthereumReward(*params);
    let wants_omission = matches!(
        profile.kind(),
        Some(AttackKind::Omission) | Some(AttackKind::Combined)
    );
    if !wants_omission {
        return simulate_rounds(dist, profile, &reward, cfg, |_| true);
    }
    let attacker = profile.attacker().expect("omission profile has an attacker");
    let c = params.committee as f64;
    let seats = (dist.power(attacker)? * c).round() as u64;
    if seats < 1 {
        return Err(invalid(
            "attacker power yields under one committee seat, model needs at least one",
        ));
    }
    let slot_prob = params.mean_aggregators / c;
    simulate_rounds(dist, profile, &reward, cfg, move |rng| {
        for _ in 0..seats {
            if rng.random::<f64>() < slot_prob {
                return true;
            }
        }
        false
    })
}

/// Closed-form expected utilities matching [`simulate_ethereum`]: the
/// omission feasibility uses the same rounded seat count the sampler draws
/// with.
pub fn ethereum_expected_utilities(
    dist: &PowerDistribution,
    profile: &StrategyProfile,
    params: &EthereumParams,
) -> Result<UtilityVector> {
    let reward = EthereumReward(*params);
    let q = match profile.kind() {
        Some(AttackKind::Omission) | Some(AttackKind::Combined) => {
            let attacker = profile.attacker().expect("attack profile has an attacker");
            params.omission_feasibility_rounded(dist.power(attacker)?)?
        }
        _ => 1.0,
    };
    utilities_under_profile_feasible(dist, profile, &reward, q)
}

/// Result of comparing simulated means to expected values.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// Per-player deviation in standard errors. Infinite when the simulated
    /// spread is zero but the means still differ.
    pub z_scores: Vec<f64>,
    pub pass: bool,
}

/// Maximum tolerated deviation, in standard errors.
pub const Z_LIMIT: f64 = 4.0;

/// Compare per-player simulated means to expected utilities.
pub fn compare_to_closed_form(sim: &SimOutcome, expected: &[f64]) -> Result<ComparisonReport> {
    if sim.players.len() != expected.len() {
        return Err(invalid(format!(
            "expected {} values, got {}",
            sim.players.len(),
            expected.len()
        )));
    }
    let z_scores: Vec<f64> = sim
        .players
        .iter()
        .zip(expected)
        .map(|(r, &e)| {
            let dev = (r.mean_utility - e).abs();
            if r.std_error == 0.0 {
                if dev == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                dev / r.std_error
            }
        })
        .collect();
    let pass = z_scores.iter().all(|&z| z < Z_LIMIT);
    Ok(ComparisonReport { z_scores, pass })
}
