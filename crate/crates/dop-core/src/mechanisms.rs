//! Catalog of stylized per-round reward rules.
//!
//! All of them pay a leader bonus proportional to the stake share behind the
//! included votes, so a leader always loses something by dropping a vote.
//! They differ in how the voter side is paid, which is what decides how much
//! a vote withholder loses. Stake shares double as probabilities, so every
//! formula below is already an expectation over one round.

use crate::error::{invalid, Result};
use crate::game::{RewardFunction, RewardInputs, MAX_POWER};

fn check_unit(name: &str, v: f64) -> Result<f64> {
    if !v.is_finite() || !(0.0..=1.0).contains(&v) {
        return Err(invalid(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(v)
}

fn check_positive(name: &str, v: f64) -> Result<f64> {
    if !v.is_finite() || v <= 0.0 {
        return Err(invalid(format!("{name} must be positive, got {v}")));
    }
    Ok(v)
}

fn check_attacker_power(v: f64) -> Result<f64> {
    if !v.is_finite() || v <= 0.0 || v > MAX_POWER + 1e-12 {
        return Err(invalid(format!("attacker power must lie in (0, 1/3], got {v}")));
    }
    Ok(v)
}

/// Voters get their stake share, the leader gets `bonus` times the included
/// stake on top.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpleParams {
    pub bonus: f64,
    pub rmax: f64,
}

impl SimpleParams {
    pub fn new(bonus: f64, rmax: f64) -> Result<Self> {
        if !bonus.is_finite() || bonus < 0.0 {
            return Err(invalid(format!("bonus must be non-negative, got {bonus}")));
        }
        check_positive("rmax", rmax)?;
        Ok(Self { bonus, rmax })
    }
}

impl Default for SimpleParams {
    fn default() -> Self {
        Self { bonus: 1.0, rmax: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpleReward(pub SimpleParams);

impl RewardFunction for SimpleReward {
    fn reward(&self, x: &RewardInputs) -> f64 {
        let p = self.0;
        let lead = if x.is_leader { x.included_power * p.bonus } else { 0.0 };
        let vote = if x.is_included { x.own_power } else { 0.0 };
        (lead + vote) * p.rmax
    }
}

/// Like the simple rule, but the leader bonus only counts included stake
/// above a quorum threshold, rescaled to keep the full-participation bonus
/// unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdParams {
    pub threshold: f64,
    pub bonus: f64,
    pub rmax: f64,
}

impl ThresholdParams {
    pub fn new(threshold: f64, bonus: f64, rmax: f64) -> Result<Self> {
        check_unit("threshold", threshold)?;
        if threshold >= 1.0 {
            return Err(invalid("threshold must be below 1"));
        }
        if !bonus.is_finite() || bonus < 0.0 {
            return Err(invalid(format!("bonus must be non-negative, got {bonus}")));
        }
        check_positive("rmax", rmax)?;
        Ok(Self { threshold, bonus, rmax })
    }
}

impl Default for ThresholdParams {
    fn default() -> Self {
        Self { threshold: 2.0 / 3.0, bonus: 1.0 / 3.0, rmax: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReward(pub ThresholdParams);

impl RewardFunction for ThresholdReward {
    fn reward(&self, x: &RewardInputs) -> f64 {
        let p = self.0;
        let above = ((x.included_power - p.threshold) / (1.0 - p.threshold)).max(0.0);
        let lead = if x.is_leader { above * p.bonus } else { 0.0 };
        let vote = if x.is_included { x.own_power } else { 0.0 };
        (lead + vote) * p.rmax
    }
}

/// Voter pay scales with total included stake, so missing votes hurt every
/// voter, not just the leader.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingParams {
    pub bonus: f64,
    pub rmax: f64,
}

impl ScalingParams {
    pub fn new(bonus: f64, rmax: f64) -> Result<Self> {
        if !bonus.is_finite() || bonus < 0.0 {
            return Err(invalid(format!("bonus must be non-negative, got {bonus}")));
        }
        check_positive("rmax", rmax)?;
        Ok(Self { bonus, rmax })
    }
}

impl Default for ScalingParams {
    fn default() -> Self {
        Self { bonus: 1.0 / 8.0, rmax: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingReward(pub ScalingParams);

impl RewardFunction for ScalingReward {
    fn reward(&self, x: &RewardInputs) -> f64 {
        let p = self.0;
        let lead = if x.is_leader { x.included_power * p.bonus } else { 0.0 };
        let vote = if x.is_included { x.included_power * x.own_power } else { 0.0 };
        (lead + vote) * p.rmax
    }
}

/// A fraction of the voter pay arrives regardless of inclusion, modeling a
/// grace window in which a withheld vote still lands eventually.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowParams {
    /// Share of voter pay that survives exclusion from the current round.
    pub late_fraction: f64,
    /// Length of the grace window in rounds; context for `late_fraction`,
    /// which already summarizes the pay surviving anywhere in the window.
    pub window: u32,
    pub bonus: f64,
    pub rmax: f64,
}

impl WindowParams {
    pub fn new(late_fraction: f64, window: u32, bonus: f64, rmax: f64) -> Result<Self> {
        check_unit("late_fraction", late_fraction)?;
        if window == 0 {
            return Err(invalid("window must be at least 1 round"));
        }
        if !bonus.is_finite() || bonus < 0.0 {
            return Err(invalid(format!("bonus must be non-negative, got {bonus}")));
        }
        check_positive("rmax", rmax)?;
        Ok(Self { late_fraction, window, bonus, rmax })
    }
}

impl Default for WindowParams {
    fn default() -> Self {
        Self { late_fraction: 0.781, window: 6, bonus: 1.0 / 8.0, rmax: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowReward(pub WindowParams);

impl RewardFunction for WindowReward {
    fn reward(&self, x: &RewardInputs) -> f64 {
        let p = self.0;
        let lead = if x.is_leader { x.included_power * p.bonus } else { 0.0 };
        let timely = if x.is_included { (1.0 - p.late_fraction) * x.own_power } else { 0.0 };
        (lead + p.late_fraction * x.own_power + timely) * p.rmax
    }
}

/// A fraction of the voter pay is unconditional base income; only the rest
/// rides on inclusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseParams {
    pub base_fraction: f64,
    pub bonus: f64,
    pub rmax: f64,
}

impl BaseParams {
    pub fn new(base_fraction: f64, bonus: f64, rmax: f64) -> Result<Self> {
        check_unit("base_fraction", base_fraction)?;
        if !bonus.is_finite() || bonus < 0.0 {
            return Err(invalid(format!("bonus must be non-negative, got {bonus}")));
        }
        check_positive("rmax", rmax)?;
        Ok(Self { base_fraction, bonus, rmax })
    }
}

impl Default for BaseParams {
    fn default() -> Self {
        Self { base_fraction: 0.9, bonus: 0.05, rmax: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseReward(pub BaseParams);

impl RewardFunction for BaseReward {
    fn reward(&self, x: &RewardInputs) -> f64 {
        let p = self.0;
        let lead = if x.is_leader { x.included_power * p.bonus } else { 0.0 };
        let timely = if x.is_included { (1.0 - p.base_fraction) * x.own_power } else { 0.0 };
        (lead + p.base_fraction * x.own_power + timely) * p.rmax
    }
}

/// Probability that a leader-side vote omission goes through when votes pass
/// through `k` stake-weighted aggregator slots before reaching the leader.
/// The attacker needs to hold at least one slot and have its doctored
/// aggregate picked (probability `p_a`), unless it holds all `k` slots and no
/// honest aggregate exists at all: `p_a (1 - (1 - p_a)^k) + p_a^k`.
pub fn feasibility_generic(p_a: f64, k: u32) -> Result<f64> {
    check_attacker_power(p_a)?;
    if k == 0 {
        return Err(invalid("aggregator count must be at least 1"));
    }
    let k = k as i32;
    Ok(p_a * (1.0 - (1.0 - p_a).powi(k)) + p_a.powi(k))
}

/// Probability that an attacker with stake share `p_a` holds at least one of
/// the expected `mean` aggregator slots in a committee of `committee`
/// validators, assuming proportional slot assignment.
pub fn feasibility_ethereum(p_a: f64, committee: u32, mean: f64) -> Result<f64> {
    check_attacker_power(p_a)?;
    if committee == 0 {
        return Err(invalid("committee size must be at least 1"));
    }
    check_positive("mean aggregator count", mean)?;
    let c = committee as f64;
    if mean >= c {
        return Err(invalid(
            "mean aggregator count must stay strictly below the committee size",
        ));
    }
    let seats = p_a * c;
    if seats < 1.0 {
        return Err(invalid(format!(
            "attacker power {p_a} yields under one committee seat, model needs at least one"
        )));
    }
    Ok(1.0 - (1.0 - mean / c).powf(seats))
}

/// How votes reach the leader, which decides whether a leader-side omission
/// can actually be carried out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AggregationParams {
    /// A fixed number of stake-weighted aggregator slots.
    Generic { aggregator_count: u32 },
    /// A committee with an expected number of self-selected aggregators.
    Committee { committee_size: u32, mean_aggregators: f64 },
}

impl AggregationParams {
    pub fn feasibility(&self, p_a: f64) -> Result<f64> {
        match *self {
            AggregationParams::Generic { aggregator_count } => {
                feasibility_generic(p_a, aggregator_count)
            }
            AggregationParams::Committee { committee_size, mean_aggregators } => {
                feasibility_ethereum(p_a, committee_size, mean_aggregators)
            }
        }
    }
}
