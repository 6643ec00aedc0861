//! Reward models of two deployed proof-of-stake systems, with closed-form
//! attack metrics for both.
//!
//! The Cosmos-style model distributes a fixed per-round pool: a base share
//! paid by stake regardless of participation, a proposer bonus that scales
//! with included stake above a quorum threshold, and an inclusion share for
//! voters whose votes land in the block. Whatever the bonus and inclusion
//! shares leave unclaimed is folded back into the pool and paid out by
//! stake, so the pool always empties exactly.
//!
//! The Ethereum-style model pays attesters a timeliness-independent share
//! plus a share that requires inclusion and scales with total participation,
//! and pays the proposer a bonus proportional to included stake. Votes
//! travel through stake-weighted aggregators, so a proposer who wants to
//! drop a vote needs to control an aggregator for it; that feasibility
//! probability is part of the model.

use crate::error::{invalid, undefined, Result};
use crate::game::{RewardFunction, RewardInputs, MAX_POWER};
use crate::mechanisms::feasibility_ethereum;
use crate::metrics::AttackMetrics;

fn check_power(name: &str, v: f64) -> Result<f64> {
    if !v.is_finite() || v <= 0.0 || v > MAX_POWER + 1e-12 {
        return Err(invalid(format!("{name} must lie in (0, 1/3], got {v}")));
    }
    Ok(v)
}

/// Pool-splitting reward with base pay, quorum-gated proposer bonus and
/// inclusion pay, as used by Cosmos-style chains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosmosParams {
    /// Quorum threshold for the proposer bonus ramp.
    pub threshold: f64,
    /// Share of the distributed pool paid by stake unconditionally.
    pub base_fraction: f64,
    /// Share of the non-base pool reserved for the proposer bonus.
    pub bonus: f64,
    /// Per-round pool size.
    pub rmax: f64,
}

impl CosmosParams {
    pub fn new(threshold: f64, base_fraction: f64, bonus: f64, rmax: f64) -> Result<Self> {
        if !threshold.is_finite() || !(0.0..1.0).contains(&threshold) {
            return Err(invalid(format!("threshold must lie in [0, 1), got {threshold}")));
        }
        if !base_fraction.is_finite() || !(0.0..=1.0).contains(&base_fraction) {
            return Err(invalid(format!(
                "base_fraction must lie in [0, 1], got {base_fraction}"
            )));
        }
        if !bonus.is_finite() || !(0.0..=1.0).contains(&bonus) {
            return Err(invalid(format!("bonus must lie in [0, 1], got {bonus}")));
        }
        if !rmax.is_finite() || rmax <= 0.0 {
            return Err(invalid(format!("rmax must be positive, got {rmax}")));
        }
        Ok(Self { threshold, base_fraction, bonus, rmax })
    }
}

impl Default for CosmosParams {
    fn default() -> Self {
        Self { threshold: 2.0 / 3.0, base_fraction: 0.9, bonus: 0.05, rmax: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosmosReward(pub CosmosParams);

impl CosmosReward {
    fn bonus_ramp(&self, included_power: f64) -> f64 {
        let t = self.0.threshold;
        ((included_power - t) / (1.0 - t)).clamp(0.0, 1.0)
    }
}

impl RewardFunction for CosmosReward {
    fn reward(&self, x: &RewardInputs) -> f64 {
        let p = self.0;
        let beta = self.bonus_ramp(x.included_power);
        let lead = if x.is_leader { beta * p.bonus * (1.0 - p.base_fraction) } else { 0.0 };
        let vote = if x.is_included {
            x.own_power * (1.0 - p.base_fraction) * (1.0 - p.bonus)
        } else {
            0.0
        };
        let base = x.own_power * p.base_fraction;
        // The bonus ramp below 1 and absent votes leave pool shares
        // unclaimed; both are redistributed by stake.
        let leftover_bonus = x.own_power * (1.0 - beta) * p.bonus * (1.0 - p.base_fraction);
        let leftover_vote =
            x.own_power * (1.0 - x.included_power) * (1.0 - p.base_fraction) * (1.0 - p.bonus);
        (lead + vote + base + leftover_bonus + leftover_vote) * p.rmax
    }
}

/// Effectiveness of a leader dropping the vote of a victim with stake share
/// `victim_power`, normalized by the victim's honest income and the
/// attacker's stake share (which cancels, so the result is attacker-free).
pub fn cosmos_omission_effectiveness(params: &CosmosParams, victim_power: f64) -> Result<f64> {
    check_power("victim power", victim_power)?;
    let t = params.threshold;
    let a = params.base_fraction;
    Ok((1.0 - a) / (1.0 - t) * cosmos_victim_loss_term(params, victim_power))
}

/// What the attacking leader forfeits per round it leads, up to the common
/// pool factor: the bonus given up on the victim's stake minus the windfall
/// of the redistributed leftover.
pub(crate) fn cosmos_attacker_loss_term(params: &CosmosParams, attacker_power: f64) -> f64 {
    let t = params.threshold;
    let b = params.bonus;
    b * (1.0 - attacker_power) - attacker_power * (1.0 - t) * (1.0 - b)
}

/// What the excluded victim forfeits, up to the same pool factor: its
/// inclusion pay minus its stake slice of the redistributed leftover.
pub(crate) fn cosmos_victim_loss_term(params: &CosmosParams, victim_power: f64) -> f64 {
    let t = params.threshold;
    let b = params.bonus;
    (1.0 - t) * (1.0 - b) * (1.0 - victim_power) - victim_power * b
}

/// Ratio of the attacking leader's own loss to the victim's loss for the
/// vote omission attack. Negative when the leftover-bonus windfall exceeds
/// what the leader forfeits, which happens for attackers above roughly 14%
/// stake under default parameters.
pub fn cosmos_omission_cost(
    params: &CosmosParams,
    attacker_power: f64,
    victim_power: f64,
) -> Result<f64> {
    check_power("attacker power", attacker_power)?;
    check_power("victim power", victim_power)?;
    let num = cosmos_attacker_loss_term(params, attacker_power);
    let den = cosmos_victim_loss_term(params, victim_power);
    if den == 0.0 {
        return Err(undefined("victim loss is zero, omission cost has no value"));
    }
    Ok(num / den)
}

/// Metrics for withholding one's own vote from rounds led by the victim.
///
/// Dropping a vote hurts the excluded voter the same way whether the leader
/// did the dropping or the voter withheld it, so the delay numbers follow
/// from the omission closed forms with the roles swapped: the cost is the
/// reciprocal of the swapped omission cost, and the effectiveness is the
/// attacker's own omission effectiveness carried over by that same ratio.
///
/// `cost` is `None` when the victim leader loses exactly nothing (the
/// attacker's stake sits at the windfall break-even). The reported
/// `max_loss_player` is 1, the victim slot in the attacker/victim pair
/// layout of [`crate::game::PowerDistribution::pair_with_fillers`].
pub fn cosmos_delay_metrics(
    params: &CosmosParams,
    attacker_power: f64,
    victim_power: f64,
) -> Result<AttackMetrics> {
    let swapped = cosmos_omission_cost(params, victim_power, attacker_power).map_err(|_| {
        undefined("attacker loss is zero, the cost inversion is singular")
    })?;
    let effectiveness = cosmos_omission_effectiveness(params, attacker_power)? * swapped;
    let cost = if swapped == 0.0 { None } else { Some(1.0 / swapped) };
    Ok(AttackMetrics { effectiveness, cost, max_loss_player: 1 })
}

/// Attestation reward split with a proposer bonus, as used by
/// Ethereum-style chains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EthereumParams {
    /// Share of attester pay that does not require same-round inclusion.
    pub late_fraction: f64,
    /// Proposer bonus per unit of included stake, relative to the pool.
    pub bonus: f64,
    /// Validators per committee.
    pub committee: u32,
    /// Expected number of aggregators per committee.
    pub mean_aggregators: f64,
    /// Inclusion window length in slots; context for `late_fraction`.
    pub window_slots: u32,
    pub rmax: f64,
}

impl EthereumParams {
    pub fn new(
        late_fraction: f64,
        bonus: f64,
        committee: u32,
        mean_aggregators: f64,
        window_slots: u32,
        rmax: f64,
    ) -> Result<Self> {
        if !late_fraction.is_finite() || !(0.0..1.0).contains(&late_fraction) {
            return Err(invalid(format!(
                "late_fraction must lie in [0, 1), got {late_fraction}"
            )));
        }
        if !bonus.is_finite() || bonus < 0.0 {
            return Err(invalid(format!("bonus must be non-negative, got {bonus}")));
        }
        if committee == 0 {
            return Err(invalid("committee size must be at least 1"));
        }
        if !mean_aggregators.is_finite()
            || mean_aggregators <= 0.0
            || mean_aggregators >= committee as f64
        {
            return Err(invalid(format!(
                "mean_aggregators must lie strictly between 0 and the committee size, \
                 got {mean_aggregators}"
            )));
        }
        if window_slots == 0 {
            return Err(invalid("window_slots must be at least 1"));
        }
        if !rmax.is_finite() || rmax <= 0.0 {
            return Err(invalid(format!("rmax must be positive, got {rmax}")));
        }
        Ok(Self { late_fraction, bonus, committee, mean_aggregators, window_slots, rmax })
    }

    /// Mainnet-flavored defaults with the proposer bonus dialed down to the
    /// level of the pool-splitting model, for like-for-like comparisons.
    pub fn small_bonus() -> Self {
        Self { bonus: 0.05, ..Self::default() }
    }

    /// Chance that an attacker with stake share `p_a` can aggregate away a
    /// single vote: it must hold at least one aggregator slot.
    pub fn omission_feasibility(&self, p_a: f64) -> Result<f64> {
        feasibility_ethereum(p_a, self.committee, self.mean_aggregators)
    }

    /// Same feasibility with the attacker's seat count rounded to a whole
    /// number, matching what a round-by-round sampler draws.
    pub fn omission_feasibility_rounded(&self, p_a: f64) -> Result<f64> {
        check_power("attacker power", p_a)?;
        let c = self.committee as f64;
        let seats = (p_a * c).round();
        if seats < 1.0 {
            return Err(invalid(format!(
                "attacker power {p_a} yields under one committee seat, model needs at least one"
            )));
        }
        Ok(1.0 - (1.0 - self.mean_aggregators / c).powf(seats))
    }
}

impl Default for EthereumParams {
    fn default() -> Self {
        Self {
            late_fraction: 0.781,
            bonus: 1.0 / 8.0,
            committee: 500,
            mean_aggregators: 16.0,
            window_slots: 6,
            rmax: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EthereumReward(pub EthereumParams);

impl RewardFunction for EthereumReward {
    fn reward(&self, x: &RewardInputs) -> f64 {
        let p = self.0;
        let late = p.late_fraction * x.own_power;
        let timely = if x.is_included {
            (1.0 - p.late_fraction) * x.included_power * x.own_power
        } else {
            0.0
        };
        let lead = if x.is_leader { p.bonus * x.included_power } else { 0.0 };
        (late + timely + lead) * p.rmax
    }
}

/// Whether attack metrics should account for the chance that a leader-side
/// omission fails for lack of an attacker-held aggregator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    Modeled,
    Ignored,
}

/// Victim loss from a vote omission, per unit of victim stake income and
/// attacker stake. Depends on the attacker only through the aggregation
/// feasibility, so with `Feasibility::Ignored` it is a constant.
pub fn eth_omission_effectiveness(
    params: &EthereumParams,
    attacker_power: f64,
    feasibility: Feasibility,
) -> Result<f64> {
    check_power("attacker power", attacker_power)?;
    let q = match feasibility {
        Feasibility::Modeled => params.omission_feasibility(attacker_power)?,
        Feasibility::Ignored => 1.0,
    };
    Ok(q * (1.0 - params.late_fraction))
}

/// Attacker-to-victim loss ratio for the vote omission. The feasibility
/// factor scales both losses and cancels.
pub fn eth_omission_cost(params: &EthereumParams, attacker_power: f64) -> Result<f64> {
    check_power("attacker power", attacker_power)?;
    Ok(attacker_power + params.bonus / (1.0 - params.late_fraction))
}

/// Victim loss from a vote delay against a leader with stake share
/// `victim_power`, per unit of victim stake income and attacker stake.
pub fn eth_delay_effectiveness(params: &EthereumParams, victim_power: f64) -> Result<f64> {
    check_power("victim power", victim_power)?;
    Ok((1.0 - params.late_fraction) * victim_power + params.bonus)
}

/// Attacker-to-victim loss ratio for the vote delay.
pub fn eth_delay_cost(params: &EthereumParams, victim_power: f64) -> Result<f64> {
    check_power("victim power", victim_power)?;
    let den = (1.0 - params.late_fraction) * victim_power + params.bonus;
    if den == 0.0 {
        return Err(undefined("victim loss is zero, delay cost has no value"));
    }
    Ok((1.0 - params.late_fraction) / den)
}

/// Every reward rule the library knows how to build, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardSpec {
    Simple(crate::mechanisms::SimpleParams),
    Threshold(crate::mechanisms::ThresholdParams),
    Scaling(crate::mechanisms::ScalingParams),
    Window(crate::mechanisms::WindowParams),
    Base(crate::mechanisms::BaseParams),
    Cosmos(CosmosParams),
    Ethereum(EthereumParams),
}

impl RewardSpec {
    pub fn build(&self) -> Box<dyn RewardFunction + Send + Sync> {
        use crate::mechanisms::*;
        match *self {
            RewardSpec::Simple(p) => Box::new(SimpleReward(p)),
            RewardSpec::Threshold(p) => Box::new(ThresholdReward(p)),
            RewardSpec::Scaling(p) => Box::new(ScalingReward(p)),
            RewardSpec::Window(p) => Box::new(WindowReward(p)),
            RewardSpec::Base(p) => Box::new(BaseReward(p)),
            RewardSpec::Cosmos(p) => Box::new(CosmosReward(p)),
            RewardSpec::Ethereum(p) => Box::new(EthereumReward(p)),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            RewardSpec::Simple(_) => "simple",
            RewardSpec::Threshold(_) => "threshold",
            RewardSpec::Scaling(_) => "scaling",
            RewardSpec::Window(_) => "window",
            RewardSpec::Base(_) => "base",
            RewardSpec::Cosmos(_) => "cosmos",
            RewardSpec::Ethereum(_) => "ethereum",
        }
    }

    /// All seven rules at their default parameters.
    pub fn catalog_defaults() -> Vec<RewardSpec> {
        use crate::mechanisms::*;
        vec![
            RewardSpec::Simple(SimpleParams::default()),
            RewardSpec::Threshold(ThresholdParams::default()),
            RewardSpec::Scaling(ScalingParams::default()),
            RewardSpec::Window(WindowParams::default()),
            RewardSpec::Base(BaseParams::default()),
            RewardSpec::Cosmos(CosmosParams::default()),
            RewardSpec::Ethereum(EthereumParams::default()),
        ]
    }
}
