//! Attack metrics built on expected utilities.
//!
//! Effectiveness measures damage: a non-attacker's utility loss, normalized
//! by its honest utility and by the attacker's stake share so the number is
//! comparable across victims and attacker sizes. Cost measures what the
//! attack does to the attacker itself: the attacker's loss per unit of the
//! worst-hit player's loss. A negative cost means the attack turns a profit.
//!
//! Attack-level metrics take the worst case over every non-attacker. The
//! targeted variants look only at the designated victim; those are the ones
//! tied by exact identities (see [`check_cost_inversion`] and
//! [`check_effectiveness_relation`]), because the worst-hit player can
//! switch identity across the attack pair.

use crate::error::{invalid, undefined, Result};
use crate::game::{
    utilities_under_profile_feasible, AttackKind, PowerDistribution, RewardFunction,
    StrategyProfile,
};

/// Worst-case damage and price of one attack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackMetrics {
    /// Largest normalized utility loss over all non-attackers.
    pub effectiveness: f64,
    /// Attacker loss relative to the largest raw loss, `None` when nobody
    /// but the attacker loses anything.
    pub cost: Option<f64>,
    /// Player whose raw loss is largest.
    pub max_loss_player: usize,
}

struct AttackOutcome {
    attacker: usize,
    powers: Vec<f64>,
    honest: Vec<f64>,
    attacked: Vec<f64>,
}

impl AttackOutcome {
    fn compute<R: RewardFunction + ?Sized>(
        dist: &PowerDistribution,
        profile: &StrategyProfile,
        reward: &R,
        omission_feasibility: f64,
    ) -> Result<Self> {
        let attacker = profile
            .attacker()
            .ok_or_else(|| invalid("attack metrics need an attack profile, not honest play"))?;
        let honest =
            utilities_under_profile_feasible(dist, &StrategyProfile::Honest, reward, 1.0)?;
        let attacked =
            utilities_under_profile_feasible(dist, profile, reward, omission_feasibility)?;
        Ok(Self {
            attacker,
            powers: dist.powers().to_vec(),
            honest: honest.into_vec(),
            attacked: attacked.into_vec(),
        })
    }

    fn loss(&self, player: usize) -> f64 {
        self.honest[player] - self.attacked[player]
    }

    fn normalized_loss(&self, player: usize) -> Result<f64> {
        let base = self.honest[player];
        if base == 0.0 {
            return Err(undefined(format!(
                "player {player} earns nothing honestly, loss cannot be normalized"
            )));
        }
        Ok(self.loss(player) / (base * self.powers[self.attacker]))
    }
}

/// Worst-case metrics of `profile` with leader-side omissions always
/// succeeding.
pub fn attack_metrics<R: RewardFunction + ?Sized>(
    dist: &PowerDistribution,
    profile: &StrategyProfile,
    reward: &R,
) -> Result<AttackMetrics> {
    attack_metrics_feasible(dist, profile, reward, 1.0)
}

/// Worst-case metrics when leader-side omissions only succeed with
/// probability `omission_feasibility`.
pub fn attack_metrics_feasible<R: RewardFunction + ?Sized>(
    dist: &PowerDistribution,
    profile: &StrategyProfile,
    reward: &R,
    omission_feasibility: f64,
) -> Result<AttackMetrics> {
    let out = AttackOutcome::compute(dist, profile, reward, omission_feasibility)?;
    let mut effectiveness = f64::NEG_INFINITY;
    let mut max_loss = f64::NEG_INFINITY;
    let mut max_loss_player = usize::MAX;
    for player in 0..out.powers.len() {
        if player == out.attacker {
            continue;
        }
        effectiveness = effectiveness.max(out.normalized_loss(player)?);
        let loss = out.loss(player);
        if loss > max_loss {
            max_loss = loss;
            max_loss_player = player;
        }
    }
    let cost = if max_loss > 0.0 { Some(out.loss(out.attacker) / max_loss) } else { None };
    Ok(AttackMetrics { effectiveness, cost, max_loss_player })
}

/// Largest normalized loss any non-attacker suffers under `profile`.
pub fn attack_effectiveness<R: RewardFunction + ?Sized>(
    dist: &PowerDistribution,
    profile: &StrategyProfile,
    reward: &R,
) -> Result<f64> {
    Ok(attack_metrics(dist, profile, reward)?.effectiveness)
}

/// Attacker loss per unit of worst raw loss, `None` when no non-attacker
/// loses anything.
pub fn attack_cost<R: RewardFunction + ?Sized>(
    dist: &PowerDistribution,
    profile: &StrategyProfile,
    reward: &R,
) -> Result<Option<f64>> {
    Ok(attack_metrics(dist, profile, reward)?.cost)
}

/// Normalized loss of the designated victim.
pub fn targeted_effectiveness<R: RewardFunction + ?Sized>(
    dist: &PowerDistribution,
    profile: &StrategyProfile,
    reward: &R,
) -> Result<f64> {
    targeted_effectiveness_feasible(dist, profile, reward, 1.0)
}

/// Normalized loss of the designated victim with partial omission
/// feasibility.
pub fn targeted_effectiveness_feasible<R: RewardFunction + ?Sized>(
    dist: &PowerDistribution,
    profile: &StrategyProfile,
    reward: &R,
    omission_feasibility: f64,
) -> Result<f64> {
    let victim = profile
        .victim()
        .ok_or_else(|| invalid("targeted metrics need an attack profile, not honest play"))?;
    let out = AttackOutcome::compute(dist, profile, reward, omission_feasibility)?;
    out.normalized_loss(victim)
}

/// Attacker loss per unit of the designated victim's loss. Fails with
/// [`Error::UndefinedMetric`] when the victim loses exactly nothing.
pub fn targeted_cost<R: RewardFunction + ?Sized>(
    dist: &PowerDistribution,
    profile: &StrategyProfile,
    reward: &R,
) -> Result<f64> {
    targeted_cost_feasible(dist, profile, reward, 1.0)
}

/// Targeted cost with partial omission feasibility.
pub fn targeted_cost_feasible<R: RewardFunction + ?Sized>(
    dist: &PowerDistribution,
    profile: &StrategyProfile,
    reward: &R,
    omission_feasibility: f64,
) -> Result<f64> {
    let victim = profile
        .victim()
        .ok_or_else(|| invalid("targeted metrics need an attack profile, not honest play"))?;
    let out = AttackOutcome::compute(dist, profile, reward, omission_feasibility)?;
    let victim_loss = out.loss(victim);
    if victim_loss == 0.0 {
        return Err(undefined("victim loses nothing, cost has no value"));
    }
    Ok(out.loss(out.attacker) / victim_loss)
}

/// Targeted costs of the two mirrored attacks that remove player `i`'s vote
/// from rounds led by player `j`: the leader-side omission by `j` against
/// `i`, and the vote delay by `i` against `j`. The two attacks induce the
/// same per-round outcomes, so each player's loss is the same in both and
/// the two cost ratios are exact reciprocals.
pub fn check_cost_inversion<R: RewardFunction + ?Sized>(
    dist: &PowerDistribution,
    reward: &R,
    i: usize,
    j: usize,
) -> Result<(f64, f64)> {
    let omission = StrategyProfile::omission(j, i)?;
    let delay = StrategyProfile::delay(i, j)?;
    let omission_cost = targeted_cost(dist, &omission, reward)?;
    let delay_cost = targeted_cost(dist, &delay, reward)?;
    Ok((omission_cost, delay_cost))
}

/// Residual of the exact relation tying the two mirrored attacks'
/// effectivenesses: the omission-to-delay effectiveness ratio equals the
/// delay cost times the ratio of honest utilities weighted by stakes.
/// Returns the residual, which is zero up to rounding.
pub fn check_effectiveness_relation<R: RewardFunction + ?Sized>(
    dist: &PowerDistribution,
    reward: &R,
    i: usize,
    j: usize,
) -> Result<f64> {
    let omission = StrategyProfile::omission(j, i)?;
    let delay = StrategyProfile::delay(i, j)?;
    let eff_om = targeted_effectiveness(dist, &omission, reward)?;
    let eff_dl = targeted_effectiveness(dist, &delay, reward)?;
    if eff_dl == 0.0 {
        return Err(undefined("delay effectiveness is zero, ratio has no value"));
    }
    let delay_cost = targeted_cost(dist, &delay, reward)?;
    let honest = utilities_under_profile_feasible(dist, &StrategyProfile::Honest, reward, 1.0)?;
    let u_i = honest.get(i)?;
    let u_j = honest.get(j)?;
    if u_i == 0.0 {
        return Err(undefined("player earns nothing honestly, ratio has no value"));
    }
    let p_i = dist.power(i)?;
    let p_j = dist.power(j)?;
    Ok(eff_om / eff_dl - delay_cost * (u_j * p_i) / (u_i * p_j))
}

/// Worst effectiveness and best cost over a set of attacks. A scheme is
/// robust when `epsilon` stays small and `gamma` stays large.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessResult {
    /// Largest effectiveness seen.
    pub epsilon: f64,
    /// Smallest defined cost seen, `None` when every scanned attack had an
    /// undefined cost.
    pub gamma: Option<f64>,
    pub worst_effectiveness_attack: StrategyProfile,
    pub worst_cost_attack: Option<StrategyProfile>,
    /// Number of scanned attacks whose cost was undefined.
    pub undefined_costs: usize,
}

/// Scan attacks of the given kinds by each listed (attacker, victim) pair,
/// with leader-side omissions always succeeding.
pub fn robustness_scan<R: RewardFunction + ?Sized>(
    dist: &PowerDistribution,
    reward: &R,
    kinds: &[AttackKind],
    pairs: &[(usize, usize)],
) -> Result<RobustnessResult> {
    robustness_scan_with(dist, reward, kinds, pairs, |_| Ok(1.0))
}

/// Robustness scan with omission feasibility supplied as a function of the
/// attacker's stake share.
pub fn robustness_scan_with<R, F>(
    dist: &PowerDistribution,
    reward: &R,
    kinds: &[AttackKind],
    pairs: &[(usize, usize)],
    omission_feasibility: F,
) -> Result<RobustnessResult>
where
    R: RewardFunction + ?Sized,
    F: Fn(f64) -> Result<f64>,
{
    if kinds.is_empty() || pairs.is_empty() {
        return Err(invalid("robustness scan needs at least one kind and one pair"));
    }
    let mut epsilon = f64::NEG_INFINITY;
    let mut worst_effectiveness_attack = None;
    let mut gamma: Option<f64> = None;
    let mut worst_cost_attack = None;
    let mut undefined_costs = 0;
    for &(attacker, victim) in pairs {
        let q = omission_feasibility(dist.power(attacker)?)?;
        for &kind in kinds {
            let profile = StrategyProfile::attack(kind, attacker, victim)?;
            let m = attack_metrics_feasible(dist, &profile, reward, q)?;
            if m.effectiveness > epsilon {
                epsilon = m.effectiveness;
                worst_effectiveness_attack = Some(profile);
            }
            match m.cost {
                Some(c) if gamma.is_none_or(|g| c < g) => {
                    gamma = Some(c);
                    worst_cost_attack = Some(profile);
                }
                Some(_) => {}
                None => undefined_costs += 1,
            }
        }
    }
    Ok(RobustnessResult {
        epsilon,
        gamma,
        worst_effectiveness_attack: worst_effectiveness_attack
            .expect("at least one attack was scanned"),
        worst_cost_attack,
        undefined_costs,
    })
}
