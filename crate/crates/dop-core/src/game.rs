//! The vote collection game.
//!
//! Each round one player is elected leader with probability equal to its
//! stake share. Every player casts a vote, the leader assembles the votes it
//! has seen, and a reward function pays each player based on four facts:
//! whether it led the round, whether its own vote was included, its stake
//! share, and the total stake share behind the included votes.
//!
//! Attacks remove exactly one vote from specific rounds. A leader can omit a
//! chosen victim's vote (vote omission), a voter can withhold its own vote
//! whenever the victim leads (vote delay), or a player can do both. Because a
//! round's outcome depends only on who leads and which single vote goes
//! missing, expected utilities reduce to a short sum over leader cases
//! instead of an enumeration of committees.

use crate::error::{invalid, Result};

/// Upper bound on any single player's stake share.
pub const MAX_POWER: f64 = 1.0 / 3.0;

/// Slack for power-cap and sum checks; absorbs construction rounding only.
const POWER_EPS: f64 = 1e-12;

/// Stake shares of all players. Non-empty, every share in (0, 1/3] and the
/// shares sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDistribution {
    powers: Vec<f64>,
}

impl PowerDistribution {
    pub fn new(powers: Vec<f64>) -> Result<Self> {
        if powers.is_empty() {
            return Err(invalid("power distribution must not be empty"));
        }
        for (i, &p) in powers.iter().enumerate() {
            if !p.is_finite() || p <= 0.0 {
                return Err(invalid(format!("power of player {i} must be positive, got {p}")));
            }
            if p > MAX_POWER + POWER_EPS {
                return Err(invalid(format!(
                    "power of player {i} is {p}, above the 1/3 cap"
                )));
            }
        }
        let total: f64 = powers.iter().sum();
        if (total - 1.0).abs() > POWER_EPS {
            return Err(invalid(format!("powers must sum to 1, got {total}")));
        }
        Ok(Self { powers })
    }

    /// Distribution holding an attacker (index 0), a victim (index 1) and as
    /// few equal filler players as the power cap allows.
    pub fn pair_with_fillers(attacker_power: f64, victim_power: f64) -> Result<Self> {
        for (role, p) in [("attacker", attacker_power), ("victim", victim_power)] {
            if !p.is_finite() || p <= 0.0 || p > MAX_POWER + POWER_EPS {
                return Err(invalid(format!("{role} power {p} outside (0, 1/3]")));
            }
        }
        let remaining = 1.0 - attacker_power - victim_power;
        let count = ((remaining / MAX_POWER) - POWER_EPS).ceil().max(1.0) as usize;
        let filler = remaining / count as f64;
        let mut powers = vec![attacker_power, victim_power];
        powers.extend(std::iter::repeat_n(filler, count));
        Self::new(powers)
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn power(&self, player: usize) -> Result<f64> {
        self.powers
            .get(player)
            .copied()
            .ok_or_else(|| invalid(format!("player index {player} out of range")))
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    fn check_player(&self, player: usize) -> Result<()> {
        if player >= self.powers.len() {
            return Err(invalid(format!("player index {player} out of range")));
        }
        Ok(())
    }
}

/// Probability that `player` is elected leader in a round.
pub fn leader_probability(dist: &PowerDistribution, player: usize) -> Result<f64> {
    dist.power(player)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttackKind {
    /// The attacker, when leading, drops the victim's vote.
    Omission,
    /// The attacker withholds its own vote whenever the victim leads.
    Delay,
    /// Both of the above.
    Combined,
}

impl AttackKind {
    pub fn label(self) -> &'static str {
        match self {
            AttackKind::Omission => "omission",
            AttackKind::Delay => "delay",
            AttackKind::Combined => "combined",
        }
    }
}

/// What every player does across rounds. Either everyone is honest, or one
/// attacker targets one victim and everyone else stays honest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyProfile {
    Honest,
    Attack {
        kind: AttackKind,
        attacker: usize,
        victim: usize,
    },
}

impl StrategyProfile {
    pub fn attack(kind: AttackKind, attacker: usize, victim: usize) -> Result<Self> {
        if attacker == victim {
            return Err(invalid("attacker and victim must be distinct players"));
        }
        Ok(StrategyProfile::Attack { kind, attacker, victim })
    }

    pub fn omission(attacker: usize, victim: usize) -> Result<Self> {
        Self::attack(AttackKind::Omission, attacker, victim)
    }

    pub fn delay(attacker: usize, victim: usize) -> Result<Self> {
        Self::attack(AttackKind::Delay, attacker, victim)
    }

    pub fn combined(attacker: usize, victim: usize) -> Result<Self> {
        Self::attack(AttackKind::Combined, attacker, victim)
    }

    pub fn attacker(&self) -> Option<usize> {
        match *self {
            StrategyProfile::Honest => None,
            StrategyProfile::Attack { attacker, .. } => Some(attacker),
        }
    }

    pub fn victim(&self) -> Option<usize> {
        match *self {
            StrategyProfile::Honest => None,
            StrategyProfile::Attack { victim, .. } => Some(victim),
        }
    }

    pub fn kind(&self) -> Option<AttackKind> {
        match *self {
            StrategyProfile::Honest => None,
            StrategyProfile::Attack { kind, .. } => Some(kind),
        }
    }

    pub(crate) fn validate_for(&self, dist: &PowerDistribution) -> Result<()> {
        if let StrategyProfile::Attack { attacker, victim, .. } = *self {
            dist.check_player(attacker)?;
            dist.check_player(victim)?;
        }
        Ok(())
    }
}

/// Whose vote is missing in a round led by `leader`, if any, and whether the
/// removal is the leader-side kind (omission) that can require cooperation
/// beyond the attacker's own validators.
pub(crate) fn exclusion(profile: &StrategyProfile, leader: usize) -> (Option<usize>, bool) {
    match *profile {
        StrategyProfile::Honest => (None, false),
        StrategyProfile::Attack { kind, attacker, victim } => {
            let omits = matches!(kind, AttackKind::Omission | AttackKind::Combined)
                && leader == attacker;
            let delays =
                matches!(kind, AttackKind::Delay | AttackKind::Combined) && leader == victim;
            if omits {
                (Some(victim), true)
            } else if delays {
                (Some(attacker), false)
            } else {
                (None, false)
            }
        }
    }
}

/// Total stake share behind the votes the leader includes in a round it runs
/// under `profile`. 1 when no vote goes missing.
pub fn included_power(
    dist: &PowerDistribution,
    profile: &StrategyProfile,
    leader: usize,
) -> Result<f64> {
    dist.check_player(leader)?;
    profile.validate_for(dist)?;
    let (excluded, _) = exclusion(profile, leader);
    Ok(match excluded {
        None => 1.0,
        Some(e) => 1.0 - dist.power(e)?,
    })
}

/// One player's view of one round, as handed to a reward function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardInputs {
    pub is_leader: bool,
    pub is_included: bool,
    /// The player's own stake share, in (0, 1/3].
    pub own_power: f64,
    /// Stake share behind all included votes, in [0, 1].
    pub included_power: f64,
}

/// A per-round payout rule. Implementations must be pure functions of the
/// inputs.
pub trait RewardFunction {
    fn reward(&self, inputs: &RewardInputs) -> f64;
}

impl<T: RewardFunction + ?Sized> RewardFunction for &T {
    fn reward(&self, inputs: &RewardInputs) -> f64 {
        (**self).reward(inputs)
    }
}

impl<T: RewardFunction + ?Sized> RewardFunction for Box<T> {
    fn reward(&self, inputs: &RewardInputs) -> f64 {
        (**self).reward(inputs)
    }
}

/// Per-player expected utilities, indexed like the power distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityVector(Vec<f64>);

impl UtilityVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("utility vector entries must be finite"));
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, player: usize) -> Result<f64> {
        self.0
            .get(player)
            .copied()
            .ok_or_else(|| invalid(format!("player index {player} out of range")))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Reward for `player` in a round led by `leader`, with leader-side vote
/// removal succeeding only with probability `omission_feasibility`.
fn round_reward<R: RewardFunction + ?Sized>(
    dist: &PowerDistribution,
    profile: &StrategyProfile,
    reward: &R,
    player: usize,
    leader: usize,
    omission_feasibility: f64,
) -> f64 {
    let own_power = dist.powers[player];
    let (excluded, leader_side) = exclusion(profile, leader);
    let attacked = reward.reward(&RewardInputs {
        is_leader: player == leader,
        is_included: excluded != Some(player),
        own_power,
        included_power: match excluded {
            None => 1.0,
            Some(e) => 1.0 - dist.powers[e],
        },
    });
    if leader_side && omission_feasibility < 1.0 {
        let honest = reward.reward(&RewardInputs {
            is_leader: player == leader,
            is_included: true,
            own_power,
            included_power: 1.0,
        });
        omission_feasibility * attacked + (1.0 - omission_feasibility) * honest
    } else {
        attacked
    }
}

/// Expected per-round utility of `player` under `profile`, with leader-side
/// vote removal always succeeding.
pub fn expected_utility<R: RewardFunction + ?Sized>(
    dist: &PowerDistribution,
    profile: &StrategyProfile,
    reward: &R,
    player: usize,
) -> Result<f64> {
    expected_utility_feasible(dist, profile, reward, player, 1.0)
}

/// Expected per-round utility when, in rounds where the attacker leads, the
/// planned vote omission only succeeds with probability
/// `omission_feasibility` (the rest of those rounds run honestly). Vote delay
/// needs nobody's cooperation and always succeeds.
pub fn expected_utility_feasible<R: RewardFunction + ?Sized>(
    dist: &PowerDistribution,
    profile: &StrategyProfile,
    reward: &R,
    player: usize,
    omission_feasibility: f64,
) -> Result<f64> {
    dist.check_player(player)?;
    profile.validate_for(dist)?;
    if !(0.0..=1.0).contains(&omission_feasibility) {
        return Err(invalid(format!(
            "omission feasibility {omission_feasibility} outside [0, 1]"
        )));
    }

    // Only rounds led by the player itself, the attacker or the victim can
    // differ from an honest round the player does not lead. Enumerate those
    // leaders, then close the sum with the aggregated remainder.
    let mut special = [usize::MAX; 3];
    let mut n_special = 0;
    let push = |idx: usize, special: &mut [usize; 3], n: &mut usize| {
        if !special[..*n].contains(&idx) {
            special[*n] = idx;
            *n += 1;
        }
    };
    push(player, &mut special, &mut n_special);
    if let StrategyProfile::Attack { attacker, victim, .. } = *profile {
        push(attacker, &mut special, &mut n_special);
        push(victim, &mut special, &mut n_special);
    }
    special[..n_special].sort_unstable();

    let mut utility = 0.0;
    let mut covered = 0.0;
    for &leader in &special[..n_special] {
        let p = dist.powers[leader];
        utility += p * round_reward(dist, profile, reward, player, leader, omission_feasibility);
        covered += p;
    }
    let rest = (1.0 - covered).max(0.0);
    utility += rest
        * reward.reward(&RewardInputs {
            is_leader: false,
            is_included: true,
            own_power: dist.powers[player],
            included_power: 1.0,
        });
    Ok(utility)
}

/// Expected utilities of every player under `profile`.
pub fn utilities_under_profile<R: RewardFunction + ?Sized>(
    dist: &PowerDistribution,
    profile: &StrategyProfile,
    reward: &R,
) -> Result<UtilityVector> {
    utilities_under_profile_feasible(dist, profile, reward, 1.0)
}

/// Same as [`utilities_under_profile`] with partial omission feasibility.
pub fn utilities_under_profile_feasible<R: RewardFunction + ?Sized>(
    dist: &PowerDistribution,
    profile: &StrategyProfile,
    reward: &R,
    omission_feasibility: f64,
) -> Result<UtilityVector> {
    let values = (0..dist.len())
        .map(|p| expected_utility_feasible(dist, profile, reward, p, omission_feasibility))
        .collect::<Result<Vec<_>>>()?;
    UtilityVector::new(values)
}
