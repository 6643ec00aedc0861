//! Run configuration: a JSON document whose fields mirror the flag names,
//! with command-line values taking precedence over file values.

use std::path::{Path, PathBuf};

use dop_core::mechanisms::{
    BaseParams, ScalingParams, SimpleParams, ThresholdParams, WindowParams,
};
use dop_core::systems::{CosmosParams, EthereumParams};
use dop_core::{AttackKind, Error, PowerDistribution, Result, RewardSpec};
use serde::Deserialize;

pub fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

/// A scalar in most places, a list for the aggregators command.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn scalar(&self) -> Result<f64> {
        match self {
            OneOrMany::One(v) => Ok(*v),
            OneOrMany::Many(_) => Err(bad("mean_aggs takes a single value for this command")),
        }
    }

    pub fn list(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Fields any command may read; unknown fields are rejected by name.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<String>,
    pub system: Option<String>,
    pub t: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub rho: Option<f64>,
    pub w: Option<u32>,
    pub c: Option<u32>,
    pub mean_aggs: Option<OneOrMany>,
    pub rmax: Option<f64>,
    pub powers: Option<Vec<f64>>,
    pub attacker_power: Option<f64>,
    pub victim_power: Option<f64>,
    pub fillers: Option<usize>,
    pub attacker: Option<usize>,
    pub victim: Option<usize>,
    pub attack: Option<String>,
    pub kinds: Option<Vec<String>>,
    pub attackers: Option<Vec<f64>>,
    pub victims: Option<Vec<f64>>,
    pub criterion: Option<String>,
    pub epsilon: Option<f64>,
    pub tolerance: Option<f64>,
    pub suite: Option<String>,
    pub grid: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub rounds: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| bad(format!("config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum System {
    Simple,
    Threshold,
    Scaling,
    Window,
    Base,
    Cosmos,
    Ethereum,
}

impl System {
    pub fn parse(name: &str) -> Result<Self> {
        <Self as clap::ValueEnum>::from_str(name, true)
            .map_err(|_| bad(format!("unknown system `{name}`")))
    }

    pub fn label(self) -> &'static str {
        match self {
            System::Simple => "simple",
            System::Threshold => "threshold",
            System::Scaling => "scaling",
            System::Window => "window",
            System::Base => "base",
            System::Cosmos => "cosmos",
            System::Ethereum => "ethereum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Attack {
    Omission,
    Delay,
    Combined,
}

impl Attack {
    pub fn parse(name: &str) -> Result<Self> {
        <Self as clap::ValueEnum>::from_str(name, true)
            .map_err(|_| bad(format!("unknown attack `{name}`")))
    }

    pub fn kind(self) -> AttackKind {
        match self {
            Attack::Omission => AttackKind::Omission,
            Attack::Delay => AttackKind::Delay,
            Attack::Combined => AttackKind::Combined,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Criterion {
    Nash,
    Balanced,
}

impl Criterion {
    pub fn parse(name: &str) -> Result<Self> {
        <Self as clap::ValueEnum>::from_str(name, true)
            .map_err(|_| bad(format!("unknown criterion `{name}`")))
    }

    pub fn label(self) -> &'static str {
        match self {
            Criterion::Nash => "nash",
            Criterion::Balanced => "balanced",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Theorems,
    Lemma,
    Oracle,
}

impl Suite {
    pub fn parse(name: &str) -> Result<Self> {
        <Self as clap::ValueEnum>::from_str(name, true)
            .map_err(|_| bad(format!("unknown suite `{name}`")))
    }
}

/// Parameter overrides after merging flags over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub t: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub rho: Option<f64>,
    pub w: Option<u32>,
    pub c: Option<u32>,
    pub mean_aggs: Option<f64>,
    pub rmax: Option<f64>,
}

fn reject_stray(overrides: &Overrides, system: System) -> Result<()> {
    let allowed: &[&str] = match system {
        System::Simple | System::Scaling => &["b", "rmax"],
        System::Threshold => &["t", "b", "rmax"],
        System::Window => &["rho", "w", "b", "rmax"],
        System::Base => &["a", "b", "rmax"],
        System::Cosmos => &["t", "a", "b", "rmax"],
        System::Ethereum => &["rho", "w", "b", "c", "mean_aggs", "rmax"],
    };
    let given = [
        ("t", overrides.t.is_some()),
        ("a", overrides.a.is_some()),
        ("b", overrides.b.is_some()),
        ("rho", overrides.rho.is_some()),
        ("w", overrides.w.is_some()),
        ("c", overrides.c.is_some()),
        ("mean_aggs", overrides.mean_aggs.is_some()),
        ("rmax", overrides.rmax.is_some()),
    ];
    for (name, present) in given {
        if present && !allowed.contains(&name) {
            return Err(bad(format!(
                "parameter `{name}` does not apply to the {} system",
                system.label()
            )));
        }
    }
    Ok(())
}

/// Build the reward rule for a system, starting from its default parameters.
pub fn build_spec(system: System, o: &Overrides) -> Result<RewardSpec> {
    reject_stray(o, system)?;
    Ok(match system {
        System::Simple => {
            let d = SimpleParams::default();
            RewardSpec::Simple(SimpleParams::new(
                o.b.unwrap_or(d.bonus),
                o.rmax.unwrap_or(d.rmax),
            )?)
        }
        System::Threshold => {
            let d = ThresholdParams::default();
            RewardSpec::Threshold(ThresholdParams::new(
                o.t.unwrap_or(d.threshold),
                o.b.unwrap_or(d.bonus),
                o.rmax.unwrap_or(d.rmax),
            )?)
        }
        System::Scaling => {
            let d = ScalingParams::default();
            RewardSpec::Scaling(ScalingParams::new(
                o.b.unwrap_or(d.bonus),
                o.rmax.unwrap_or(d.rmax),
            )?)
        }
        System::Window => {
            let d = WindowParams::default();
            RewardSpec::Window(WindowParams::new(
                o.rho.unwrap_or(d.late_fraction),
                o.w.unwrap_or(d.window),
                o.b.unwrap_or(d.bonus),
                o.rmax.unwrap_or(d.rmax),
            )?)
        }
        System::Base => {
            let d = BaseParams::default();
            RewardSpec::Base(BaseParams::new(
                o.a.unwrap_or(d.base_fraction),
                o.b.unwrap_or(d.bonus),
                o.rmax.unwrap_or(d.rmax),
            )?)
        }
        System::Cosmos => {
            let d = CosmosParams::default();
            RewardSpec::Cosmos(CosmosParams::new(
                o.t.unwrap_or(d.threshold),
                o.a.unwrap_or(d.base_fraction),
                o.b.unwrap_or(d.bonus),
                o.rmax.unwrap_or(d.rmax),
            )?)
        }
        System::Ethereum => {
            let d = EthereumParams::default();
            RewardSpec::Ethereum(EthereumParams::new(
                o.rho.unwrap_or(d.late_fraction),
                o.b.unwrap_or(d.bonus),
                o.c.unwrap_or(d.committee),
                o.mean_aggs.unwrap_or(d.mean_aggregators),
                o.w.unwrap_or(d.window_slots),
                o.rmax.unwrap_or(d.rmax),
            )?)
        }
    })
}

/// Player stakes after merging flags over the file.
#[derive(Debug, Clone, Default)]
pub struct PlayerSpec {
    pub powers: Option<Vec<f64>>,
    pub attacker_power: Option<f64>,
    pub victim_power: Option<f64>,
    pub fillers: Option<usize>,
    pub attacker: Option<usize>,
    pub victim: Option<usize>,
}

pub struct Players {
    pub dist: PowerDistribution,
    pub attacker: usize,
    pub victim: usize,
}

/// Either an explicit stake list with optional attacker/victim indices, or
/// an attacker/victim stake pair padded with filler players.
pub fn resolve_players(spec: &PlayerSpec) -> Result<Players> {
    if let Some(powers) = &spec.powers {
        if spec.attacker_power.is_some() || spec.victim_power.is_some() || spec.fillers.is_some()
        {
            return Err(bad(
                "powers cannot be combined with attacker_power, victim_power or fillers",
            ));
        }
        let dist = PowerDistribution::new(powers.clone())?;
        let attacker = spec.attacker.unwrap_or(0);
        let victim = spec.victim.unwrap_or(1);
        for (role, idx) in [("attacker", attacker), ("victim", victim)] {
            if idx >= dist.len() {
                return Err(bad(format!(
                    "{role} index {idx} is out of range for {} players",
                    dist.len()
                )));
            }
        }
        if attacker == victim {
            return Err(bad("attacker and victim must differ"));
        }
        return Ok(Players { dist, attacker, victim });
    }
    let (Some(pa), Some(pv)) = (spec.attacker_power, spec.victim_power) else {
        return Err(bad(
            "give either powers or both attacker_power and victim_power",
        ));
    };
    for (name, idx, fixed) in [("attacker", spec.attacker, 0), ("victim", spec.victim, 1)] {
        if idx.is_some_and(|i| i != fixed) {
            return Err(bad(format!(
                "{name} index is fixed to {fixed} when stakes are given as a pair"
            )));
        }
    }
    let dist = match spec.fillers {
        None => PowerDistribution::pair_with_fillers(pa, pv)?,
        Some(n) => {
            let mut powers = vec![pa, pv];
            if n > 0 {
                let share = (1.0 - pa - pv) / n as f64;
                powers.extend(std::iter::repeat_n(share, n));
            }
            PowerDistribution::new(powers)?
        }
    };
    Ok(Players { dist, attacker: 0, victim: 1 })
}
