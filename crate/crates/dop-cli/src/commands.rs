//! One function per subcommand. Each merges its flags over the config file,
//! runs the library and renders the result.

use std::path::PathBuf;

use dop_core::analysis::{
    self, aggregator_sweep, critical_epsilon_eth, default_attacker_grid, default_victims,
    find_min_bonus_balanced_eth, find_min_bonus_nash_cosmos, power_grid, BonusCriterion,
    DEFAULT_TOLERANCE,
};
use dop_core::game::{utilities_under_profile, MAX_POWER};
use dop_core::mechanisms::{SimpleParams, SimpleReward};
use dop_core::metrics::{
    attack_metrics_feasible, check_cost_inversion, check_effectiveness_relation, robustness_scan,
    robustness_scan_with, targeted_cost_feasible, targeted_effectiveness_feasible,
};
use dop_core::simulator::{self, compare_to_closed_form, SimConfig, SimOutcome};
use dop_core::systems::{CosmosParams, CosmosReward, EthereumParams};
use dop_core::{AttackKind, Error, PowerDistribution, RewardSpec, StrategyProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{
    bad, build_spec, resolve_players, Attack, Criterion, FileConfig, Overrides, PlayerSpec,
    Suite, System,
};
use crate::output::{finite_or_null, render_csv, sci, write_text, Report};
use crate::{
    AggregatorsArgs, CriticalEpsilonArgs, MetricsArgs, PowerArgs, RobustnessArgs,
    SearchBonusArgs, SimulateArgs, SweepArgs, SystemArgs, VerifyArgs,
};

/// Maximum identity deviation the verify command tolerates.
const THEOREM_TOL: f64 = 1e-9;
/// Maximum utility gap between mirrored attacks.
const LEMMA_TOL: f64 = 1e-12;

pub enum Outcome {
    Done,
    /// The run finished but every cost it was asked for was undefined.
    OnlyUndefined,
}

fn merged_system(flag: Option<System>, file: &FileConfig) -> dop_core::Result<System> {
    match flag {
        Some(s) => Ok(s),
        None => match file.system.as_deref() {
            Some(name) => System::parse(name),
            None => Err(bad("system is required, pass --system or a config field")),
        },
    }
}

fn merged_overrides(args: &SystemArgs, file: &FileConfig) -> dop_core::Result<Overrides> {
    Ok(Overrides {
        t: args.t.or(file.t),
        a: args.a.or(file.a),
        b: args.b.or(file.b),
        rho: args.rho.or(file.rho),
        w: args.w.or(file.w),
        c: args.c.or(file.c),
        mean_aggs: match args.mean_aggs {
            Some(v) => Some(v),
            None => file.mean_aggs.as_ref().map(|m| m.scalar()).transpose()?,
        },
        rmax: args.rmax.or(file.rmax),
    })
}

fn merged_players(args: &PowerArgs, file: &FileConfig) -> PlayerSpec {
    PlayerSpec {
        powers: args.powers.clone().or_else(|| file.powers.clone()),
        attacker_power: args.attacker_power.or(file.attacker_power),
        victim_power: args.victim_power.or(file.victim_power),
        fillers: args.fillers.or(file.fillers),
        attacker: args.attacker.or(file.attacker),
        victim: args.victim.or(file.victim),
    }
}

fn merged_attack(flag: Option<Attack>, file: &FileConfig) -> dop_core::Result<Option<Attack>> {
    match flag {
        Some(a) => Ok(Some(a)),
        None => file.attack.as_deref().map(Attack::parse).transpose(),
    }
}

fn merged_kinds(
    flag: &Option<Vec<Attack>>,
    file: &FileConfig,
) -> dop_core::Result<Vec<AttackKind>> {
    let picked: Option<Vec<Attack>> = match flag {
        Some(v) => Some(v.clone()),
        None => file
            .kinds
            .as_ref()
            .map(|names| names.iter().map(|n| Attack::parse(n)).collect())
            .transpose()?,
    };
    Ok(picked
        .unwrap_or_else(|| vec![Attack::Omission, Attack::Delay])
        .into_iter()
        .map(Attack::kind)
        .collect())
}

fn out_path(flag: &Option<PathBuf>, file: &FileConfig) -> Option<PathBuf> {
    flag.clone().or_else(|| file.out.clone())
}

fn undefined_to_none(r: dop_core::Result<f64>) -> dop_core::Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedMetric(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn describe(profile: &StrategyProfile) -> String {
    match (profile.kind(), profile.attacker(), profile.victim()) {
        (Some(kind), Some(attacker), Some(victim)) => {
            format!("{} {attacker} -> {victim}", kind.label())
        }
        _ => "honest".to_string(),
    }
}

fn value_or_undefined(v: Option<f64>) -> String {
    v.map(sci).unwrap_or_else(|| "undefined".to_string())
}

pub fn metrics(args: &MetricsArgs, file: &FileConfig) -> anyhow::Result<Outcome> {
    let system = merged_system(args.sys.system, file)?;
    let spec = build_spec(system, &merged_overrides(&args.sys, file)?)?;
    let players = resolve_players(&merged_players(&args.players, file))?;
    let attack = merged_attack(args.attack, file)?.unwrap_or(Attack::Omission);
    let profile = StrategyProfile::attack(attack.kind(), players.attacker, players.victim)?;
    let reward = spec.build();
    // The committee system models whether a leader can omit at all; every
    // other rule treats leader-side omissions as always available.
    let q = match (&spec, attack) {
        (RewardSpec::Ethereum(p), Attack::Omission | Attack::Combined) => {
            p.omission_feasibility(players.dist.power(players.attacker)?)?
        }
        _ => 1.0,
    };
    let eff = targeted_effectiveness_feasible(&players.dist, &profile, reward.as_ref(), q)?;
    let cost =
        undefined_to_none(targeted_cost_feasible(&players.dist, &profile, reward.as_ref(), q))?;
    let worst = attack_metrics_feasible(&players.dist, &profile, reward.as_ref(), q)?;
    println!("attack = {}", describe(&profile));
    println!("omission_feasibility = {}", sci(q));
    println!("targeted_effectiveness = {}", sci(eff));
    println!("targeted_cost = {}", value_or_undefined(cost));
    println!("max_effectiveness = {}", sci(worst.effectiveness));
    println!("max_cost = {}", value_or_undefined(worst.cost));
    println!("worst_hit_player = {}", worst.max_loss_player);
    Ok(if cost.is_none() && worst.cost.is_none() {
        Outcome::OnlyUndefined
    } else {
        Outcome::Done
    })
}

pub fn sweep(args: &SweepArgs, file: &FileConfig) -> anyhow::Result<Outcome> {
    let system = merged_system(args.sys.system, file)?;
    let spec = build_spec(system, &merged_overrides(&args.sys, file)?)?;
    let kinds = merged_kinds(&args.kinds, file)?;
    let attackers = args
        .attackers
        .clone()
        .or_else(|| file.attackers.clone())
        .unwrap_or_else(default_attacker_grid);
    let victims = args
        .victims
        .clone()
        .or_else(|| file.victims.clone())
        .unwrap_or_else(default_victims);
    let table = analysis::sweep(&spec, &kinds, &attackers, &victims)?;
    write_text(out_path(&args.out, file).as_deref(), &render_csv(&table))?;
    Ok(if !table.is_empty() && table.rows.iter().all(|r| r.cost.is_none()) {
        Outcome::OnlyUndefined
    } else {
        Outcome::Done
    })
}

pub fn search_bonus(args: &SearchBonusArgs, file: &FileConfig) -> anyhow::Result<Outcome> {
    let system = match args.system {
        Some(s) => s,
        None => match file.system.as_deref() {
            Some(name) => System::parse(name)?,
            None => System::Cosmos,
        },
    };
    let criterion = match args.criterion {
        Some(c) => c,
        None => match file.criterion.as_deref() {
            Some(name) => Criterion::parse(name)?,
            None => match system {
                System::Cosmos => Criterion::Nash,
                System::Ethereum => Criterion::Balanced,
                other => {
                    return Err(bad(format!(
                        "no bonus search is defined for the {} system",
                        other.label()
                    ))
                    .into())
                }
            },
        },
    };
    let tolerance = args.tolerance.or(file.tolerance).unwrap_or(DEFAULT_TOLERANCE);
    let result = match (system, criterion) {
        (System::Cosmos, Criterion::Nash) => {
            for (name, given) in [("rho", args.rho.or(file.rho)), ("epsilon", args.epsilon.or(file.epsilon))] {
                if given.is_some() {
                    return Err(
                        bad(format!("parameter `{name}` does not apply to the nash search")).into()
                    );
                }
            }
            let d = CosmosParams::default();
            find_min_bonus_nash_cosmos(
                args.t.or(file.t).unwrap_or(d.threshold),
                args.a.or(file.a).unwrap_or(d.base_fraction),
                tolerance,
            )?
        }
        (System::Ethereum, Criterion::Balanced) => {
            for (name, given) in [("t", args.t.or(file.t)), ("a", args.a.or(file.a))] {
                if given.is_some() {
                    return Err(bad(format!(
                        "parameter `{name}` does not apply to the balanced search"
                    ))
                    .into());
                }
            }
            let Some(epsilon) = args.epsilon.or(file.epsilon) else {
                return Err(bad("the balanced search needs epsilon").into());
            };
            let d = EthereumParams::default();
            find_min_bonus_balanced_eth(
                args.rho.or(file.rho).unwrap_or(d.late_fraction),
                epsilon,
                tolerance,
            )?
        }
        (s, c) => {
            return Err(bad(format!(
                "the {} criterion is not defined for the {} system",
                c.label(),
                s.label()
            ))
            .into())
        }
    };
    println!("criterion = {}", criterion_text(&result.criterion));
    println!("feasible = {}", result.feasible);
    println!(
        "b_star = {}",
        result.b_star.map(sci).unwrap_or_else(|| "none".to_string())
    );
    match result.worst_case_pair {
        Some((attacker, victim)) => {
            println!("worst_case_pair = ({}, {})", sci(attacker), sci(victim));
        }
        None => println!("worst_case_pair = none"),
    }
    println!("tolerance = {}", sci(result.tolerance));
    Ok(Outcome::Done)
}

fn criterion_text(criterion: &BonusCriterion) -> String {
    match criterion {
        BonusCriterion::Nash => "nash".to_string(),
        BonusCriterion::Balanced { epsilon } => format!("balanced epsilon={}", sci(*epsilon)),
    }
}

pub fn critical_epsilon(args: &CriticalEpsilonArgs, file: &FileConfig) -> anyhow::Result<Outcome> {
    let rho = args
        .rho
        .or(file.rho)
        .unwrap_or(EthereumParams::default().late_fraction);
    println!("critical_epsilon = {}", sci(critical_epsilon_eth(rho)?));
    Ok(Outcome::Done)
}

pub fn aggregators(args: &AggregatorsArgs, file: &FileConfig) -> anyhow::Result<Outcome> {
    let d = EthereumParams::default();
    let params = EthereumParams::new(
        args.rho.or(file.rho).unwrap_or(d.late_fraction),
        args.b.or(file.b).unwrap_or(d.bonus),
        args.c.or(file.c).unwrap_or(d.committee),
        d.mean_aggregators,
        args.w.or(file.w).unwrap_or(d.window_slots),
        args.rmax.or(file.rmax).unwrap_or(d.rmax),
    )?;
    let counts = args
        .mean_aggs
        .clone()
        .or_else(|| file.mean_aggs.as_ref().map(|m| m.list()))
        .unwrap_or_else(|| vec![8.0, 16.0]);
    let attackers = args
        .attackers
        .clone()
        .or_else(|| file.attackers.clone())
        .unwrap_or_else(default_attacker_grid);
    let table = aggregator_sweep(&params, &counts, &attackers)?;
    write_text(out_path(&args.out, file).as_deref(), &render_csv(&table))?;
    Ok(Outcome::Done)
}

pub fn simulate(args: &SimulateArgs, file: &FileConfig) -> anyhow::Result<Outcome> {
    let system = merged_system(args.sys.system, file)?;
    let spec = build_spec(system, &merged_overrides(&args.sys, file)?)?;
    let players = resolve_players(&merged_players(&args.players, file))?;
    let profile = match merged_attack(args.attack, file)? {
        None => StrategyProfile::Honest,
        Some(a) => StrategyProfile::attack(a.kind(), players.attacker, players.victim)?,
    };
    let defaults = SimConfig::default();
    let cfg = SimConfig::new(
        args.rounds.or(file.rounds).unwrap_or(defaults.rounds),
        args.seed.or(file.seed).unwrap_or(defaults.seed),
    )?;
    let (sim, expected) = match spec {
        RewardSpec::Ethereum(p) => (
            simulator::simulate_ethereum(&players.dist, &profile, &p, cfg)?,
            simulator::ethereum_expected_utilities(&players.dist, &profile, &p)?,
        ),
        _ => {
            let reward = spec.build();
            (
                simulator::simulate(&players.dist, &profile, reward.as_ref(), cfg)?,
                utilities_under_profile(&players.dist, &profile, reward.as_ref())?,
            )
        }
    };
    let cmp = compare_to_closed_form(&sim, expected.as_slice())?;
    let report = Report {
        means: sim.means(),
        std_errors: sim.players.iter().map(|p| p.std_error).collect(),
        z_scores: finite_or_null(&cmp.z_scores),
        pass: cmp.pass,
    };
    write_text(out_path(&args.out, file).as_deref(), &report.render())?;
    Ok(Outcome::Done)
}

pub fn robustness(args: &RobustnessArgs, file: &FileConfig) -> anyhow::Result<Outcome> {
    let system = merged_system(args.sys.system, file)?;
    let spec = build_spec(system, &merged_overrides(&args.sys, file)?)?;
    let players = resolve_players(&merged_players(&args.players, file))?;
    let kinds = merged_kinds(&args.kinds, file)?;
    let n = players.dist.len();
    let mut pairs = Vec::with_capacity(n * (n - 1));
    for attacker in 0..n {
        for victim in 0..n {
            if attacker != victim {
                pairs.push((attacker, victim));
            }
        }
    }
    let reward = spec.build();
    let result = match &spec {
        RewardSpec::Ethereum(p) => robustness_scan_with(
            &players.dist,
            reward.as_ref(),
            &kinds,
            &pairs,
            |attacker_power| p.omission_feasibility(attacker_power),
        ),
        _ => robustness_scan(&players.dist, reward.as_ref(), &kinds, &pairs),
    }?;
    println!("epsilon = {}", sci(result.epsilon));
    println!("gamma = {}", value_or_undefined(result.gamma));
    println!(
        "worst_effectiveness_attack = {}",
        describe(&result.worst_effectiveness_attack)
    );
    println!(
        "worst_cost_attack = {}",
        result
            .worst_cost_attack
            .as_ref()
            .map(describe)
            .unwrap_or_else(|| "none".to_string())
    );
    println!("undefined_costs = {}", result.undefined_costs);
    Ok(if result.gamma.is_none() {
        Outcome::OnlyUndefined
    } else {
        Outcome::Done
    })
}

pub fn verify(args: &VerifyArgs, file: &FileConfig) -> anyhow::Result<Outcome> {
    let suite = match args.suite {
        Some(s) => s,
        None => file
            .suite
            .as_deref()
            .map(Suite::parse)
            .transpose()?
            .unwrap_or(Suite::Theorems),
    };
    let report = match suite {
        Suite::Theorems => verify_theorems(args.grid.or(file.grid).unwrap_or(0.01))?,
        Suite::Lemma => verify_lemma(args.seed.or(file.seed).unwrap_or(2024))?,
        Suite::Oracle => verify_oracle(
            args.rounds.or(file.rounds).unwrap_or(1_000_000),
            args.seed.or(file.seed).unwrap_or(7),
        )?,
    };
    let pass = report.pass;
    write_text(out_path(&args.out, file).as_deref(), &report.render())?;
    if pass {
        Ok(Outcome::Done)
    } else {
        Err(anyhow::anyhow!("verification failed"))
    }
}

/// Worst deviation of the cost inversion and of the effectiveness relation
/// over the stake grid, for every cataloged reward rule. The report reuses
/// the simulation schema: means holds the two worst deviations, z_scores
/// holds them as fractions of the tolerance.
fn verify_theorems(step: f64) -> anyhow::Result<Report> {
    let grid = power_grid(step, MAX_POWER, step)?;
    let mut worst_product = 0.0f64;
    let mut worst_residual = 0.0f64;
    for spec in RewardSpec::catalog_defaults() {
        let reward = spec.build();
        for &attacker_power in &grid {
            for &victim_power in &grid {
                let dist = PowerDistribution::pair_with_fillers(attacker_power, victim_power)?;
                let (om_cost, dl_cost) = check_cost_inversion(&dist, reward.as_ref(), 0, 1)?;
                worst_product = worst_product.max((om_cost * dl_cost - 1.0).abs());
                let residual = check_effectiveness_relation(&dist, reward.as_ref(), 0, 1)?;
                worst_residual = worst_residual.max(residual.abs());
            }
        }
    }
    Ok(Report {
        means: vec![worst_product, worst_residual],
        std_errors: vec![0.0, 0.0],
        z_scores: finite_or_null(&[worst_product / THEOREM_TOL, worst_residual / THEOREM_TOL]),
        pass: worst_product < THEOREM_TOL && worst_residual < THEOREM_TOL,
    })
}

/// Worst per-player utility gap between mirrored omission and delay attacks
/// over randomized stake distributions and the whole reward catalog.
fn verify_lemma(seed: u64) -> anyhow::Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let catalog = RewardSpec::catalog_defaults();
    let mut worst_gap = 0.0f64;
    for trial in 0..1000usize {
        let n = rng.random_range(4..=6);
        let mut powers: Vec<f64> = (0..n).map(|_| rng.random_range(0.8..=1.2)).collect();
        let total: f64 = powers.iter().sum();
        for p in &mut powers {
            *p /= total;
        }
        let dist = PowerDistribution::new(powers)?;
        let attacker = rng.random_range(0..n);
        let mut victim = rng.random_range(0..n - 1);
        if victim >= attacker {
            victim += 1;
        }
        let reward = catalog[trial % catalog.len()].build();
        let omission = StrategyProfile::omission(attacker, victim)?;
        let delay = StrategyProfile::delay(victim, attacker)?;
        let u_om = utilities_under_profile(&dist, &omission, reward.as_ref())?;
        let u_dl = utilities_under_profile(&dist, &delay, reward.as_ref())?;
        for (a, b) in u_om.as_slice().iter().zip(u_dl.as_slice()) {
            worst_gap = worst_gap.max((a - b).abs());
        }
    }
    Ok(Report {
        means: vec![worst_gap],
        std_errors: vec![0.0],
        z_scores: finite_or_null(&[worst_gap / LEMMA_TOL]),
        pass: worst_gap <= LEMMA_TOL,
    })
}

struct OracleAccumulator {
    means: Vec<f64>,
    std_errors: Vec<f64>,
    z_scores: Vec<f64>,
    pass: bool,
}

impl OracleAccumulator {
    fn push(&mut self, sim: &SimOutcome, expected: &[f64]) -> dop_core::Result<()> {
        let cmp = compare_to_closed_form(sim, expected)?;
        self.means.extend(sim.means());
        self.std_errors.extend(sim.players.iter().map(|p| p.std_error));
        self.z_scores.extend(cmp.z_scores.iter().copied());
        self.pass &= cmp.pass;
        Ok(())
    }
}

/// Five seeded simulations checked against their exact utilities,
/// concatenated player by player.
fn verify_oracle(rounds: u64, seed: u64) -> anyhow::Result<Report> {
    let cfg = SimConfig::new(rounds, seed)?;
    let mut acc =
        OracleAccumulator { means: Vec::new(), std_errors: Vec::new(), z_scores: Vec::new(), pass: true };

    let dist = PowerDistribution::pair_with_fillers(0.25, 0.15)?;
    let omission = StrategyProfile::omission(0, 1)?;
    let delay = StrategyProfile::delay(0, 1)?;

    let cosmos = CosmosReward(CosmosParams::default());
    let expected = utilities_under_profile(&dist, &omission, &cosmos)?;
    acc.push(&simulator::simulate(&dist, &omission, &cosmos, cfg)?, expected.as_slice())?;
    let expected = utilities_under_profile(&dist, &StrategyProfile::Honest, &cosmos)?;
    acc.push(
        &simulator::simulate(&dist, &StrategyProfile::Honest, &cosmos, cfg)?,
        expected.as_slice(),
    )?;

    let simple = SimpleReward(SimpleParams::default());
    let expected = utilities_under_profile(&dist, &delay, &simple)?;
    acc.push(&simulator::simulate(&dist, &delay, &simple, cfg)?, expected.as_slice())?;

    let eth = EthereumParams::default();
    let expected = simulator::ethereum_expected_utilities(&dist, &omission, &eth)?;
    acc.push(
        &simulator::simulate_ethereum(&dist, &omission, &eth, cfg)?,
        expected.as_slice(),
    )?;
    let expected = simulator::ethereum_expected_utilities(&dist, &delay, &eth)?;
    acc.push(&simulator::simulate_ethereum(&dist, &delay, &eth, cfg)?, expected.as_slice())?;

    Ok(Report {
        means: acc.means,
        std_errors: acc.std_errors,
        z_scores: finite_or_null(&acc.z_scores),
        pass: acc.pass,
    })
}
