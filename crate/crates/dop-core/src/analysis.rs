//! Grid sweeps over attack metrics and searches for bonus levels that make
//! the attacks unattractive.
//!
//! Sweeps evaluate the closed forms of the systems module, or the exact
//! game expectations for the stylized mechanisms, over attacker and victim
//! stake grids. Searches look for the smallest leader bonus meeting a
//! design criterion; every cost bound involved is monotone in the bonus, so
//! the feasible set is an interval and a coarse scan plus bisection finds
//! its lower edge. The monotonicity is checked before each search and a
//! plain linear scan takes over if it ever fails to hold.

use crate::error::{invalid, undefined, Error, Result};
use crate::game::{AttackKind, PowerDistribution, StrategyProfile, MAX_POWER};
use crate::metrics::{targeted_cost, targeted_effectiveness};
use crate::systems::{
    cosmos_attacker_loss_term, cosmos_delay_metrics, cosmos_omission_cost,
    cosmos_omission_effectiveness, cosmos_victim_loss_term, eth_delay_cost,
    eth_delay_effectiveness, eth_omission_cost, eth_omission_effectiveness, CosmosParams,
    EthereumParams, Feasibility, RewardSpec,
};

/// Stake step of the grid the searches quantify over.
pub const SEARCH_GRID_STEP: f64 = 0.001;

/// Default bisection tolerance of the bonus searches.
pub const DEFAULT_TOLERANCE: f64 = 1e-4;

/// Points probed by the coarse scan that brackets a feasible interval
/// before bisection.
const SEED_SCAN_POINTS: usize = 513;

/// Points probed per existence check inside the critical-epsilon search.
const EXISTENCE_SCAN_POINTS: usize = 4097;

/// Inclusive stake grid `start, start + step, ...` up to `stop`, with a
/// 1e-12 slack at the top so a stop sitting on a grid point stays included.
pub fn power_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    for (name, v) in [("start", start), ("stop", stop), ("step", step)] {
        if !v.is_finite() {
            return Err(invalid(format!("grid {name} must be finite, got {v}")));
        }
    }
    if start <= 0.0 || step <= 0.0 {
        return Err(invalid("grid start and step must be positive"));
    }
    if stop < start {
        return Err(invalid("grid stop must not precede its start"));
    }
    if stop > MAX_POWER + 1e-12 {
        return Err(invalid("stake grids cannot exceed the power cap of 1/3"));
    }
    if (stop - start) / step > 1e7 {
        return Err(invalid("grid resolves to over ten million points"));
    }
    let mut out = Vec::new();
    for i in 0u32.. {
        let x = start + f64::from(i) * step;
        if x > stop + 1e-12 {
            break;
        }
        out.push(x);
    }
    Ok(out)
}

/// Attacker stakes used by default in sweeps: 1% to 33% in half-percent
/// steps.
pub fn default_attacker_grid() -> Vec<f64> {
    power_grid(0.01, MAX_POWER, 0.005).expect("static grid is valid")
}

/// Victim stakes used by default in sweeps.
pub fn default_victims() -> Vec<f64> {
    vec![0.05, 0.15, 0.25]
}

fn search_grid() -> Vec<f64> {
    power_grid(SEARCH_GRID_STEP, MAX_POWER, SEARCH_GRID_STEP).expect("static grid is valid")
}

/// One attack evaluated at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub attacker_power: f64,
    pub victim_power: f64,
    /// Attack label, e.g. `omission` or `delay`.
    pub attack: String,
    pub effectiveness: f64,
    /// `None` when the victim loses exactly nothing.
    pub cost: Option<f64>,
}

/// Rows of a sweep, one per (attack, victim, attacker) grid point, in that
/// nesting order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn check_grid_power(role: &str, v: f64) -> Result<f64> {
    if !v.is_finite() || v <= 0.0 || v > MAX_POWER + 1e-12 {
        return Err(invalid(format!("{role} stake must lie in (0, 1/3], got {v}")));
    }
    Ok(v)
}

fn none_when_undefined(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(c) => Ok(Some(c)),
        Err(Error::UndefinedMetric(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn pair_metrics(
    spec: &RewardSpec,
    kind: AttackKind,
    attacker_power: f64,
    victim_power: f64,
) -> Result<(f64, Option<f64>)> {
    match (spec, kind) {
        (RewardSpec::Cosmos(p), AttackKind::Omission) => {
            let eff = cosmos_omission_effectiveness(p, victim_power)?;
            let cost = none_when_undefined(cosmos_omission_cost(p, attacker_power, victim_power))?;
            Ok((eff, cost))
        }
        (RewardSpec::Cosmos(p), AttackKind::Delay) => {
            let m = cosmos_delay_metrics(p, attacker_power, victim_power)?;
            Ok((m.effectiveness, m.cost))
        }
        (RewardSpec::Ethereum(p), AttackKind::Omission) => {
            let eff = eth_omission_effectiveness(p, attacker_power, Feasibility::Modeled)?;
            let cost = Some(eth_omission_cost(p, attacker_power)?);
            Ok((eff, cost))
        }
        (RewardSpec::Ethereum(p), AttackKind::Delay) => {
            let eff = eth_delay_effectiveness(p, victim_power)?;
            let cost = none_when_undefined(eth_delay_cost(p, victim_power))?;
            Ok((eff, cost))
        }
        (_, kind) => {
            let dist = PowerDistribution::pair_with_fillers(attacker_power, victim_power)?;
            let profile = StrategyProfile::attack(kind, 0, 1)?;
            let reward = spec.build();
            let eff = targeted_effectiveness(&dist, &profile, reward.as_ref())?;
            let cost = none_when_undefined(targeted_cost(&dist, &profile, reward.as_ref()))?;
            Ok((eff, cost))
        }
    }
}

/// Evaluate the targeted metrics of each attack kind on the full grid of
/// (victim, attacker) stakes. The Cosmos and Ethereum rules use their
/// closed forms (Ethereum omissions include the aggregation feasibility);
/// the stylized mechanisms are evaluated exactly on an attacker/victim
/// distribution padded with filler players.
pub fn sweep(
    spec: &RewardSpec,
    kinds: &[AttackKind],
    attacker_grid: &[f64],
    victims: &[f64],
) -> Result<SweepTable> {
    if kinds.is_empty() || attacker_grid.is_empty() || victims.is_empty() {
        return Err(invalid("sweep needs at least one kind, attacker and victim"));
    }
    if kinds.contains(&AttackKind::Combined) {
        return Err(invalid("sweeps cover single attacks, not combined ones"));
    }
    for &a in attacker_grid {
        check_grid_power("attacker", a)?;
    }
    for &v in victims {
        check_grid_power("victim", v)?;
    }
    let mut rows = Vec::with_capacity(kinds.len() * victims.len() * attacker_grid.len());
    for &kind in kinds {
        for &victim_power in victims {
            for &attacker_power in attacker_grid {
                let (effectiveness, cost) = pair_metrics(spec, kind, attacker_power, victim_power)?;
                rows.push(SweepRow {
                    attacker_power,
                    victim_power,
                    attack: kind.label().to_string(),
                    effectiveness,
                    cost,
                });
            }
        }
    }
    Ok(SweepTable { rows })
}

/// Omission effectiveness under the committee aggregation model for several
/// mean aggregator counts. Rows carry a `omission-k<count>` label and no
/// victim or cost: the feasibility factor depends on the attacker alone.
pub fn aggregator_sweep(
    params: &EthereumParams,
    mean_aggregators: &[f64],
    attacker_grid: &[f64],
) -> Result<SweepTable> {
    if mean_aggregators.is_empty() || attacker_grid.is_empty() {
        return Err(invalid("aggregator sweep needs at least one count and one attacker"));
    }
    for &a in attacker_grid {
        check_grid_power("attacker", a)?;
    }
    let mut rows = Vec::with_capacity(mean_aggregators.len() * attacker_grid.len());
    for &k in mean_aggregators {
        let p = EthereumParams::new(
            params.late_fraction,
            params.bonus,
            params.committee,
            k,
            params.window_slots,
            params.rmax,
        )?;
        for &attacker_power in attacker_grid {
            let effectiveness =
                eth_omission_effectiveness(&p, attacker_power, Feasibility::Modeled)?;
            rows.push(SweepRow {
                attacker_power,
                victim_power: 0.0,
                attack: format!("omission-k{k}"),
                effectiveness,
                cost: None,
            });
        }
    }
    Ok(SweepTable { rows })
}

/// Criterion a bonus search aims for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BonusCriterion {
    /// Every attack strictly costs the attacker something, so honest play is
    /// the best response everywhere on the grid.
    Nash,
    /// Every attack's cost stays within `epsilon` of one, so neither attack
    /// direction is much cheaper than the other.
    Balanced { epsilon: f64 },
}

/// Outcome of a bonus search.
#[derive(Debug, Clone, PartialEq)]
pub struct BonusSearchResult {
    pub criterion: BonusCriterion,
    /// Whether any bonus in [0, 1] meets the criterion at the scan
    /// resolution.
    pub feasible: bool,
    /// Smallest bonus meeting the criterion, within `tolerance`.
    pub b_star: Option<f64>,
    /// Stakes of the constraint closest to violation at `b_star`, as an
    /// (attacker, victim) pair; a side the constraint does not involve is
    /// reported as 0.0.
    pub worst_case_pair: Option<(f64, f64)>,
    pub tolerance: f64,
}

/// Whether the pool-splitting rule with this bonus makes both attacks
/// strictly costly for every attacker and victim stake on the search grid.
pub fn nash_criterion_holds(threshold: f64, base_fraction: f64, bonus: f64) -> Result<bool> {
    let params = CosmosParams::new(threshold, base_fraction, bonus, 1.0)?;
    Ok(nash_holds(&params, &search_grid()))
}

/// Whether the Ethereum-style rule with this bonus keeps both attack costs
/// within `epsilon` of one on the whole search grid.
pub fn balanced_criterion_holds(rho: f64, bonus: f64, epsilon: f64) -> Result<bool> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(invalid(format!("epsilon must be non-negative, got {epsilon}")));
    }
    let params = balanced_params(rho, bonus)?;
    balanced_holds(&params, epsilon, &search_grid())
}

/// A delay against stake y costs the reciprocal of an omission by y, so
/// positivity of the omission cost on every ordered pair already covers
/// both attacks. The omission cost is a ratio of the attacker-side and
/// victim-side loss terms, and it is positive on all pairs exactly when
/// each term keeps one sign on the whole grid; the attacker-side term is
/// positive near zero stake for any positive bonus, so both must stay
/// positive.
fn nash_holds(params: &CosmosParams, grid: &[f64]) -> bool {
    grid.iter().all(|&x| cosmos_attacker_loss_term(params, x) > 0.0)
        && grid.iter().all(|&x| cosmos_victim_loss_term(params, x) > 0.0)
}

fn balanced_params(rho: f64, bonus: f64) -> Result<EthereumParams> {
    let d = EthereumParams::default();
    EthereumParams::new(rho, bonus, d.committee, d.mean_aggregators, d.window_slots, d.rmax)
}

fn balanced_holds(params: &EthereumParams, epsilon: f64, grid: &[f64]) -> Result<bool> {
    let lo = 1.0 - epsilon;
    let hi = 1.0 + epsilon;
    for &x in grid {
        let om = eth_omission_cost(params, x)?;
        if om < lo || om > hi {
            return Ok(false);
        }
        let dl = eth_delay_cost(params, x)?;
        if dl < lo || dl > hi {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_tolerance(tolerance: f64) -> Result<f64> {
    if !tolerance.is_finite() || tolerance <= 0.0 || tolerance < 1e-9 {
        return Err(invalid(format!(
            "tolerance must be at least 1e-9, got {tolerance}"
        )));
    }
    Ok(tolerance)
}

fn non_decreasing(samples: &[f64]) -> bool {
    samples.windows(2).all(|w| w[1] >= w[0])
}

fn non_increasing(samples: &[f64]) -> bool {
    samples.windows(2).all(|w| w[1] <= w[0])
}

const MONOTONICITY_SAMPLES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Lower edge of `{b : pred(b)}` on [0, 1], assuming the set is an
/// interval: scan coarsely for a feasible seed, then bisect between the
/// last infeasible and first feasible scan points.
fn scan_and_bisect<P: Fn(f64) -> bool>(pred: P, tolerance: f64) -> Option<f64> {
    let step = 1.0 / (SEED_SCAN_POINTS - 1) as f64;
    let mut first_true = None;
    for i in 0..SEED_SCAN_POINTS {
        let b = (i as f64 * step).min(1.0);
        if pred(b) {
            first_true = Some((i, b));
            break;
        }
    }
    let (i, mut hi) = first_true?;
    if i == 0 {
        return Some(0.0);
    }
    let mut lo = (i - 1) as f64 * step;
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Plain left-to-right scan in `tolerance` steps, as a fallback when the
/// interval shape cannot be relied on.
fn linear_scan<P: Fn(f64) -> bool>(pred: P, tolerance: f64) -> Result<Option<f64>> {
    let steps = (1.0 / tolerance).ceil() as u64;
    if steps > 2_000_000 {
        return Err(invalid(
            "cost bounds are not monotone in the bonus here and a linear scan \
             at this tolerance would need over two million probes",
        ));
    }
    for i in 0..=steps {
        let b = (i as f64 * tolerance).min(1.0);
        if pred(b) {
            return Ok(Some(b));
        }
    }
    Ok(None)
}

fn search_lower_edge<P: Fn(f64) -> bool>(
    pred: P,
    monotone: bool,
    tolerance: f64,
) -> Result<Option<f64>> {
    if monotone {
        Ok(scan_and_bisect(pred, tolerance))
    } else {
        linear_scan(pred, tolerance)
    }
}

/// Smallest bonus of the pool-splitting rule under which no player can gain
/// by attacking anyone: both loss terms behind the omission cost must stay
/// positive over the whole stake grid. The answer does not depend on
/// `base_fraction`, which only rescales all losses alike, but the argument
/// is kept so the searched rule is stated in full.
pub fn find_min_bonus_nash_cosmos(
    threshold: f64,
    base_fraction: f64,
    tolerance: f64,
) -> Result<BonusSearchResult> {
    check_tolerance(tolerance)?;
    CosmosParams::new(threshold, base_fraction, 0.0, 1.0)?;
    let grid = search_grid();
    let params_at = |b: f64| CosmosParams { threshold, base_fraction, bonus: b, rmax: 1.0 };

    // The attacker-side term rises with the bonus and the victim-side term
    // falls, so the feasible bonus set is an interval.
    let attacker_margin: Vec<f64> = MONOTONICITY_SAMPLES
        .iter()
        .map(|&b| {
            let p = params_at(b);
            grid.iter().map(|&x| cosmos_attacker_loss_term(&p, x)).fold(f64::INFINITY, f64::min)
        })
        .collect();
    let victim_margin: Vec<f64> = MONOTONICITY_SAMPLES
        .iter()
        .map(|&b| {
            let p = params_at(b);
            grid.iter().map(|&x| cosmos_victim_loss_term(&p, x)).fold(f64::INFINITY, f64::min)
        })
        .collect();
    let monotone = non_decreasing(&attacker_margin) && non_increasing(&victim_margin);

    let pred = |b: f64| nash_holds(&params_at(b), &grid);
    let b_star = search_lower_edge(pred, monotone, tolerance)?;
    let worst_case_pair = b_star.map(|b| {
        let p = params_at(b);
        // The cost closest to zero pairs the weakest attacker-side term
        // with the strongest victim-side one.
        let attacker = argmin(&grid, |x| cosmos_attacker_loss_term(&p, x));
        let victim = argmax(&grid, |x| cosmos_victim_loss_term(&p, x));
        (attacker, victim)
    });
    Ok(BonusSearchResult {
        criterion: BonusCriterion::Nash,
        feasible: b_star.is_some(),
        b_star,
        worst_case_pair,
        tolerance,
    })
}

fn argmin<F: Fn(f64) -> f64>(grid: &[f64], f: F) -> f64 {
    let mut best = grid[0];
    let mut best_v = f(best);
    for &x in &grid[1..] {
        let v = f(x);
        if v < best_v {
            best_v = v;
            best = x;
        }
    }
    best
}

fn argmax<F: Fn(f64) -> f64>(grid: &[f64], f: F) -> f64 {
    let mut best = grid[0];
    let mut best_v = f(best);
    for &x in &grid[1..] {
        let v = f(x);
        if v > best_v {
            best_v = v;
            best = x;
        }
    }
    best
}

/// Smallest bonus keeping both attack costs of the Ethereum-style rule
/// within `epsilon` of one across the stake grid. Feasible intervals
/// narrower than the seed scan step (about 0.002) can be missed and
/// reported infeasible.
pub fn find_min_bonus_balanced_eth(
    rho: f64,
    epsilon: f64,
    tolerance: f64,
) -> Result<BonusSearchResult> {
    check_tolerance(tolerance)?;
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    balanced_params(rho, 0.0)?;
    let grid = search_grid();

    // Omission costs rise with the bonus and delay costs fall, each
    // uniformly over the grid, so the feasible set is an interval.
    let mut om_ranges = Vec::new();
    let mut dl_ranges = Vec::new();
    for &b in &MONOTONICITY_SAMPLES {
        let p = balanced_params(rho, b)?;
        let ranges = eth_cost_ranges(&p, &grid)?;
        om_ranges.push(ranges.omission);
        dl_ranges.push(ranges.delay);
    }
    let monotone = non_decreasing(&stripped(&om_ranges, 0))
        && non_decreasing(&stripped(&om_ranges, 1))
        && non_increasing(&stripped(&dl_ranges, 0))
        && non_increasing(&stripped(&dl_ranges, 1));

    let pred = |b: f64| match balanced_params(rho, b) {
        Ok(p) => balanced_holds(&p, epsilon, &grid).unwrap_or(false),
        Err(_) => false,
    };
    let b_star = search_lower_edge(pred, monotone, tolerance)?;
    let worst_case_pair = match b_star {
        Some(b) => Some(binding_balanced_pair(rho, b, epsilon, &grid)?),
        None => None,
    };
    Ok(BonusSearchResult {
        criterion: BonusCriterion::Balanced { epsilon },
        feasible: b_star.is_some(),
        b_star,
        worst_case_pair,
        tolerance,
    })
}

fn fold_min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn fold_max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn stripped(ranges: &[(f64, f64)], side: usize) -> Vec<f64> {
    ranges.iter().map(|r| if side == 0 { r.0 } else { r.1 }).collect()
}

fn binding_balanced_pair(
    rho: f64,
    bonus: f64,
    epsilon: f64,
    grid: &[f64],
) -> Result<(f64, f64)> {
    let p = balanced_params(rho, bonus)?;
    let lo = 1.0 - epsilon;
    let hi = 1.0 + epsilon;
    // Slack of each band edge; omission constraints involve only the
    // attacker, delay constraints only the victim.
    let mut best_slack = f64::INFINITY;
    let mut pair = (0.0, 0.0);
    for &x in grid {
        let om = eth_omission_cost(&p, x)?;
        let om_slack = (om - lo).min(hi - om);
        if om_slack < best_slack {
            best_slack = om_slack;
            pair = (x, 0.0);
        }
        let dl = eth_delay_cost(&p, x)?;
        let dl_slack = (dl - lo).min(hi - dl);
        if dl_slack < best_slack {
            best_slack = dl_slack;
            pair = (0.0, x);
        }
    }
    Ok(pair)
}

/// Smallest cost band half-width `epsilon` for which some bonus balances
/// the Ethereum-style rule, found by bisecting over `epsilon` with a fixed
/// 4096-step bonus scan as the inner existence check. The result is
/// granular to about 1e-4 plus the scan's detection bias. It does not
/// depend on `rho`: rescaling the bonus by `1 - rho` maps the constraint
/// set of one `rho` onto another's.
pub fn critical_epsilon_eth(rho: f64) -> Result<f64> {
    balanced_params(rho, 0.0)?;
    let grid = search_grid();
    let exists = |eps: f64| -> bool {
        let step = 1.0 / (EXISTENCE_SCAN_POINTS - 1) as f64;
        (0..EXISTENCE_SCAN_POINTS).any(|i| {
            let b = (i as f64 * step).min(1.0);
            match balanced_params(rho, b) {
                Ok(p) => balanced_holds(&p, eps, &grid).unwrap_or(false),
                Err(_) => false,
            }
        })
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    if exists(lo) {
        return Ok(lo);
    }
    if !exists(hi) {
        return Err(undefined(
            "no bonus balances the costs even with a band of width one",
        ));
    }
    while hi - lo > DEFAULT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if exists(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Cost extremes of the pool-splitting rule over all ordered grid pairs, a
/// probe for how costly the attacks stay at a given bonus. Pairs whose
/// cost is undefined are skipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosmosCostExtremes {
    pub min_omission_cost: f64,
    pub min_delay_cost: f64,
    pub max_delay_cost: f64,
}

pub fn cosmos_cost_extremes(params: &CosmosParams, grid: &[f64]) -> Result<CosmosCostExtremes> {
    if grid.is_empty() {
        return Err(invalid("cost extremes need a non-empty grid"));
    }
    for &x in grid {
        check_grid_power("grid", x)?;
    }
    let mut min_om = f64::INFINITY;
    let mut min_dl = f64::INFINITY;
    let mut max_dl = f64::NEG_INFINITY;
    for &a in grid {
        for &v in grid {
            if let Ok(c) = cosmos_omission_cost(params, a, v) {
                min_om = min_om.min(c);
            }
            if let Ok(m) = cosmos_delay_metrics(params, a, v) {
                if let Some(c) = m.cost {
                    min_dl = min_dl.min(c);
                    max_dl = max_dl.max(c);
                }
            }
        }
    }
    if !min_om.is_finite() || !min_dl.is_finite() {
        return Err(undefined("every grid pair had an undefined cost"));
    }
    Ok(CosmosCostExtremes { min_omission_cost: min_om, min_delay_cost: min_dl, max_delay_cost: max_dl })
}

/// Attack cost ranges of the Ethereum-style rule over a stake grid. The
/// omission cost varies with the attacker, the delay cost with the victim.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EthCostRanges {
    pub omission: (f64, f64),
    pub delay: (f64, f64),
}

pub fn eth_cost_ranges(params: &EthereumParams, grid: &[f64]) -> Result<EthCostRanges> {
    if grid.is_empty() {
        return Err(invalid("cost ranges need a non-empty grid"));
    }
    for &x in grid {
        check_grid_power("grid", x)?;
    }
    let om: Vec<f64> = grid
        .iter()
        .map(|&x| eth_omission_cost(params, x))
        .collect::<Result<_>>()?;
    let dl: Vec<f64> = grid
        .iter()
        .map(|&x| eth_delay_cost(params, x))
        .collect::<Result<_>>()?;
    Ok(EthCostRanges {
        omission: (fold_min(&om), fold_max(&om)),
        delay: (fold_min(&dl), fold_max(&dl)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_grid_endpoints() {
        let g = default_attacker_grid();
        assert_eq!(g.len(), 65);
        assert!((g[0] - 0.01).abs() < 1e-15);
        assert!((g[64] - 0.33).abs() < 1e-12);
        let s = search_grid();
        assert_eq!(s.len(), 333);
        assert!((s[332] - 0.333).abs() < 1e-12);
        // A stop sitting exactly on a grid point is included.
        let one = power_grid(1.0 / 3.0, 1.0 / 3.0, 1.0).unwrap();
        assert_eq!(one.len(), 1);
        assert!(power_grid(0.0, 0.3, 0.1).is_err());
        assert!(power_grid(0.1, 0.05, 0.01).is_err());
        assert!(power_grid(0.1, 0.4, 0.01).is_err());
        assert!(power_grid(0.1, 0.3, -0.1).is_err());
    }

    #[test]
    fn sweep_covers_the_grid_exactly_once() {
        let spec = RewardSpec::Cosmos(CosmosParams::default());
        let kinds = [AttackKind::Omission, AttackKind::Delay];
        let attackers = [0.05, 0.15, 0.25];
        let victims = [0.1, 0.2];
        let table = sweep(&spec, &kinds, &attackers, &victims).unwrap();
        assert_eq!(table.len(), 2 * 2 * 3);
        // Nesting order: kind, then victim, then attacker.
        assert_eq!(table.rows[0].attack, "omission");
        assert_eq!(table.rows[0].victim_power, 0.1);
        assert_eq!(table.rows[0].attacker_power, 0.05);
        assert_eq!(table.rows[1].attacker_power, 0.15);
        assert_eq!(table.rows[3].victim_power, 0.2);
        assert_eq!(table.rows[6].attack, "delay");
        let mut seen = std::collections::HashSet::new();
        for row in &table.rows {
            let key = (
                row.attack.clone(),
                row.victim_power.to_bits(),
                row.attacker_power.to_bits(),
            );
            assert!(seen.insert(key), "duplicate row");
        }
    }

    #[test]
    fn sweep_rows_match_closed_forms() {
        let params = CosmosParams::default();
        let spec = RewardSpec::Cosmos(params);
        let table =
            sweep(&spec, &[AttackKind::Omission], &[0.2], &[0.1]).unwrap();
        let row = &table.rows[0];
        assert_eq!(
            row.effectiveness,
            cosmos_omission_effectiveness(&params, 0.1).unwrap()
        );
        assert_eq!(row.cost.unwrap(), cosmos_omission_cost(&params, 0.2, 0.1).unwrap());

        let eth = EthereumParams::default();
        let spec = RewardSpec::Ethereum(eth);
        let table = sweep(&spec, &[AttackKind::Delay], &[0.2], &[0.05]).unwrap();
        let row = &table.rows[0];
        assert_eq!(row.effectiveness, eth_delay_effectiveness(&eth, 0.05).unwrap());
        assert_eq!(row.cost.unwrap(), eth_delay_cost(&eth, 0.05).unwrap());
    }

    #[test]
    fn sweep_evaluates_mechanisms_through_the_game() {
        use crate::mechanisms::SimpleParams;
        let spec = RewardSpec::Simple(SimpleParams::default());
        let table = sweep(
            &spec,
            &[AttackKind::Omission],
            &[0.1, 0.2],
            &[0.15],
        )
        .unwrap();
        for row in &table.rows {
            // Simple rule with bonus 1: effectiveness 1/(1+b), cost b.
            assert!((row.effectiveness - 0.5).abs() < 1e-12);
            assert!((row.cost.unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_rejects_bad_requests() {
        let spec = RewardSpec::Cosmos(CosmosParams::default());
        assert!(sweep(&spec, &[], &[0.1], &[0.1]).is_err());
        assert!(sweep(&spec, &[AttackKind::Combined], &[0.1], &[0.1]).is_err());
        assert!(sweep(&spec, &[AttackKind::Omission], &[0.5], &[0.1]).is_err());
        assert!(sweep(&spec, &[AttackKind::Omission], &[0.1], &[]).is_err());
    }

    #[test]
    fn aggregator_sweep_reference_gaps() {
        let params = EthereumParams::default();
        let full = 1.0 - params.late_fraction;
        let top = power_grid(1.0 / 3.0, 1.0 / 3.0, 1.0).unwrap();
        let table = aggregator_sweep(&params, &[8.0, 16.0], &top).unwrap();
        assert_eq!(table.len(), 2);
        assert_eq!(table.rows[0].attack, "omission-k8");
        assert_eq!(table.rows[1].attack, "omission-k16");
        for row in &table.rows {
            assert_eq!(row.victim_power, 0.0);
            assert_eq!(row.cost, None);
        }
        let gap8 = full - table.rows[0].effectiveness;
        let gap16 = full - table.rows[1].effectiveness;
        assert!((gap8 - 0.014892256921364422).abs() < 1e-15, "gap8 {gap8}");
        assert!((gap16 - 0.000969029502604893).abs() < 1e-15, "gap16 {gap16}");
    }

    #[test]
    fn fewer_aggregators_always_weaken_the_attack() {
        let params = EthereumParams::default();
        let grid = default_attacker_grid();
        let table = aggregator_sweep(&params, &[8.0, 16.0], &grid).unwrap();
        let (k8, k16) = table.rows.split_at(grid.len());
        for (a, b) in k8.iter().zip(k16) {
            assert!(a.effectiveness < b.effectiveness);
        }
    }

    #[test]
    fn nash_search_matches_the_analytic_root() {
        let r = find_min_bonus_nash_cosmos(2.0 / 3.0, 0.9, DEFAULT_TOLERANCE).unwrap();
        assert!(r.feasible);
        let b = r.b_star.unwrap();
        assert!((b - 0.14267352185089976).abs() < 2e-4, "b* = {b}");
        // The smallest omission cost pits the largest attacker against the
        // smallest victim.
        let (a, v) = r.worst_case_pair.unwrap();
        assert!((a - 0.333).abs() < 1e-12);
        assert!((v - 0.001).abs() < 1e-12);
        // Minimal: the criterion holds at b* and fails just below it.
        assert!(nash_criterion_holds(2.0 / 3.0, 0.9, b).unwrap());
        assert!(!nash_criterion_holds(2.0 / 3.0, 0.9, b - 10.0 * DEFAULT_TOLERANCE).unwrap());
    }

    #[test]
    fn nash_search_ignores_the_base_fraction() {
        let lo = find_min_bonus_nash_cosmos(2.0 / 3.0, 0.3, DEFAULT_TOLERANCE).unwrap();
        let hi = find_min_bonus_nash_cosmos(2.0 / 3.0, 0.9, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(lo.b_star, hi.b_star);
    }

    #[test]
    fn nash_search_follows_the_threshold() {
        // A higher quorum threshold shrinks the victim-side loss slope, so
        // a smaller bonus already suffices.
        let low_t = find_min_bonus_nash_cosmos(2.0 / 3.0, 0.9, DEFAULT_TOLERANCE).unwrap();
        let high_t = find_min_bonus_nash_cosmos(0.9, 0.9, DEFAULT_TOLERANCE).unwrap();
        assert!(high_t.b_star.unwrap() < low_t.b_star.unwrap());
    }

    #[test]
    fn coarse_and_fine_tolerances_agree() {
        let fine = find_min_bonus_nash_cosmos(2.0 / 3.0, 0.9, 1e-4).unwrap();
        let coarse = find_min_bonus_nash_cosmos(2.0 / 3.0, 0.9, 1e-2).unwrap();
        assert!((fine.b_star.unwrap() - coarse.b_star.unwrap()).abs() <= 1e-2);
        assert!(find_min_bonus_nash_cosmos(2.0 / 3.0, 0.9, 0.0).is_err());
    }

    #[test]
    fn balanced_search_reference_points() {
        let r = find_min_bonus_balanced_eth(0.781, 0.2, DEFAULT_TOLERANCE).unwrap();
        assert!(r.feasible);
        let b = r.b_star.unwrap();
        assert!((b - 0.182281).abs() < 2e-4, "b* = {b}");
        // The tight constraint is the delay against the smallest victim.
        let (a, v) = r.worst_case_pair.unwrap();
        assert_eq!(a, 0.0);
        assert!((v - 0.001).abs() < 1e-12);
        assert!(balanced_criterion_holds(0.781, b, 0.2).unwrap());
        assert!(!balanced_criterion_holds(0.781, b - 10.0 * DEFAULT_TOLERANCE, 0.2).unwrap());

        let narrow = find_min_bonus_balanced_eth(0.781, 0.1, DEFAULT_TOLERANCE).unwrap();
        assert!(!narrow.feasible);
        assert_eq!(narrow.b_star, None);
        assert_eq!(narrow.worst_case_pair, None);

        let wide = find_min_bonus_balanced_eth(0.781, 1.0, DEFAULT_TOLERANCE).unwrap();
        let b = wide.b_star.unwrap();
        assert!((b - 0.109281).abs() < 2e-4, "b* = {b}");
    }

    #[test]
    fn critical_epsilon_reference_and_rho_independence() {
        let eps = critical_epsilon_eth(0.781).unwrap();
        assert!((eps - 0.1800).abs() < 1.5e-3, "eps = {eps}");
        let other = critical_epsilon_eth(0.5).unwrap();
        assert!((eps - other).abs() < 2e-3, "{eps} vs {other}");
    }

    #[test]
    fn cosmos_cost_extremes_reference() {
        let params = CosmosParams::new(2.0 / 3.0, 0.9, 0.21, 1.0).unwrap();
        let e = cosmos_cost_extremes(&params, &search_grid()).unwrap();
        assert!((e.min_omission_cost - 0.19926957315681343).abs() < 1e-9);
        assert!((e.min_delay_cost - 0.5045340290814218).abs() < 1e-9);
        assert!((e.max_delay_cost - 5.0183276059564745).abs() < 1e-9);
    }

    #[test]
    fn eth_cost_ranges_reference() {
        let small = EthereumParams::small_bonus();
        let r = eth_cost_ranges(&small, &search_grid()).unwrap();
        assert!((r.omission.0 - 0.22931050228310507).abs() < 1e-9);
        assert!((r.omission.1 - 0.5613105022831051).abs() < 1e-9);
        assert!((r.delay.0 - 1.7815451446793624).abs() < 1e-9);
        assert!((r.delay.1 - 4.360899261235787).abs() < 1e-9);

        let default = EthereumParams::default();
        let r = eth_cost_ranges(&default, &search_grid()).unwrap();
        assert!((r.omission.0 - 0.5717762557077626).abs() < 1e-9);
        assert!((r.omission.1 - 0.9037762557077627).abs() < 1e-9);
        assert!((r.delay.0 - 1.1064685464843098).abs() < 1e-9);
        assert!((r.delay.1 - 1.7489358643656312).abs() < 1e-9);
    }
}
