//! Initial-solution construction and the annealing improvement loop.
//!
//! Construction orders targets by an urgency score (normalized profit plus
//! cloud risk) and tries each target's orbits in ascending resource-conflict
//! order through the fast insertion operator. The annealing stage then
//! repeatedly destroys a random fraction of the assigned targets, repairs by
//! random re-insertion, and accepts candidates by the Metropolis criterion
//! against the confidence-quantile profit, with an adaptive non-improvement
//! counter, geometric cooling and a growing inner-chain length.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::insertion;
use crate::model::{InstanceIndex, OrbitId, Schedule, Target, TargetId, VisibleWindow};
use crate::num;
use crate::start_time::StartTimeParams;
use crate::uncertainty::{confidence_profit, CcpParams, ScenarioMatrix, UncertaintyError};

/// All solver parameters, with the experiment defaults baked in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Fraction of assigned targets destroyed per iteration.
    pub destroy_fraction: f64,
    pub initial_temperature: f64,
    /// Multiplies the temperature after every inner chain, in (0, 1).
    pub cooling_rate: f64,
    /// Multiplies the inner-chain length after every chain, above 1.
    pub chain_growth: f64,
    /// Relative profit gain that counts as a real improvement and resets the
    /// failure counter.
    pub improvement_threshold: f64,
    /// Outer loop runs until both this failure budget and `max_iterations`
    /// are exhausted.
    pub max_failures: u32,
    /// Inner chain runs until both this failure budget and the chain length
    /// are exhausted.
    pub max_inner_failures: u32,
    pub max_iterations: u32,
    pub ccp: CcpParams,
    pub start_time: StartTimeParams,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            destroy_fraction: 0.10,
            initial_temperature: 1000.0,
            cooling_rate: 0.95,
            chain_growth: 1.05,
            improvement_threshold: 0.05,
            max_failures: 100,
            max_inner_failures: 50,
            max_iterations: 2000,
            ccp: CcpParams::default(),
            start_time: StartTimeParams::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConfigError {
    OutOfRange(&'static str),
    Ccp(UncertaintyError),
}

impl core::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ConfigError::OutOfRange(what) => write!(f, "config field out of range: {what}"),
            ConfigError::Ccp(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ConfigError {}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.destroy_fraction > 0.0 && self.destroy_fraction < 1.0) {
            return Err(ConfigError::OutOfRange(
                "destroy_fraction must be in (0, 1)",
            ));
        }
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return Err(ConfigError::OutOfRange("cooling_rate must be in (0, 1)"));
        }
        if !(self.chain_growth > 1.0) {
            return Err(ConfigError::OutOfRange("chain_growth must exceed 1"));
        }
        if !(self.initial_temperature > 0.0) {
            return Err(ConfigError::OutOfRange(
                "initial_temperature must be positive",
            ));
        }
        if self.max_failures == 0 || self.max_inner_failures == 0 || self.max_iterations == 0 {
            return Err(ConfigError::OutOfRange(
                "iteration budgets must be positive",
            ));
        }
        if !(self.start_time.scan_resolution > 0.0 && self.start_time.scan_resolution <= 0.5) {
            return Err(ConfigError::OutOfRange(
                "scan_resolution must be in (0, 0.5]",
            ));
        }
        if !(self.start_time.refine_tolerance > 0.0) {
            return Err(ConfigError::OutOfRange("refine_tolerance must be positive"));
        }
        self.ccp.validate().map_err(ConfigError::Ccp)
    }
}

/// A pooled target with its selection scores: urgency, and per-orbit
/// resource conflict at full capacity (ascending = preferred).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub target_id: TargetId,
    pub urgency: f64,
    /// (orbit, conflict) sorted by ascending conflict; unschedulable orbits
    /// are omitted.
    pub conflict_by_orbit: Vec<(OrbitId, f64)>,
}

/// Urgency of a target: normalized profit plus the cloud risk averaged over
/// its available windows. `None` when the target has no available window
/// (it cannot enter the pool).
pub fn target_urgency(target: &Target, index: &InstanceIndex) -> Option<f64> {
    let mut n = 0usize;
    let mut prob_sum = 0.0;
    for w in index.windows_of_target(target.id) {
        if w.available {
            n += 1;
            prob_sum += w.success_prob;
        }
    }
    if n == 0 {
        return None;
    }
    let max_profit = index
        .instance()
        .targets
        .iter()
        .map(|t| t.profit)
        .fold(f64::NEG_INFINITY, f64::max);
    Some(target.profit / max_profit + (1.0 - prob_sum / n as f64))
}

/// Summed pairwise overlap of `window` with other targets' available
/// windows on the same orbit, as a fraction of its own length.
fn overlap_ratio(window: &VisibleWindow, index: &InstanceIndex) -> f64 {
    let mut overlap = 0.0;
    for other in index.windows_of_orbit(window.orbit_id) {
        if other.target_id == window.target_id || !other.available {
            continue;
        }
        let lo = f64::max(window.start_s, other.start_s);
        let hi = f64::min(window.end_s, other.end_s);
        if hi > lo {
            overlap += hi - lo;
        }
    }
    overlap / window.length_s()
}

fn conflict_value(
    window: &VisibleWindow,
    obs_duration_s: f64,
    overlap: f64,
    orbit_memory_rate: f64,
    orbit_energy_rate: f64,
    remaining_memory_mb: f64,
    remaining_energy_j: f64,
) -> Option<f64> {
    let cost_memory = obs_duration_s * orbit_memory_rate;
    let cost_energy = obs_duration_s * orbit_energy_rate;
    if cost_memory > remaining_memory_mb || cost_energy > remaining_energy_j {
        return None;
    }
    let mut share = overlap;
    if cost_memory > 0.0 {
        share += cost_memory / remaining_memory_mb;
    }
    if cost_energy > 0.0 {
        share += cost_energy / remaining_energy_j;
    }
    Some((1.0 - window.success_prob) * share)
}

/// Degree of resource conflict of one window against the remaining orbit
/// capacity. `None` marks the window unschedulable on that orbit (its
/// imaging cost alone exceeds a remaining capacity).
pub fn window_conflict(
    window: &VisibleWindow,
    index: &InstanceIndex,
    remaining_memory_mb: f64,
    remaining_energy_j: f64,
) -> Option<f64> {
    let target = index.target(window.target_id).ok()?;
    let orbit = index.orbit(window.orbit_id).ok()?;
    conflict_value(
        window,
        target.obs_duration_s,
        overlap_ratio(window, index),
        orbit.memory_rate_mb_per_s,
        orbit.imaging_energy_j_per_s,
        remaining_memory_mb,
        remaining_energy_j,
    )
}

/// Cached static pieces of the conflict score, shared by construction and
/// repair so per-attempt evaluation is O(1).
struct SelectionModel {
    /// Overlap ratio per (target, orbit).
    overlap: BTreeMap<(TargetId, OrbitId), f64>,
}

impl SelectionModel {
    fn new(index: &InstanceIndex) -> Self {
        let mut overlap = BTreeMap::new();
        for w in &index.instance().windows {
            if w.available {
                overlap.insert((w.target_id, w.orbit_id), overlap_ratio(w, index));
            }
        }
        Self { overlap }
    }

    /// Orbits for `target`, cheapest conflict first, against the schedule's
    /// current remaining capacities.
    fn orbit_order(
        &self,
        index: &InstanceIndex,
        schedule: &Schedule,
        target_id: TargetId,
    ) -> Vec<(OrbitId, f64)> {
        let target = match index.target(target_id) {
            Ok(t) => t,
            Err(_) => return Vec::new(),
        };
        let mut order: Vec<(OrbitId, f64)> = Vec::new();
        for w in index.windows_of_target(target_id) {
            if !w.available {
                continue;
            }
            let orbit = match index.orbit(w.orbit_id) {
                Ok(o) => o,
                Err(_) => continue,
            };
            let remaining_memory = orbit.memory_capacity_mb - schedule.memory_used(orbit.id);
            let remaining_energy = orbit.energy_capacity_j - schedule.energy_used(orbit.id);
            let overlap = self.overlap[&(target_id, w.orbit_id)];
            if let Some(cf) = conflict_value(
                w,
                target.obs_duration_s,
                overlap,
                orbit.memory_rate_mb_per_s,
                orbit.imaging_energy_j_per_s,
                remaining_memory,
                remaining_energy,
            ) {
                order.push((w.orbit_id, cf));
            }
        }
        order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        order
    }
}

/// Mission pool: targets with at least one available window, sorted by
/// urgency descending (ties: higher profit, then lower id), each with its
/// full-capacity conflict scores.
pub fn build_pool(index: &InstanceIndex) -> Vec<PoolEntry> {
    let empty = Schedule::new();
    let model = SelectionModel::new(index);
    let mut pool: Vec<PoolEntry> = index
        .instance()
        .targets
        .iter()
        .filter_map(|t| {
            target_urgency(t, index).map(|urgency| PoolEntry {
                target_id: t.id,
                urgency,
                conflict_by_orbit: model.orbit_order(index, &empty, t.id),
            })
        })
        .collect();
    let profit_of: BTreeMap<TargetId, f64> = index
        .instance()
        .targets
        .iter()
        .map(|t| (t.id, t.profit))
        .collect();
    pool.sort_by(|a, b| {
        b.urgency
            .total_cmp(&a.urgency)
            .then(profit_of[&b.target_id].total_cmp(&profit_of[&a.target_id]))
            .then(a.target_id.cmp(&b.target_id))
    });
    pool
}

/// Greedy construction: walk the pool in urgency order, inserting each
/// target on its cheapest-conflict orbit that accepts it. Conflict scores
/// are evaluated against the live remaining capacities, so every placement
/// refreshes the ordering for the targets still waiting.
pub fn construct_initial(index: &InstanceIndex, config: &SolverConfig) -> Schedule {
    let pool = build_pool(index);
    let model = SelectionModel::new(index);
    let mut schedule = Schedule::new();
    for entry in &pool {
        for (orbit_id, _) in model.orbit_order(index, &schedule, entry.target_id) {
            let outcome = insertion::try_insert(
                &mut schedule,
                index,
                entry.target_id,
                orbit_id,
                &config.start_time,
            )
            .expect("pool entries reference valid instance records");
            if outcome.success {
                break;
            }
        }
    }
    schedule
}

/// The construction stage alone, evaluated under the sampled scenarios.
pub fn run_greedy(
    index: &InstanceIndex,
    scenarios: &ScenarioMatrix,
    config: &SolverConfig,
) -> (Schedule, f64) {
    let schedule = construct_initial(index, config);
    let profit = profit_of(index, &schedule, scenarios, config);
    (schedule, profit)
}

fn profit_of(
    index: &InstanceIndex,
    schedule: &Schedule,
    scenarios: &ScenarioMatrix,
    config: &SolverConfig,
) -> f64 {
    if scenarios.sample_size == 0 {
        return 0.0;
    }
    confidence_profit(index.instance(), schedule, scenarios, config.ccp.epsilon)
}

/// Metropolis acceptance probability for a profit change at a temperature.
pub fn metropolis_probability(delta_profit: f64, temperature: f64) -> f64 {
    if delta_profit >= 0.0 {
        1.0
    } else {
        num::exp(delta_profit / temperature)
    }
}

/// Relative improvement of `f_new` over `f_old`; any gain from an empty
/// incumbent counts as infinite.
fn improvement_ratio(f_old: f64, f_new: f64) -> f64 {
    if f_old == 0.0 {
        if f_new > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        (f_new - f_old) / f_old
    }
}

/// Failure-counter update after an accepted move: a real improvement wipes
/// the count, anything else is one more failure.
fn accepted_failure_count(failures: u32, ratio: f64, threshold: f64) -> u32 {
    if ratio >= threshold {
        0
    } else {
        failures + 1
    }
}

/// One row of the annealing trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Global 1-based iteration counter.
    pub iteration: u32,
    /// Outer-loop (chain) counter, 1-based.
    pub outer: u32,
    pub temperature: f64,
    /// Incumbent profit after this iteration's accept/reject.
    pub profit: f64,
    pub best_profit: f64,
    pub accepted: bool,
    /// Assigned-target count of the incumbent.
    pub assigned: u32,
}

/// Result of a full annealing run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealOutcome {
    pub best_schedule: Schedule,
    pub best_profit: f64,
    pub initial_schedule: Schedule,
    pub initial_profit: f64,
    pub trace: Vec<TraceRecord>,
}

fn destroy(schedule: &mut Schedule, index: &InstanceIndex, count: usize, rng: &mut ChaCha8Rng) {
    let assigned: Vec<TargetId> = schedule.iter_assignments().map(|a| a.target_id).collect();
    if assigned.is_empty() || count == 0 {
        return;
    }
    let count = count.min(assigned.len());
    for i in rand::seq::index::sample(rng, assigned.len(), count) {
        insertion::remove(schedule, index, assigned[i])
            .expect("assigned targets can always be removed");
    }
}

fn repair(
    schedule: &mut Schedule,
    index: &InstanceIndex,
    pool: &[PoolEntry],
    model: &SelectionModel,
    params: &StartTimeParams,
    rng: &mut ChaCha8Rng,
) {
    let mut unassigned: Vec<TargetId> = pool
        .iter()
        .map(|e| e.target_id)
        .filter(|&t| !schedule.contains_target(t))
        .collect();
    while !unassigned.is_empty() {
        unassigned.shuffle(rng);
        let mut leftover = Vec::with_capacity(unassigned.len());
        for &t in &unassigned {
            let mut placed = false;
            for (orbit_id, _) in model.orbit_order(index, schedule, t) {
                let outcome = insertion::try_insert(schedule, index, t, orbit_id, params)
                    .expect("pool entries reference valid instance records");
                if outcome.success {
                    placed = true;
                    break;
                }
            }
            if !placed {
                leftover.push(t);
            }
        }
        if leftover.len() == unassigned.len() {
            break; // a full pass placed nothing
        }
        unassigned = leftover;
    }
}

/// The annealing solver.
///
/// Starts from [`construct_initial`], then runs destroy/repair chains with
/// Metropolis acceptance on the confidence-quantile profit. The outer loop
/// ends only once both the accumulated failure count and the iteration
/// count have exhausted their budgets. Each inner chain ends when either
/// its failure budget or its chain length runs out: the failure cap is a
/// hard upper limit on the chain, otherwise the reset rule would keep a
/// hot chain alive indefinitely.
pub fn run_annealing(
    index: &InstanceIndex,
    scenarios: &ScenarioMatrix,
    config: &SolverConfig,
) -> AnnealOutcome {
    let pool = build_pool(index);
    let model = SelectionModel::new(index);
    let visible_targets = pool.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let initial_schedule = construct_initial(index, config);
    let initial_profit = profit_of(index, &initial_schedule, scenarios, config);

    if pool.is_empty() {
        // nothing to destroy or repair; the construction is the answer
        return AnnealOutcome {
            best_schedule: initial_schedule.clone(),
            best_profit: initial_profit,
            initial_schedule,
            initial_profit,
            trace: Vec::new(),
        };
    }

    let mut incumbent = initial_schedule.clone();
    let mut incumbent_profit = initial_profit;
    let mut assigned = incumbent.assignment_count();
    let mut best_schedule = initial_schedule.clone();
    let mut best_profit = initial_profit;

    let mut temperature = config.initial_temperature;
    let mut chain_len = visible_targets as f64 / 2.0;
    let mut failures = 0u32;
    let mut iterations = 0u32;
    let mut trace = Vec::new();
    let mut outer = 0u32;

    while failures < config.max_failures || iterations < config.max_iterations {
        outer += 1;
        let mut inner_failures = 0u32;
        let mut inner_iterations = 0u32;
        while inner_failures < config.max_inner_failures && (inner_iterations as f64) < chain_len {
            let mut candidate = incumbent.clone();
            let remove_count = num::ceil(config.destroy_fraction * assigned as f64) as usize;
            destroy(&mut candidate, index, remove_count.max(1), &mut rng);
            repair(
                &mut candidate,
                index,
                &pool,
                &model,
                &config.start_time,
                &mut rng,
            );
            let candidate_profit = profit_of(index, &candidate, scenarios, config);

            #[cfg(debug_assertions)]
            if trace.len() % 10 == 0 {
                let report = crate::validate::validate_schedule(index.instance(), &candidate)
                    .expect("candidate references only instance records");
                debug_assert!(
                    report.is_empty(),
                    "destroy/repair broke feasibility: {report}"
                );
            }

            let delta = candidate_profit - incumbent_profit;
            let acceptance = metropolis_probability(delta, temperature);
            let accepted = rng.gen::<f64>() < acceptance;
            if accepted {
                let ratio = improvement_ratio(incumbent_profit, candidate_profit);
                incumbent = candidate;
                incumbent_profit = candidate_profit;
                assigned = incumbent.assignment_count();
                inner_failures =
                    accepted_failure_count(inner_failures, ratio, config.improvement_threshold);
                if incumbent_profit > best_profit {
                    best_profit = incumbent_profit;
                    best_schedule = incumbent.clone();
                }
            } else {
                inner_failures += 1;
            }
            inner_iterations += 1;
            trace.push(TraceRecord {
                iteration: trace.len() as u32 + 1,
                outer,
                temperature,
                profit: incumbent_profit,
                best_profit,
                accepted,
                assigned: assigned as u32,
            });
        }
        failures += inner_failures;
        iterations += inner_iterations;
        temperature *= config.cooling_rate;
        chain_len *= config.chain_growth;
    }

    AnnealOutcome {
        best_schedule,
        best_profit,
        initial_schedule,
        initial_profit,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Instance, OrbitResource};
    use crate::uncertainty::sample_scenarios;
    use crate::validate::validate_schedule;

    fn orbit(id: OrbitId, memory: f64, energy: f64) -> OrbitResource {
        OrbitResource {
            id,
            memory_capacity_mb: memory,
            energy_capacity_j: energy,
            memory_rate_mb_per_s: 100.0,
            imaging_energy_j_per_s: 500.0,
            maneuver_energy_j_per_deg: 1000.0,
            pitch_rate_deg_per_s: 3.0,
            roll_rate_deg_per_s: 3.0,
            max_pitch_deg: 30.0,
            max_roll_deg: 30.0,
        }
    }

    fn target(id: TargetId, profit: f64) -> Target {
        Target {
            id,
            latitude_deg: 0.0,
            longitude_deg: 0.0,
            profit,
            obs_duration_s: 20.0,
        }
    }

    fn window(t: TargetId, k: OrbitId, start: f64, end: f64, p: f64) -> VisibleWindow {
        VisibleWindow {
            target_id: t,
            orbit_id: k,
            start_s: start,
            end_s: end,
            success_prob: p,
            roll_angle_deg: 0.0,
            available: true,
        }
    }

    #[test]
    fn urgency_hand_values() {
        let inst = Instance {
            targets: vec![target(1, 10.0), target(2, 5.0)],
            orbits: vec![orbit(1, 1e6, 1e9), orbit(2, 1e6, 1e9)],
            windows: vec![
                window(1, 1, 0.0, 100.0, 0.5),
                window(1, 2, 200.0, 300.0, 0.5),
                window(2, 1, 400.0, 500.0, 0.2),
            ],
            horizon_s: 600.0,
            rng_seed: 0,
        };
        let index = InstanceIndex::new(&inst).unwrap();
        // profit 10 of max 10, two windows at p = 0.5 -> 1 + 0.5
        let u1 = target_urgency(&inst.targets[0], &index).unwrap();
        assert!((u1 - 1.5).abs() < 1e-12);
        // profit 5 of max 10, one window at p = 0.2 -> 0.5 + 0.8
        let u2 = target_urgency(&inst.targets[1], &index).unwrap();
        assert!((u2 - 1.3).abs() < 1e-12);
    }

    #[test]
    fn urgency_reduces_to_profit_share_when_skies_are_clear() {
        let inst = Instance {
            targets: vec![target(1, 4.0), target(2, 8.0)],
            orbits: vec![orbit(1, 1e6, 1e9)],
            windows: vec![
                window(1, 1, 0.0, 100.0, 1.0),
                window(2, 1, 200.0, 300.0, 1.0),
            ],
            horizon_s: 600.0,
            rng_seed: 0,
        };
        let index = InstanceIndex::new(&inst).unwrap();
        assert_eq!(target_urgency(&inst.targets[0], &index).unwrap(), 0.5);
        assert_eq!(target_urgency(&inst.targets[1], &index).unwrap(), 1.0);
    }

    #[test]
    fn conflict_hand_value() {
        // overlap 40 of a 100 s window, memory 2000/5000, energy 10000/100000
        let inst = Instance {
            targets: vec![target(1, 5.0), target(2, 5.0)],
            orbits: vec![orbit(1, 5000.0, 100_000.0)],
            windows: vec![
                window(1, 1, 0.0, 100.0, 0.5),
                window(2, 1, 60.0, 160.0, 0.9),
            ],
            horizon_s: 600.0,
            rng_seed: 0,
        };
        let index = InstanceIndex::new(&inst).unwrap();
        let w = index.window(1, 1).unwrap();
        let cf = window_conflict(w, &index, 5000.0, 100_000.0).unwrap();
        let expected = 0.5 * (0.4 + 2000.0 / 5000.0 + 10_000.0 / 100_000.0);
        assert!((cf - expected).abs() < 1e-12, "cf {cf} expected {expected}");
    }

    #[test]
    fn conflict_is_zero_for_certain_success() {
        let inst = Instance {
            targets: vec![target(1, 5.0)],
            orbits: vec![orbit(1, 5000.0, 100_000.0)],
            windows: vec![window(1, 1, 0.0, 100.0, 1.0)],
            horizon_s: 600.0,
            rng_seed: 0,
        };
        let index = InstanceIndex::new(&inst).unwrap();
        let w = index.window(1, 1).unwrap();
        assert_eq!(window_conflict(w, &index, 5000.0, 100_000.0), Some(0.0));
    }

    #[test]
    fn conflict_marks_unschedulable_windows() {
        let inst = Instance {
            targets: vec![target(1, 5.0)],
            orbits: vec![orbit(1, 5000.0, 100_000.0)],
            windows: vec![window(1, 1, 0.0, 100.0, 0.5)],
            horizon_s: 600.0,
            rng_seed: 0,
        };
        let index = InstanceIndex::new(&inst).unwrap();
        let w = index.window(1, 1).unwrap();
        // imaging memory cost 2000 MB exceeds 1000 MB remaining
        assert_eq!(window_conflict(w, &index, 1000.0, 100_000.0), None);
        assert_eq!(window_conflict(w, &index, 0.0, 100_000.0), None);
    }

    #[test]
    fn construction_places_a_single_target() {
        let inst = Instance {
            targets: vec![target(1, 5.0)],
            orbits: vec![orbit(1, 7500.0, 80_000.0)],
            windows: vec![window(1, 1, 0.0, 100.0, 0.9)],
            horizon_s: 600.0,
            rng_seed: 0,
        };
        let index = InstanceIndex::new(&inst).unwrap();
        let s = construct_initial(&index, &SolverConfig::default());
        assert_eq!(s.assignment_count(), 1);
        assert!(validate_schedule(&inst, &s).unwrap().is_empty());
    }

    #[test]
    fn construction_prefers_the_more_urgent_target() {
        // memory for exactly one 20 s observation; both targets want it
        let inst = Instance {
            targets: vec![target(1, 10.0), target(2, 3.0)],
            orbits: vec![orbit(1, 2000.0, 1e9)],
            windows: vec![
                window(1, 1, 0.0, 100.0, 0.8),
                window(2, 1, 10.0, 110.0, 0.8),
            ],
            horizon_s: 600.0,
            rng_seed: 0,
        };
        let index = InstanceIndex::new(&inst).unwrap();
        let pool = build_pool(&index);
        assert_eq!(pool[0].target_id, 1);
        let s = construct_initial(&index, &SolverConfig::default());
        assert_eq!(s.assignment_count(), 1);
        assert!(s.contains_target(1));
        assert!(!s.contains_target(2));
    }

    #[test]
    fn construction_is_deterministic() {
        let inst = Instance {
            targets: (1..=12).map(|i| target(i, (i % 7 + 1) as f64)).collect(),
            orbits: vec![orbit(1, 7500.0, 80_000.0), orbit(2, 7500.0, 80_000.0)],
            windows: (1..=12)
                .flat_map(|i| {
                    let s = (i as f64) * 37.0;
                    [
                        window(i, 1, s, s + 90.0, 0.6),
                        window(i, 2, s + 400.0, s + 520.0, 0.8),
                    ]
                })
                .collect(),
            horizon_s: 2000.0,
            rng_seed: 0,
        };
        let index = InstanceIndex::new(&inst).unwrap();
        let cfg = SolverConfig::default();
        assert_eq!(
            construct_initial(&index, &cfg),
            construct_initial(&index, &cfg)
        );
    }

    #[test]
    fn metropolis_matches_hand_values() {
        assert_eq!(metropolis_probability(0.0, 100.0), 1.0);
        assert_eq!(metropolis_probability(5.0, 100.0), 1.0);
        let p = metropolis_probability(-100.0, 100.0);
        assert!((p - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn improvement_counter_resets_only_on_real_gains() {
        assert_eq!(improvement_ratio(100.0, 106.0), 0.06);
        assert!(improvement_ratio(100.0, 104.0) < 0.05);
        assert_eq!(improvement_ratio(0.0, 3.0), f64::INFINITY);
        assert_eq!(improvement_ratio(0.0, 0.0), 0.0);

        // a streak of threshold-clearing gains pins the counter at zero
        let mut failures = 7;
        for ratio in [0.05, 0.3, f64::INFINITY] {
            failures = accepted_failure_count(failures, ratio, 0.05);
            assert_eq!(failures, 0);
        }
        // small gains and accepted losses both count as failures
        assert_eq!(accepted_failure_count(0, 0.049, 0.05), 1);
        assert_eq!(accepted_failure_count(3, -0.2, 0.05), 4);
    }

    fn desk_instance(seed: u64) -> Instance {
        use crate::instance_gen::{self, GenMode, GenSpec, SyntheticParams};
        let spec = GenSpec {
            n_world: 16,
            regions: vec![],
            horizon_s: 4000.0,
            epoch: instance_gen::Epoch::default(),
            profit_range: (1, 10),
            obs_duration_range_s: (15.0, 30.0),
            prob_range: (0.3, 1.0),
            step_s: 1.0,
            mode: GenMode::Synthetic(SyntheticParams {
                window_probability: 0.9,
                window_length_range_s: (120.0, 400.0),
            }),
            orbits: instance_gen::synthetic_orbits(2, 7500.0, 80_000.0),
        };
        instance_gen::generate(&spec, seed).unwrap()
    }

    fn desk_config(seed: u64) -> SolverConfig {
        SolverConfig {
            max_iterations: 60,
            max_failures: 30,
            max_inner_failures: 10,
            ccp: CcpParams {
                sample_size_override: Some(80),
                ..CcpParams::default()
            },
            seed,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn annealing_tracks_a_monotone_best_and_stays_feasible() {
        let inst = desk_instance(42);
        let index = InstanceIndex::new(&inst).unwrap();
        let cfg = desk_config(7);
        let scen = sample_scenarios(&inst, 80, 5);
        let out = run_annealing(&index, &scen, &cfg);

        assert!(out.best_profit >= out.initial_profit);
        let mut last_best = f64::NEG_INFINITY;
        for r in &out.trace {
            assert!(r.best_profit >= last_best);
            last_best = r.best_profit;
        }
        assert_eq!(last_best, out.best_profit);
        assert!(validate_schedule(&inst, &out.best_schedule)
            .unwrap()
            .is_empty());
        assert!(validate_schedule(&inst, &out.initial_schedule)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn annealing_is_deterministic_per_seed() {
        let inst = desk_instance(11);
        let index = InstanceIndex::new(&inst).unwrap();
        let scen = sample_scenarios(&inst, 80, 5);
        let a = run_annealing(&index, &scen, &desk_config(3));
        let b = run_annealing(&index, &scen, &desk_config(3));
        assert_eq!(a, b);
        let c = run_annealing(&index, &scen, &desk_config(4));
        assert!(a.trace != c.trace);
    }

    #[test]
    fn cooling_and_chain_growth_follow_the_geometric_schedule() {
        let inst = desk_instance(8);
        let index = InstanceIndex::new(&inst).unwrap();
        let cfg = desk_config(1);
        let scen = sample_scenarios(&inst, 80, 2);
        let out = run_annealing(&index, &scen, &cfg);

        let mut temps: Vec<f64> = Vec::new();
        for r in &out.trace {
            if temps.last() != Some(&r.temperature) {
                temps.push(r.temperature);
            }
        }
        let mut expected = cfg.initial_temperature;
        for (m, t) in temps.iter().enumerate() {
            assert_eq!(*t, expected, "temperature after chain {m}");
            expected *= cfg.cooling_rate;
        }

        // chains never exceed their geometrically growing length cap
        let index = InstanceIndex::new(&inst).unwrap();
        let visible = build_pool(&index).len() as f64;
        let mut chain_len = visible / 2.0;
        let mut per_outer = alloc::collections::BTreeMap::<u32, u32>::new();
        for r in &out.trace {
            *per_outer.entry(r.outer).or_default() += 1;
        }
        for (outer, count) in per_outer {
            let cap = crate::num::ceil(chain_len) as u32;
            assert!(
                count <= cap,
                "chain {outer} ran {count} iterations, cap {cap}"
            );
            chain_len *= cfg.chain_growth;
        }
    }

    #[test]
    fn greedy_equals_construction_and_bounds_annealing_from_below() {
        let inst = desk_instance(21);
        let index = InstanceIndex::new(&inst).unwrap();
        let cfg = desk_config(9);
        let scen = sample_scenarios(&inst, 80, 5);
        let (greedy_schedule, greedy_profit) = run_greedy(&index, &scen, &cfg);
        assert_eq!(greedy_schedule, construct_initial(&index, &cfg));
        let out = run_annealing(&index, &scen, &cfg);
        assert!(out.best_profit >= greedy_profit);
        assert_eq!(out.initial_profit, greedy_profit);
    }

    #[test]
    fn empty_instance_yields_an_empty_schedule() {
        let inst = Instance {
            targets: vec![],
            orbits: vec![orbit(1, 7500.0, 80_000.0)],
            windows: vec![],
            horizon_s: 600.0,
            rng_seed: 0,
        };
        let index = InstanceIndex::new(&inst).unwrap();
        let cfg = desk_config(0);
        let scen = sample_scenarios(&inst, 10, 0);
        let (s, f) = run_greedy(&index, &scen, &cfg);
        assert!(s.is_empty());
        assert_eq!(f, 0.0);
        let out = run_annealing(&index, &scen, &cfg);
        assert!(out.best_schedule.is_empty());
        assert_eq!(out.best_profit, 0.0);
    }
}
