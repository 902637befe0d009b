//! Cloud-outcome scenario sampling and the confidence-quantile profit.
//!
//! The chance-constrained objective ("profit attained with probability at
//! least 1 - alpha") is evaluated by sample approximation: draw a fixed set
//! of Bernoulli cloud scenarios, compute the profit in each, and read off
//! the order statistic that tolerates at most `floor(samples * epsilon)`
//! scenarios below it. The big-M form of the sampled constraints never
//! materializes; the order statistic is equivalent and numerically clean.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Instance, OrbitId, Schedule, TargetId};
use crate::num;

/// Chance-constraint and sampling parameters.
///
/// `alpha` is the complement of the chance-constraint confidence interval,
/// `epsilon` the complement of the solution confidence (the tolerated
/// fraction of violating scenarios), `theta` the complement of the
/// probability that a sample-feasible solution is feasible for the original
/// chance constraint. Requires `0 < epsilon < alpha < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcpParams {
    pub alpha: f64,
    pub epsilon: f64,
    pub theta: f64,
    /// When set, experiments use exactly this many scenarios instead of the
    /// bound from [`required_sample_size`].
    pub sample_size_override: Option<usize>,
}

impl Default for CcpParams {
    fn default() -> Self {
        Self {
            alpha: 0.10,
            epsilon: 0.01,
            theta: 0.01,
            sample_size_override: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum UncertaintyError {
    /// Parameters violate `0 < epsilon < alpha < 1` or `theta` outside (0, 1).
    InvalidParams {
        alpha: f64,
        epsilon: f64,
        theta: f64,
    },
    EmptySample,
}

impl fmt::Display for UncertaintyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UncertaintyError::InvalidParams {
                alpha,
                epsilon,
                theta,
            } => write!(
                f,
                "invalid chance-constraint parameters: need 0 < epsilon < alpha < 1 and \
                 0 < theta < 1, got alpha={alpha}, epsilon={epsilon}, theta={theta}"
            ),
            UncertaintyError::EmptySample => write!(f, "sample size must be at least 1"),
        }
    }
}

impl core::error::Error for UncertaintyError {}

impl CcpParams {
    pub fn validate(&self) -> Result<(), UncertaintyError> {
        let ok = self.epsilon > 0.0
            && self.epsilon < self.alpha
            && self.alpha < 1.0
            && self.theta > 0.0
            && self.theta < 1.0;
        if ok {
            Ok(())
        } else {
            Err(UncertaintyError::InvalidParams {
                alpha: self.alpha,
                epsilon: self.epsilon,
                theta: self.theta,
            })
        }
    }
}

/// Pre-ceiling sample-size lower bound for `n_vars` binary decision
/// variables: `ln(1/theta) / (2 (epsilon-alpha)^2) + n_vars ln 2 / (2 (epsilon-alpha)^2)`.
///
/// The second term comes from a finite feasible set of size `2^n_vars`.
pub fn sample_size_bound(params: &CcpParams, n_vars: usize) -> Result<f64, UncertaintyError> {
    params.validate()?;
    let gap = params.epsilon - params.alpha;
    let denom = 2.0 * gap * gap;
    Ok(num::ln(1.0 / params.theta) / denom + (n_vars as f64) * num::ln(2.0) / denom)
}

/// Number of scenarios to sample: the ceiling of [`sample_size_bound`],
/// unless the override pins it.
pub fn required_sample_size(params: &CcpParams, n_vars: usize) -> Result<usize, UncertaintyError> {
    if let Some(n) = params.sample_size_override {
        if n == 0 {
            return Err(UncertaintyError::EmptySample);
        }
        return Ok(n);
    }
    let bound = sample_size_bound(params, n_vars)?;
    Ok(num::ceil(bound).max(1.0) as usize)
}

/// Sampled binary cloud outcomes for every available window over a fixed
/// number of scenarios.
///
/// Columns are the available (target, orbit) pairs in ascending key order;
/// bits are stored as one contiguous row-major stream, LSB first within each
/// 64-bit word: bit `scenario * columns.len() + column`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMatrix {
    pub sample_size: usize,
    pub columns: Vec<(TargetId, OrbitId)>,
    pub bits: Vec<u64>,
    pub seed: u64,
}

impl ScenarioMatrix {
    /// Outcome of scenario `l` for column `c`: true when the observation
    /// succeeds (no cloud).
    pub fn outcome(&self, scenario: usize, column: usize) -> bool {
        let bit = scenario * self.columns.len() + column;
        (self.bits[bit >> 6] >> (bit & 63)) & 1 == 1
    }

    /// Column index of a (target, orbit) pair.
    pub fn column_of(&self, target_id: TargetId, orbit_id: OrbitId) -> Option<usize> {
        self.columns.binary_search(&(target_id, orbit_id)).ok()
    }

    /// Empirical success frequency of one column.
    pub fn column_mean(&self, column: usize) -> f64 {
        let hits = (0..self.sample_size)
            .filter(|&l| self.outcome(l, column))
            .count();
        hits as f64 / self.sample_size as f64
    }
}

/// Draw `sample_size` independent scenarios: each available window succeeds
/// with its own probability. Deterministic in the seed; draws run scenario
/// by scenario over the sorted columns.
pub fn sample_scenarios(instance: &Instance, sample_size: usize, seed: u64) -> ScenarioMatrix {
    let mut columns: Vec<(TargetId, OrbitId)> = Vec::new();
    let mut probs: BTreeMap<(TargetId, OrbitId), f64> = BTreeMap::new();
    for w in &instance.windows {
        if w.available {
            probs.insert((w.target_id, w.orbit_id), w.success_prob);
        }
    }
    let mut p = Vec::with_capacity(probs.len());
    for (key, prob) in probs {
        columns.push(key);
        p.push(prob);
    }

    let n_bits = sample_size * columns.len();
    let mut bits = vec![0u64; n_bits.div_ceil(64)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for l in 0..sample_size {
        for (c, &prob) in p.iter().enumerate() {
            // draw < p: exact Bernoulli(p), including the p = 0 and p = 1 ends
            if rng.gen::<f64>() < prob {
                let bit = l * columns.len() + c;
                bits[bit >> 6] |= 1 << (bit & 63);
            }
        }
    }
    ScenarioMatrix {
        sample_size,
        columns,
        bits,
        seed,
    }
}

/// Profit of the schedule in one sampled scenario: the profits of assigned
/// targets whose observation succeeded there.
pub fn scenario_profit(
    instance: &Instance,
    schedule: &Schedule,
    scenarios: &ScenarioMatrix,
    scenario: usize,
) -> f64 {
    debug_assert!(scenario < scenarios.sample_size);
    let profit_of: BTreeMap<TargetId, f64> =
        instance.targets.iter().map(|t| (t.id, t.profit)).collect();
    let mut total = 0.0;
    for a in schedule.iter_assignments() {
        let col = scenarios
            .column_of(a.target_id, a.orbit_id)
            .expect("assignment has no sampled window column");
        if scenarios.outcome(scenario, col) {
            total += profit_of[&a.target_id];
        }
    }
    total
}

/// How many scenarios may fall below the reported profit.
fn violation_budget(sample_size: usize, epsilon: f64) -> usize {
    num::floor(sample_size as f64 * epsilon) as usize
}

/// All per-scenario profits of the schedule, in scenario order.
pub fn scenario_profits(
    instance: &Instance,
    schedule: &Schedule,
    scenarios: &ScenarioMatrix,
) -> Vec<f64> {
    let profit_of: BTreeMap<TargetId, f64> =
        instance.targets.iter().map(|t| (t.id, t.profit)).collect();
    let cols: Vec<(usize, f64)> = schedule
        .iter_assignments()
        .map(|a| {
            let col = scenarios
                .column_of(a.target_id, a.orbit_id)
                .expect("assignment has no sampled window column");
            (col, profit_of[&a.target_id])
        })
        .collect();
    let mut profits = Vec::with_capacity(scenarios.sample_size);
    for l in 0..scenarios.sample_size {
        let base = l * scenarios.columns.len();
        let mut total = 0.0;
        for &(col, profit) in &cols {
            let bit = base + col;
            if (scenarios.bits[bit >> 6] >> (bit & 63)) & 1 == 1 {
                total += profit;
            }
        }
        profits.push(total);
    }
    profits
}

/// The confidence-quantile profit: the largest value such that at most
/// `floor(sample_size * epsilon)` scenario profits fall strictly below it.
///
/// Equivalently, the ascending order statistic at that index. Evaluation
/// order over scenarios does not matter.
pub fn confidence_profit(
    instance: &Instance,
    schedule: &Schedule,
    scenarios: &ScenarioMatrix,
    epsilon: f64,
) -> f64 {
    let mut profits = scenario_profits(instance, schedule, scenarios);
    debug_assert!(
        !profits.is_empty(),
        "confidence profit needs at least one scenario"
    );
    profits.sort_unstable_by(f64::total_cmp);
    let idx = violation_budget(scenarios.sample_size, epsilon).min(profits.len() - 1);
    profits[idx]
}
