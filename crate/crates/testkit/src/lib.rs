//! Test-only oracles and fixtures.
//!
//! Everything in here deliberately recomputes the underlying math from the
//! raw records instead of calling the solver's own helpers, so a bug in the
//! production path cannot hide inside its oracle.

use rand::Rng;

use aeos_core::instance_gen::{self, GenMode, GenSpec, SyntheticParams};
use aeos_core::model::{Instance, ObservationAssignment, OrbitResource, VisibleWindow};
use aeos_core::start_time::SlackContext;

/// Maximize the reported profit subject to the sampled-scenario constraints
/// by enumerating every admissible set of discarded scenarios.
///
/// A solution may discard at most `floor(n * epsilon)` scenarios; its profit
/// is the minimum over the kept ones. Exponential in the budget; intended
/// for sample sizes up to ~20.
pub fn brute_force_confidence(profits: &[f64], epsilon: f64) -> f64 {
    let n = profits.len();
    assert!(n >= 1, "need at least one scenario");
    let budget = ((n as f64 * epsilon).floor() as usize).min(n - 1);

    fn explore(
        profits: &[f64],
        start: usize,
        budget_left: usize,
        skipped: &mut Vec<usize>,
        best: &mut f64,
    ) {
        let kept_min = profits
            .iter()
            .enumerate()
            .filter(|(i, _)| !skipped.contains(i))
            .map(|(_, &p)| p)
            .fold(f64::INFINITY, f64::min);
        if kept_min > *best {
            *best = kept_min;
        }
        if budget_left == 0 {
            return;
        }
        for i in start..profits.len() {
            skipped.push(i);
            explore(profits, i + 1, budget_left - 1, skipped, best);
            skipped.pop();
        }
    }

    let mut best = f64::NEG_INFINITY;
    explore(profits, 0, budget, &mut Vec::new(), &mut best);
    best
}

/// An owned slack-context fixture (the production context borrows).
#[derive(Clone, Debug)]
pub struct ContextFixture {
    pub window: VisibleWindow,
    pub orbit: OrbitResource,
    pub obs_duration_s: f64,
    pub predecessor: Option<ObservationAssignment>,
    pub successor: Option<ObservationAssignment>,
}

impl ContextFixture {
    pub fn ctx(&self) -> SlackContext<'_> {
        SlackContext {
            window: &self.window,
            obs_duration_s: self.obs_duration_s,
            predecessor: self.predecessor.as_ref(),
            successor: self.successor.as_ref(),
            orbit: &self.orbit,
        }
    }
}

/// Which transition-time regime a random context exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContextMode {
    /// Roll-dominated geometry: the transition time to each neighbour is
    /// constant over the whole start interval.
    ConstantTransition,
    /// Unrestricted attitudes: the transition time varies with the fraction.
    Geometric,
}

fn fixed_assignment(start_s: f64, end_s: f64, pitch: f64, roll: f64) -> ObservationAssignment {
    ObservationAssignment {
        target_id: 999,
        orbit_id: 1,
        start_fraction: 0.5,
        start_s,
        end_s,
        pitch_deg: pitch,
        roll_deg: roll,
    }
}

/// Draw a random slack context around a random window, with neighbours
/// present ~80% of the time each.
pub fn random_context<R: Rng>(rng: &mut R, mode: ContextMode) -> ContextFixture {
    let window_start = rng.gen_range(0.0..1000.0);
    let length = rng.gen_range(50.0..500.0);
    let obs_duration_s = rng.gen_range(5.0..f64::min(40.0, 0.8 * length));

    let (orbit, neighbor_roll_band): (OrbitResource, (f64, f64)) = match mode {
        ContextMode::ConstantTransition => {
            let mut o = instance_gen::orbit_resource(1, 1e9, 1e9);
            o.max_pitch_deg = rng.gen_range(2.0..10.0);
            o.pitch_rate_deg_per_s = 3.0;
            o.roll_rate_deg_per_s = 9.0;
            o.max_roll_deg = 95.0;
            // a >= 61 deg roll delta keeps the slew roll-bound and the
            // settle step pinned while the pitch delta stays below 20 deg
            (o, (61.0, 90.0))
        }
        ContextMode::Geometric => {
            let mut o = instance_gen::orbit_resource(1, 1e9, 1e9);
            o.max_pitch_deg = rng.gen_range(10.0..30.0);
            o.pitch_rate_deg_per_s = rng.gen_range(1.0..4.0);
            o.roll_rate_deg_per_s = rng.gen_range(1.0..4.0);
            (o, (-30.0, 30.0))
        }
    };

    let roll = match mode {
        ContextMode::ConstantTransition => 0.0,
        ContextMode::Geometric => rng.gen_range(-30.0..30.0),
    };
    let window = VisibleWindow {
        target_id: 1,
        orbit_id: 1,
        start_s: window_start,
        end_s: window_start + length,
        success_prob: 1.0,
        roll_angle_deg: roll,
        available: true,
    };

    let has_predecessor = rng.gen_bool(0.8);
    let has_successor = rng.gen_bool(0.8);
    let mut neighbor = |before: bool| {
        let pitch = match mode {
            ContextMode::ConstantTransition => rng.gen_range(-10.0..10.0),
            ContextMode::Geometric => rng.gen_range(-30.0..30.0),
        };
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let nroll = sign * rng.gen_range(neighbor_roll_band.0..neighbor_roll_band.1);
        if before {
            let end = window_start + rng.gen_range(-80.0..0.75 * length);
            fixed_assignment(end - 15.0, end, pitch, nroll)
        } else {
            let start = window_start + length + rng.gen_range(-0.75 * length..80.0);
            fixed_assignment(start, start + 15.0, pitch, nroll)
        }
    };

    let predecessor = has_predecessor.then(|| neighbor(true));
    let successor = has_successor.then(|| neighbor(false));
    ContextFixture {
        window,
        orbit,
        obs_duration_s,
        predecessor,
        successor,
    }
}

/// Independent re-computation of the feasibility margin at one fraction,
/// from the raw records.
pub fn oracle_slack(fix: &ContextFixture, fraction: f64) -> f64 {
    let w = &fix.window;
    let ot = fix.obs_duration_s;
    let span = w.end_s - ot - w.start_s;
    let start = w.start_s + fraction * span;
    let mid = (start + 0.5 * ot - w.start_s) / (w.end_s - w.start_s);
    let pitch = fix.orbit.max_pitch_deg * (1.0 - 2.0 * mid);

    let transition = |p1: f64, r1: f64, p2: f64, r2: f64| -> f64 {
        let dp = (p1 - p2).abs();
        let dr = (r1 - r2).abs();
        let slew = f64::max(
            dp / fix.orbit.pitch_rate_deg_per_s,
            dr / fix.orbit.roll_rate_deg_per_s,
        );
        let total = dp + dr;
        let settle = if total <= 15.0 {
            5.0
        } else if total <= 40.0 {
            10.0
        } else {
            15.0
        };
        slew + settle
    };

    let mut slack = f64::INFINITY;
    if let Some(s) = &fix.successor {
        let interval = s.start_s - (start + ot);
        slack = slack.min(interval - transition(pitch, w.roll_angle_deg, s.pitch_deg, s.roll_deg));
    }
    if let Some(p) = &fix.predecessor {
        let interval = start - p.end_s;
        slack = slack.min(interval - transition(p.pitch_deg, p.roll_deg, pitch, w.roll_angle_deg));
    }
    slack
}

/// Exhaustive grid-scan solution of the start-time subproblem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleSolution {
    pub fraction: f64,
    pub objective: f64,
}

/// Scan `grid + 1` equispaced fractions, refine the boundaries of every
/// feasible run by bisection to 1e-9, and return the feasible point closest
/// to 1/2 (ties toward the smaller fraction).
#[allow(clippy::needless_range_loop)] // the scan runs one past the end to flush the last run
pub fn oracle_solve(fix: &ContextFixture, grid: usize) -> Option<OracleSolution> {
    let feasible: Vec<bool> = (0..=grid)
        .map(|j| oracle_slack(fix, j as f64 / grid as f64) >= 0.0)
        .collect();
    let at = |j: usize| j as f64 / grid as f64;

    let refine = |mut bad: f64, mut good: f64| -> f64 {
        while (good - bad).abs() > 1e-9 {
            let mid = 0.5 * (good + bad);
            if mid == good || mid == bad {
                break;
            }
            if oracle_slack(fix, mid) >= 0.0 {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };

    let mut best: Option<f64> = None;
    let mut run_start: Option<usize> = None;
    for j in 0..=grid + 1 {
        let ok = j <= grid && feasible[j];
        if ok && run_start.is_none() {
            run_start = Some(j);
        }
        if !ok {
            if let Some(s) = run_start.take() {
                let e = j - 1;
                let lo = if s == 0 {
                    0.0
                } else {
                    refine(at(s - 1), at(s))
                };
                let hi = if e == grid {
                    1.0
                } else {
                    refine(at(e + 1), at(e))
                };
                let candidate = if 0.5 < lo {
                    lo
                } else if 0.5 > hi {
                    hi
                } else {
                    0.5
                };
                let better = match best {
                    None => true,
                    Some(b) => {
                        let (dc, db) = ((candidate - 0.5).abs(), (b - 0.5).abs());
                        dc < db || (dc == db && candidate < b)
                    }
                };
                if better {
                    best = Some(candidate);
                }
            }
        }
    }
    best.map(|fraction| OracleSolution {
        fraction,
        objective: (fraction - 0.5) * (fraction - 0.5),
    })
}

/// Synthetic desk-scale generation spec shared by tests and experiments.
pub fn desk_spec(n_targets: usize, n_orbits: usize, memory_mb: f64, energy_j: f64) -> GenSpec {
    GenSpec {
        n_world: n_targets,
        regions: vec![],
        horizon_s: 7200.0,
        epoch: instance_gen::Epoch::default(),
        profit_range: (1, 10),
        obs_duration_range_s: (15.0, 30.0),
        prob_range: (0.3, 1.0),
        step_s: 1.0,
        mode: GenMode::Synthetic(SyntheticParams {
            window_probability: 0.9,
            window_length_range_s: (120.0, 400.0),
        }),
        orbits: instance_gen::synthetic_orbits(n_orbits, memory_mb, energy_j),
    }
}

/// Generate a synthetic desk instance with the default capacities.
pub fn desk_instance(seed: u64, n_targets: usize, n_orbits: usize) -> Instance {
    instance_gen::generate(&desk_spec(n_targets, n_orbits, 7500.0, 80_000.0), seed)
        .expect("desk spec is valid")
}
