//! Time-slack calculus and the one-dimensional start-time subproblem.
//!
//! When a candidate observation is timed against fixed neighbours, the only
//! free variable is its normalized start fraction. The objective prefers the
//! fraction closest to 1/2 (imaging near the window centre); the constraints
//! require the gap to each fixed neighbour to cover the attitude transition
//! time.
//!
//! Under the linear pitch model both constraint slacks are piecewise affine
//! in the fraction, with kinks where the pitch delta changes sign or the
//! slew axis switches, and jumps where the settle-time step changes. The
//! solver therefore scans a uniform grid augmented with those breakpoints
//! (making run detection exact), then bisection-refines the run boundaries.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{self, AttitudePair};
use crate::model::{ObservationAssignment, OrbitResource, VisibleWindow};
use crate::num;

/// Resolution knobs for the scan-and-refine solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartTimeParams {
    /// Uniform scan step in fraction units.
    pub scan_resolution: f64,
    /// Bisection stops once the boundary bracket is this narrow.
    pub refine_tolerance: f64,
}

impl Default for StartTimeParams {
    fn default() -> Self {
        Self {
            scan_resolution: 1e-3,
            refine_tolerance: 1e-6,
        }
    }
}

/// A candidate observation between (optional) fixed neighbours on one orbit.
#[derive(Clone, Copy)]
pub struct SlackContext<'a> {
    pub window: &'a VisibleWindow,
    /// Observation duration of the candidate's target, seconds.
    pub obs_duration_s: f64,
    pub predecessor: Option<&'a ObservationAssignment>,
    pub successor: Option<&'a ObservationAssignment>,
    pub orbit: &'a OrbitResource,
}

impl<'a> SlackContext<'a> {
    fn attitude(&self, fraction: f64) -> AttitudePair {
        let start = self
            .window
            .start_for_fraction(self.obs_duration_s, fraction);
        geometry::attitude_unchecked(self.window, self.orbit, start, self.obs_duration_s)
    }
}

/// Free time between the candidate (at `fraction`) and its successor:
/// successor start minus candidate end. `None` without a successor.
pub fn interval_to_successor(ctx: &SlackContext, fraction: f64) -> Option<f64> {
    ctx.successor.map(|s| {
        s.start_s
            - (ctx.window.start_for_fraction(ctx.obs_duration_s, fraction) + ctx.obs_duration_s)
    })
}

/// Free time between the predecessor and the candidate (at `fraction`):
/// candidate start minus predecessor end. `None` without a predecessor.
pub fn interval_to_predecessor(ctx: &SlackContext, fraction: f64) -> Option<f64> {
    ctx.predecessor
        .map(|p| ctx.window.start_for_fraction(ctx.obs_duration_s, fraction) - p.end_s)
}

fn successor_slack_at(ctx: &SlackContext, fraction: f64) -> f64 {
    match ctx.successor {
        Some(s) => {
            let interval = interval_to_successor(ctx, fraction).unwrap();
            interval - geometry::transition_time(&ctx.attitude(fraction), &s.attitude(), ctx.orbit)
        }
        None => f64::INFINITY,
    }
}

fn predecessor_slack_at(ctx: &SlackContext, fraction: f64) -> f64 {
    match ctx.predecessor {
        Some(p) => {
            let interval = interval_to_predecessor(ctx, fraction).unwrap();
            interval - geometry::transition_time(&p.attitude(), &ctx.attitude(fraction), ctx.orbit)
        }
        None => f64::INFINITY,
    }
}

/// Signed feasibility margin of the candidate at `fraction`: the smaller of
/// the two neighbour slacks, infinite with no neighbours.
pub fn constraint_slack(ctx: &SlackContext, fraction: f64) -> f64 {
    f64::min(
        successor_slack_at(ctx, fraction),
        predecessor_slack_at(ctx, fraction),
    )
}

/// Maximum shiftability toward the successor.
///
/// With a successor fixed, this is the best achievable slack over the whole
/// start interval; as the last observation on the orbit it is the residual
/// window room at the current placement.
pub fn slack_to_successor(ctx: &SlackContext, fraction: f64) -> f64 {
    match ctx.successor {
        Some(_) => max_over_fractions(ctx, |t| successor_slack_at(ctx, t)),
        None => (1.0 - fraction) * ctx.window.start_span_s(ctx.obs_duration_s),
    }
}

/// Mirror of [`slack_to_successor`] toward the predecessor; first on the
/// orbit, it is the room between the window start and the current placement.
pub fn slack_to_predecessor(ctx: &SlackContext, fraction: f64) -> f64 {
    match ctx.predecessor {
        Some(_) => max_over_fractions(ctx, |t| predecessor_slack_at(ctx, t)),
        None => fraction * ctx.window.start_span_s(ctx.obs_duration_s),
    }
}

/// Pitch of the candidate as an affine function of the fraction:
/// `pitch(t) = offset + slope * t`.
fn pitch_line(ctx: &SlackContext) -> (f64, f64) {
    let len = ctx.window.length_s();
    let span = ctx.window.start_span_s(ctx.obs_duration_s);
    let maxp = ctx.orbit.max_pitch_deg;
    let offset = maxp * (1.0 - ctx.obs_duration_s / len);
    let slope = -2.0 * maxp * span / len;
    (offset, slope)
}

/// Fractions where a neighbour constraint changes its affine piece: pitch
/// delta sign change, slew-axis crossover, and settle-step thresholds.
fn breakpoints_for_neighbor(ctx: &SlackContext, neighbor: &AttitudePair, out: &mut Vec<f64>) {
    let (offset, slope) = pitch_line(ctx);
    if slope == 0.0 {
        return;
    }
    let beta = offset - neighbor.pitch_deg;
    let droll = num::abs(ctx.window.roll_angle_deg - neighbor.roll_deg);
    let mut push_abs_level = |level: f64| {
        if level >= 0.0 {
            for root in [(level - beta) / slope, (-level - beta) / slope] {
                if root > 0.0 && root < 1.0 {
                    out.push(root);
                }
            }
        }
    };
    // |dpitch| = 0
    push_abs_level(0.0);
    // slew crossover: |dpitch|/pitch_rate = droll/roll_rate
    push_abs_level(droll * ctx.orbit.pitch_rate_deg_per_s / ctx.orbit.roll_rate_deg_per_s);
    // settle steps: |dpitch| + droll in {15, 40}
    push_abs_level(15.0 - droll);
    push_abs_level(40.0 - droll);
}

/// Scan set: uniform grid plus constraint breakpoints (straddled by a tiny
/// offset so both sides of a settle-step jump get sampled).
fn scan_points(ctx: &SlackContext, params: &StartTimeParams) -> Vec<f64> {
    let n = num::round(1.0 / params.scan_resolution).max(1.0) as usize;
    let mut pts = Vec::with_capacity(n + 16);
    for j in 0..=n {
        pts.push(j as f64 / n as f64);
    }
    let mut brk = Vec::new();
    if let Some(s) = ctx.successor {
        breakpoints_for_neighbor(ctx, &s.attitude(), &mut brk);
    }
    if let Some(p) = ctx.predecessor {
        breakpoints_for_neighbor(ctx, &p.attitude(), &mut brk);
    }
    const STRADDLE: f64 = 1e-9;
    for b in brk {
        for t in [b - STRADDLE, b, b + STRADDLE] {
            if (0.0..=1.0).contains(&t) {
                pts.push(t);
            }
        }
    }
    pts.push(0.5);
    pts.sort_unstable_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn max_over_fractions(ctx: &SlackContext, f: impl Fn(f64) -> f64) -> f64 {
    scan_points(ctx, &StartTimeParams::default())
        .into_iter()
        .map(f)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Bisect between an infeasible and a feasible fraction; returns the
/// feasible endpoint of the final bracket, so the result always satisfies
/// the constraints it was tested against.
fn refine_boundary(ctx: &SlackContext, mut bad: f64, mut good: f64, tolerance: f64) -> f64 {
    while num::abs(good - bad) > tolerance {
        let mid = 0.5 * (good + bad);
        if mid == good || mid == bad {
            break;
        }
        if constraint_slack(ctx, mid) >= 0.0 {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

/// Choose the feasible start fraction closest to 1/2, `None` when the
/// neighbour constraints leave no room anywhere in the window.
///
/// Ties between equally distant feasible points break toward the smaller
/// fraction (earlier imaging).
#[allow(clippy::needless_range_loop)] // the scan runs one past the end to flush the last run
pub fn solve_start_time(ctx: &SlackContext, params: &StartTimeParams) -> Option<f64> {
    // relaxation screen: transitions never undercut the 5 s settle floor,
    // so the start must fit between these bounds for any fraction at all
    let mut earliest = ctx.window.start_s;
    let mut latest = ctx.window.end_s - ctx.obs_duration_s;
    if let Some(p) = ctx.predecessor {
        earliest = f64::max(earliest, p.end_s + 5.0);
    }
    if let Some(s) = ctx.successor {
        latest = f64::min(latest, s.start_s - ctx.obs_duration_s - 5.0);
    }
    if earliest > latest {
        return None;
    }

    if constraint_slack(ctx, 0.5) >= 0.0 {
        return Some(0.5);
    }

    let pts = scan_points(ctx, params);
    let feasible: Vec<bool> = pts
        .iter()
        .map(|&t| constraint_slack(ctx, t) >= 0.0)
        .collect();

    let mut best: Option<f64> = None;
    let mut run_start: Option<usize> = None;
    for i in 0..=pts.len() {
        let ok = i < pts.len() && feasible[i];
        if ok && run_start.is_none() {
            run_start = Some(i);
        }
        if !ok {
            if let Some(s) = run_start.take() {
                let e = i - 1;
                let lo = if s == 0 {
                    pts[0]
                } else {
                    refine_boundary(ctx, pts[s - 1], pts[s], params.refine_tolerance)
                };
                let hi = if e + 1 == pts.len() {
                    pts[e]
                } else {
                    refine_boundary(ctx, pts[e + 1], pts[e], params.refine_tolerance)
                };
                let candidate = if 0.5 < lo {
                    lo
                } else if 0.5 > hi {
                    hi
                } else {
                    // unreachable: 0.5 itself was infeasible and refinement
                    // cannot cross a scanned point
                    hi
                };
                let better = match best {
                    None => true,
                    Some(b) => {
                        let (dc, db) = (num::abs(candidate - 0.5), num::abs(b - 0.5));
                        dc < db || (dc == db && candidate < b)
                    }
                };
                if better {
                    best = Some(candidate);
                }
            }
        }
    }
    best
}
