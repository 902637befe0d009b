//! Fast insertion of one candidate observation into an orbit sequence, and
//! its inverse.
//!
//! The candidate is first timed against both neighbours as they stand; if no
//! start fraction works, the blocking neighbour is re-timed around the
//! candidate fixed at fraction 1/2 (successor first, then predecessor, then
//! both). Re-solving the neighbour's own start-time subproblem — rather than
//! sliding it by a raw offset — keeps the shifted neighbour feasible against
//! its far-side neighbour by construction.
//!
//! All mutations commit in one step after every check has passed, so a
//! failed attempt leaves the schedule untouched, byte for byte.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry;
use crate::model::{
    orbit_resource_usage, InstanceIndex, ModelError, ObservationAssignment, OrbitId, OrbitResource,
    Schedule, TargetId,
};
use crate::start_time::{self, SlackContext, StartTimeParams};

/// Net ledger change of a successful operation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResourceDelta {
    pub memory_mb: f64,
    pub energy_j: f64,
}

/// A neighbour whose start fraction was moved to make room.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftedNeighbor {
    pub target_id: TargetId,
    pub old_fraction: f64,
    pub new_fraction: f64,
}

/// Result of one insertion attempt. Failure is a value, not an error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InsertionOutcome {
    pub success: bool,
    pub placed: Option<ObservationAssignment>,
    pub shifted_neighbors: Vec<ShiftedNeighbor>,
    pub resource_delta: ResourceDelta,
}

impl InsertionOutcome {
    fn failure() -> Self {
        Self {
            success: false,
            placed: None,
            shifted_neighbors: Vec::new(),
            resource_delta: ResourceDelta::default(),
        }
    }
}

/// Result of removing an assigned target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemovalOutcome {
    pub removed: ObservationAssignment,
    pub resource_delta: ResourceDelta,
}

fn duration_of(index: &InstanceIndex, target_id: TargetId) -> f64 {
    index
        .target(target_id)
        .map(|t| t.obs_duration_s)
        .unwrap_or(0.0)
}

/// Transition-feasibility margin between two consecutive assignments.
fn gap_slack(a: &ObservationAssignment, b: &ObservationAssignment, orbit: &OrbitResource) -> f64 {
    b.start_s - a.end_s - geometry::transition_time(&a.attitude(), &b.attitude(), orbit)
}

/// Check ordering and transition feasibility of a whole orbit sequence.
fn sequence_feasible(seq: &[ObservationAssignment], orbit: &OrbitResource) -> bool {
    seq.windows(2).all(|pair| {
        pair[0].start_s < pair[1].start_s && gap_slack(&pair[0], &pair[1], orbit) >= 0.0
    })
}

/// Replace an orbit's sequence and ledgers with a recomputed state; returns
/// the ledger delta.
fn commit_sequence(
    schedule: &mut Schedule,
    index: &InstanceIndex,
    orbit: &OrbitResource,
    new_seq: Vec<ObservationAssignment>,
) -> ResourceDelta {
    let orbit_id = orbit.id;
    let old_memory = schedule.memory_used(orbit_id);
    let old_energy = schedule.energy_used(orbit_id);
    if new_seq.is_empty() {
        schedule.assignments_by_orbit.remove(&orbit_id);
        schedule.memory_used_mb.remove(&orbit_id);
        schedule.energy_used_j.remove(&orbit_id);
        return ResourceDelta {
            memory_mb: -old_memory,
            energy_j: -old_energy,
        };
    }
    let (memory, energy) = orbit_resource_usage(orbit, |t| duration_of(index, t), &new_seq);
    schedule.assignments_by_orbit.insert(orbit_id, new_seq);
    schedule.memory_used_mb.insert(orbit_id, memory);
    schedule.energy_used_j.insert(orbit_id, energy);
    ResourceDelta {
        memory_mb: memory - old_memory,
        energy_j: energy - old_energy,
    }
}

/// Attempt to insert the observation of `target_id` in its window on
/// `orbit_id`, shifting at most the two adjacent neighbours.
///
/// Returns a failure outcome (not an error) when the target is already
/// assigned, the window is unavailable, resources are exhausted, or no
/// feasible timing exists. Unknown ids are hard errors.
pub fn try_insert(
    schedule: &mut Schedule,
    index: &InstanceIndex,
    target_id: TargetId,
    orbit_id: OrbitId,
    params: &StartTimeParams,
) -> Result<InsertionOutcome, ModelError> {
    let target = index.target(target_id)?;
    let orbit = index.orbit(orbit_id)?;
    let window = index
        .window(target_id, orbit_id)
        .ok_or(ModelError::UnknownWindow {
            target_id,
            orbit_id,
        })?;

    if !window.available || schedule.contains_target(target_id) {
        return Ok(InsertionOutcome::failure());
    }
    let ot = target.obs_duration_s;

    // neighbours are fixed by the nominal half-fraction position
    let nominal = geometry::assignment_for_fraction(window, target, orbit, 0.5);
    let seq = schedule.orbit_sequence(orbit_id);
    let insert_pos = seq.partition_point(|a| a.start_s <= nominal.start_s);
    let pred: Option<ObservationAssignment> = insert_pos.checked_sub(1).map(|i| seq[i].clone());
    let succ: Option<ObservationAssignment> = seq.get(insert_pos).cloned();

    // fast resource screen before any timing work; the exact check runs
    // again on the final sequence at commit time
    let memory_after = schedule.memory_used(orbit_id) + ot * orbit.memory_rate_mb_per_s;
    if memory_after > orbit.memory_capacity_mb {
        return Ok(InsertionOutcome::failure());
    }
    let mut maneuver_delta = 0.0;
    if let Some(p) = &pred {
        maneuver_delta += geometry::maneuver_energy(&p.attitude(), &nominal.attitude(), orbit);
    }
    if let Some(s) = &succ {
        maneuver_delta += geometry::maneuver_energy(&nominal.attitude(), &s.attitude(), orbit);
    }
    if let (Some(p), Some(s)) = (&pred, &succ) {
        maneuver_delta -= geometry::maneuver_energy(&p.attitude(), &s.attitude(), orbit);
    }
    let energy_after =
        schedule.energy_used(orbit_id) + ot * orbit.imaging_energy_j_per_s + maneuver_delta;
    if energy_after > orbit.energy_capacity_j {
        return Ok(InsertionOutcome::failure());
    }

    // time the candidate against both neighbours as they stand
    let ctx = SlackContext {
        window,
        obs_duration_s: ot,
        predecessor: pred.as_ref(),
        successor: succ.as_ref(),
        orbit,
    };
    if let Some(fraction) = start_time::solve_start_time(&ctx, params) {
        let placed = geometry::assignment_for_fraction(window, target, orbit, fraction);
        return Ok(commit_insert(
            schedule,
            index,
            orbit,
            insert_pos,
            placed,
            vec![],
        ));
    }

    // fraction pinned to 1/2; decide which neighbour blocks
    let pred_ok = pred.is_none()
        || start_time::constraint_slack(
            &SlackContext {
                successor: None,
                ..ctx
            },
            0.5,
        ) >= 0.0;
    let succ_ok = succ.is_none()
        || start_time::constraint_slack(
            &SlackContext {
                predecessor: None,
                ..ctx
            },
            0.5,
        ) >= 0.0;

    let retime_successor =
        |s: &ObservationAssignment| -> Result<Option<ObservationAssignment>, ModelError> {
            let s_target = index.target(s.target_id)?;
            let s_window =
                index
                    .window(s.target_id, orbit_id)
                    .ok_or(ModelError::UnknownWindow {
                        target_id: s.target_id,
                        orbit_id,
                    })?;
            let far = schedule.orbit_sequence(orbit_id).get(insert_pos + 1);
            let ctx_s = SlackContext {
                window: s_window,
                obs_duration_s: s_target.obs_duration_s,
                predecessor: Some(&nominal),
                successor: far,
                orbit,
            };
            Ok(start_time::solve_start_time(&ctx_s, params)
                .map(|f| geometry::assignment_for_fraction(s_window, s_target, orbit, f)))
        };
    let retime_predecessor =
        |p: &ObservationAssignment| -> Result<Option<ObservationAssignment>, ModelError> {
            let p_target = index.target(p.target_id)?;
            let p_window =
                index
                    .window(p.target_id, orbit_id)
                    .ok_or(ModelError::UnknownWindow {
                        target_id: p.target_id,
                        orbit_id,
                    })?;
            let far = insert_pos
                .checked_sub(2)
                .and_then(|i| schedule.orbit_sequence(orbit_id).get(i));
            let ctx_p = SlackContext {
                window: p_window,
                obs_duration_s: p_target.obs_duration_s,
                predecessor: far,
                successor: Some(&nominal),
                orbit,
            };
            Ok(start_time::solve_start_time(&ctx_p, params)
                .map(|f| geometry::assignment_for_fraction(p_window, p_target, orbit, f)))
        };

    let shift = |old: &ObservationAssignment, new: &ObservationAssignment| ShiftedNeighbor {
        target_id: old.target_id,
        old_fraction: old.start_fraction,
        new_fraction: new.start_fraction,
    };

    if pred_ok && !succ_ok {
        // move the successor out of the way
        let s = succ.as_ref().expect("a missing successor cannot block");
        if let Some(new_s) = retime_successor(s)? {
            let shifts = vec![(insert_pos, new_s.clone(), shift(s, &new_s))];
            return Ok(commit_insert(
                schedule, index, orbit, insert_pos, nominal, shifts,
            ));
        }
        return Ok(InsertionOutcome::failure());
    }
    if succ_ok && !pred_ok {
        // move the predecessor out of the way
        let p = pred.as_ref().expect("a missing predecessor cannot block");
        if let Some(new_p) = retime_predecessor(p)? {
            let shifts = vec![(insert_pos - 1, new_p.clone(), shift(p, &new_p))];
            return Ok(commit_insert(
                schedule, index, orbit, insert_pos, nominal, shifts,
            ));
        }
        return Ok(InsertionOutcome::failure());
    }
    if let (Some(p), Some(s)) = (&pred, &succ) {
        // both block: one pass of successor-then-predecessor re-timing
        if let (Some(new_s), Some(new_p)) = (retime_successor(s)?, retime_predecessor(p)?) {
            let shifts = vec![
                (insert_pos, new_s.clone(), shift(s, &new_s)),
                (insert_pos - 1, new_p.clone(), shift(p, &new_p)),
            ];
            return Ok(commit_insert(
                schedule, index, orbit, insert_pos, nominal, shifts,
            ));
        }
    }
    Ok(InsertionOutcome::failure())
}

/// Assemble the post-insertion sequence, re-check every constraint on it,
/// and commit atomically; any failed check returns a failure outcome with
/// the schedule untouched.
fn commit_insert(
    schedule: &mut Schedule,
    index: &InstanceIndex,
    orbit: &OrbitResource,
    insert_pos: usize,
    placed: ObservationAssignment,
    shifts: Vec<(usize, ObservationAssignment, ShiftedNeighbor)>,
) -> InsertionOutcome {
    let mut new_seq: Vec<ObservationAssignment> = schedule.orbit_sequence(orbit.id).to_vec();
    let mut shifted = Vec::with_capacity(shifts.len());
    for (pos, new_assignment, record) in shifts {
        new_seq[pos] = new_assignment;
        shifted.push(record);
    }
    new_seq.insert(insert_pos, placed.clone());

    if !sequence_feasible(&new_seq, orbit) {
        return InsertionOutcome::failure();
    }
    let (memory, energy) = orbit_resource_usage(orbit, |t| duration_of(index, t), &new_seq);
    if memory > orbit.memory_capacity_mb || energy > orbit.energy_capacity_j {
        return InsertionOutcome::failure();
    }

    let resource_delta = commit_sequence(schedule, index, orbit, new_seq);
    InsertionOutcome {
        success: true,
        placed: Some(placed),
        shifted_neighbors: shifted,
        resource_delta,
    }
}

/// Remove an assigned target. Neighbours keep their timing; the ledgers
/// account for the rejoined direct maneuver, which the removed transition
/// times always cover, so the remaining sequence stays feasible.
pub fn remove(
    schedule: &mut Schedule,
    index: &InstanceIndex,
    target_id: TargetId,
) -> Result<RemovalOutcome, ModelError> {
    let (orbit_id, pos) = schedule
        .find_target(target_id)
        .ok_or(ModelError::TargetNotAssigned(target_id))?;
    let orbit = index.orbit(orbit_id)?;
    let mut new_seq = schedule.orbit_sequence(orbit_id).to_vec();
    let removed = new_seq.remove(pos);
    debug_assert!(sequence_feasible(&new_seq, orbit));
    let resource_delta = commit_sequence(schedule, index, orbit, new_seq);
    Ok(RemovalOutcome {
        removed,
        resource_delta,
    })
}
