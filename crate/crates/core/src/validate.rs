//! Independent schedule validator.
//!
//! Recomputes every constraint from the instance and the assignments alone,
//! so any bookkeeping bug in the construction/annealing path shows up as a
//! reported violation rather than staying hidden in the ledgers.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry;
use crate::model::{
    orbit_resource_usage, Instance, InstanceIndex, ModelError, OrbitId, Schedule, TargetId,
    RESOURCE_RELATIVE_TOLERANCE, TIME_TOLERANCE_S,
};
use crate::num;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    Memory,
    Energy,
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResourceKind::Memory => write!(f, "memory"),
            ResourceKind::Energy => write!(f, "energy"),
        }
    }
}

/// One violated constraint, with enough data to locate and size it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// A target is observed more than once.
    DuplicateTarget {
        target_id: TargetId,
        orbit_ids: Vec<OrbitId>,
    },
    /// An assignment uses a window that does not exist or is unavailable.
    WindowUnavailable {
        target_id: TargetId,
        orbit_id: OrbitId,
    },
    /// Orbit sequence not strictly ordered by start time at `position`.
    OutOfOrder { orbit_id: OrbitId, position: usize },
    /// Stored start time disagrees with the one implied by the start fraction.
    TimingMismatch {
        target_id: TargetId,
        orbit_id: OrbitId,
        expected_start_s: f64,
        actual_start_s: f64,
    },
    /// Stored end time is not start plus the observation duration.
    DurationMismatch {
        target_id: TargetId,
        orbit_id: OrbitId,
        expected_end_s: f64,
        actual_end_s: f64,
    },
    /// Observation interval exceeds its visible window by `overflow_s`.
    OutsideWindow {
        target_id: TargetId,
        orbit_id: OrbitId,
        overflow_s: f64,
    },
    /// Stored attitude disagrees with the attitude model.
    AttitudeMismatch {
        target_id: TargetId,
        orbit_id: OrbitId,
        expected_pitch_deg: f64,
        actual_pitch_deg: f64,
    },
    /// Attitude outside the orbit's pitch/roll envelope.
    AttitudeEnvelope {
        target_id: TargetId,
        orbit_id: OrbitId,
        pitch_deg: f64,
        roll_deg: f64,
    },
    /// Consecutive observations overlap once the transition time is charged:
    /// previous end + transition exceeds next start by `overlap_s`.
    TransitionOverlap {
        orbit_id: OrbitId,
        from_target: TargetId,
        to_target: TargetId,
        overlap_s: f64,
    },
    MemoryExceeded {
        orbit_id: OrbitId,
        used_mb: f64,
        capacity_mb: f64,
    },
    EnergyExceeded {
        orbit_id: OrbitId,
        used_j: f64,
        capacity_j: f64,
    },
    /// Schedule ledger disagrees with the recomputed usage.
    LedgerMismatch {
        orbit_id: OrbitId,
        resource: ResourceKind,
        recorded: f64,
        recomputed: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateTarget { target_id, orbit_ids } => {
                write!(f, "target {target_id} observed more than once (orbits {orbit_ids:?})")
            }
            Violation::WindowUnavailable { target_id, orbit_id } => {
                write!(f, "target {target_id} has no usable window on orbit {orbit_id}")
            }
            Violation::OutOfOrder { orbit_id, position } => {
                write!(f, "orbit {orbit_id}: sequence not start-time ordered at position {position}")
            }
            Violation::TimingMismatch { target_id, orbit_id, expected_start_s, actual_start_s } => write!(
                f,
                "target {target_id} on orbit {orbit_id}: start {actual_start_s} s does not match \
                 fraction-implied {expected_start_s} s"
            ),
            Violation::DurationMismatch { target_id, orbit_id, expected_end_s, actual_end_s } => write!(
                f,
                "target {target_id} on orbit {orbit_id}: end {actual_end_s} s does not match \
                 start + duration = {expected_end_s} s"
            ),
            Violation::OutsideWindow { target_id, orbit_id, overflow_s } => write!(
                f,
                "target {target_id} on orbit {orbit_id}: observation leaves its window by {overflow_s} s"
            ),
            Violation::AttitudeMismatch { target_id, orbit_id, expected_pitch_deg, actual_pitch_deg } => write!(
                f,
                "target {target_id} on orbit {orbit_id}: pitch {actual_pitch_deg} deg does not match \
                 model value {expected_pitch_deg} deg"
            ),
            Violation::AttitudeEnvelope { target_id, orbit_id, pitch_deg, roll_deg } => write!(
                f,
                "target {target_id} on orbit {orbit_id}: attitude ({pitch_deg}, {roll_deg}) deg \
                 outside the envelope"
            ),
            Violation::TransitionOverlap { orbit_id, from_target, to_target, overlap_s } => write!(
                f,
                "orbit {orbit_id}: transition {from_target} -> {to_target} overlaps the next \
                 observation by {overlap_s} s"
            ),
            Violation::MemoryExceeded { orbit_id, used_mb, capacity_mb } => {
                write!(f, "orbit {orbit_id}: memory {used_mb} MB exceeds capacity {capacity_mb} MB")
            }
            Violation::EnergyExceeded { orbit_id, used_j, capacity_j } => {
                write!(f, "orbit {orbit_id}: energy {used_j} J exceeds capacity {capacity_j} J")
            }
            Violation::LedgerMismatch { orbit_id, resource, recorded, recomputed } => write!(
                f,
                "orbit {orbit_id}: {resource} ledger {recorded} disagrees with recomputed {recomputed}"
            ),
        }
    }
}

/// The outcome of validating a schedule: empty means feasible.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "schedule feasible: no violations");
        }
        writeln!(f, "{} violation(s):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

fn within_capacity(used: f64, capacity: f64) -> bool {
    used <= capacity * (1.0 + RESOURCE_RELATIVE_TOLERANCE)
}

/// Check every scheduling constraint and report all violations.
///
/// Unknown target or orbit ids are malformed input and return a hard error
/// instead of a report.
pub fn validate_schedule(
    instance: &Instance,
    schedule: &Schedule,
) -> Result<ValidationReport, ModelError> {
    let index = InstanceIndex::new(instance)?;
    let mut violations = Vec::new();

    // (6): each target at most once across all orbits
    let mut seen: BTreeMap<TargetId, Vec<OrbitId>> = BTreeMap::new();
    for (&orbit_id, seq) in &schedule.assignments_by_orbit {
        index.orbit(orbit_id)?;
        for a in seq {
            index.target(a.target_id)?;
            if a.orbit_id != orbit_id {
                // stored under the wrong orbit key: malformed
                return Err(ModelError::UnknownWindow {
                    target_id: a.target_id,
                    orbit_id,
                });
            }
            seen.entry(a.target_id).or_default().push(orbit_id);
        }
    }
    for (target_id, orbit_ids) in seen {
        if orbit_ids.len() > 1 {
            violations.push(Violation::DuplicateTarget {
                target_id,
                orbit_ids,
            });
        }
    }

    for (&orbit_id, seq) in &schedule.assignments_by_orbit {
        let orbit = index.orbit(orbit_id)?;

        for (pos, a) in seq.iter().enumerate() {
            let target = index.target(a.target_id)?;
            let ot = target.obs_duration_s;

            // (7): the window must exist and be usable
            let window = match index.window(a.target_id, orbit_id) {
                Some(w) if w.available => w,
                _ => {
                    violations.push(Violation::WindowUnavailable {
                        target_id: a.target_id,
                        orbit_id,
                    });
                    continue;
                }
            };

            if pos > 0 && !(seq[pos - 1].start_s < a.start_s) {
                violations.push(Violation::OutOfOrder {
                    orbit_id,
                    position: pos,
                });
            }

            let expected_start = window.start_for_fraction(ot, a.start_fraction);
            if num::abs(expected_start - a.start_s) > TIME_TOLERANCE_S {
                violations.push(Violation::TimingMismatch {
                    target_id: a.target_id,
                    orbit_id,
                    expected_start_s: expected_start,
                    actual_start_s: a.start_s,
                });
            }
            let expected_end = a.start_s + ot;
            if num::abs(expected_end - a.end_s) > TIME_TOLERANCE_S {
                violations.push(Violation::DurationMismatch {
                    target_id: a.target_id,
                    orbit_id,
                    expected_end_s: expected_end,
                    actual_end_s: a.end_s,
                });
            }

            let overflow = f64::max(window.start_s - a.start_s, a.end_s - window.end_s);
            if overflow > TIME_TOLERANCE_S {
                violations.push(Violation::OutsideWindow {
                    target_id: a.target_id,
                    orbit_id,
                    overflow_s: overflow,
                });
            } else {
                let expected = geometry::attitude_unchecked(window, orbit, a.start_s, ot);
                if num::abs(expected.pitch_deg - a.pitch_deg) > 1e-6
                    || num::abs(window.roll_angle_deg - a.roll_deg) > 1e-6
                {
                    violations.push(Violation::AttitudeMismatch {
                        target_id: a.target_id,
                        orbit_id,
                        expected_pitch_deg: expected.pitch_deg,
                        actual_pitch_deg: a.pitch_deg,
                    });
                }
            }

            if num::abs(a.pitch_deg) > orbit.max_pitch_deg + 1e-6
                || num::abs(a.roll_deg) > orbit.max_roll_deg + 1e-6
            {
                violations.push(Violation::AttitudeEnvelope {
                    target_id: a.target_id,
                    orbit_id,
                    pitch_deg: a.pitch_deg,
                    roll_deg: a.roll_deg,
                });
            }
        }

        // (10)/(12): consecutive observations must clear the transition time
        for pair in seq.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let trans = geometry::transition_time(&a.attitude(), &b.attitude(), orbit);
            let overlap = a.end_s + trans - b.start_s;
            if overlap > TIME_TOLERANCE_S {
                violations.push(Violation::TransitionOverlap {
                    orbit_id,
                    from_target: a.target_id,
                    to_target: b.target_id,
                    overlap_s: overlap,
                });
            }
        }

        // (8)-(9): recomputed resource usage against capacity
        let (memory, energy) = orbit_resource_usage(
            orbit,
            |tid| index.target(tid).map(|t| t.obs_duration_s).unwrap_or(0.0),
            seq,
        );
        if !within_capacity(memory, orbit.memory_capacity_mb) {
            violations.push(Violation::MemoryExceeded {
                orbit_id,
                used_mb: memory,
                capacity_mb: orbit.memory_capacity_mb,
            });
        }
        if !within_capacity(energy, orbit.energy_capacity_j) {
            violations.push(Violation::EnergyExceeded {
                orbit_id,
                used_j: energy,
                capacity_j: orbit.energy_capacity_j,
            });
        }

        // ledgers must match the recomputation
        let ledger_checks = [
            (ResourceKind::Memory, schedule.memory_used(orbit_id), memory),
            (ResourceKind::Energy, schedule.energy_used(orbit_id), energy),
        ];
        for (resource, recorded, recomputed) in ledger_checks {
            let scale = f64::max(num::abs(recorded), num::abs(recomputed));
            if num::abs(recorded - recomputed) > scale * RESOURCE_RELATIVE_TOLERANCE {
                violations.push(Violation::LedgerMismatch {
                    orbit_id,
                    resource,
                    recorded,
                    recomputed,
                });
            }
        }
    }

    // ledger entries for orbits with no assignments are mismatches
    for (&orbit_id, &recorded) in &schedule.memory_used_mb {
        if !schedule.assignments_by_orbit.contains_key(&orbit_id) && recorded != 0.0 {
            index.orbit(orbit_id)?;
            violations.push(Violation::LedgerMismatch {
                orbit_id,
                resource: ResourceKind::Memory,
                recorded,
                recomputed: 0.0,
            });
        }
    }
    for (&orbit_id, &recorded) in &schedule.energy_used_j {
        if !schedule.assignments_by_orbit.contains_key(&orbit_id) && recorded != 0.0 {
            index.orbit(orbit_id)?;
            violations.push(Violation::LedgerMismatch {
                orbit_id,
                resource: ResourceKind::Energy,
                recorded,
                recomputed: 0.0,
            });
        }
    }

    Ok(ValidationReport { violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::assignment_for_fraction;
    use crate::model::{OrbitResource, Target, VisibleWindow};
    use alloc::vec;

    fn orbit(id: OrbitId) -> OrbitResource {
        OrbitResource {
            id,
            memory_capacity_mb: 7500.0,
            energy_capacity_j: 80_000.0,
            memory_rate_mb_per_s: 100.0,
            imaging_energy_j_per_s: 500.0,
            maneuver_energy_j_per_deg: 1000.0,
            pitch_rate_deg_per_s: 3.0,
            roll_rate_deg_per_s: 3.0,
            max_pitch_deg: 30.0,
            max_roll_deg: 30.0,
        }
    }

    fn instance() -> Instance {
        Instance {
            targets: vec![
                Target {
                    id: 1,
                    latitude_deg: 0.0,
                    longitude_deg: 0.0,
                    profit: 4.0,
                    obs_duration_s: 20.0,
                },
                Target {
                    id: 2,
                    latitude_deg: 1.0,
                    longitude_deg: 1.0,
                    profit: 6.0,
                    obs_duration_s: 20.0,
                },
            ],
            orbits: vec![orbit(1), orbit(2)],
            windows: vec![
                VisibleWindow {
                    target_id: 1,
                    orbit_id: 1,
                    start_s: 0.0,
                    end_s: 100.0,
                    success_prob: 0.9,
                    roll_angle_deg: 0.0,
                    available: true,
                },
                VisibleWindow {
                    target_id: 2,
                    orbit_id: 1,
                    start_s: 50.0,
                    end_s: 150.0,
                    success_prob: 0.9,
                    roll_angle_deg: 0.0,
                    available: true,
                },
                VisibleWindow {
                    target_id: 1,
                    orbit_id: 2,
                    start_s: 300.0,
                    end_s: 400.0,
                    success_prob: 0.9,
                    roll_angle_deg: 2.0,
                    available: true,
                },
            ],
            horizon_s: 500.0,
            rng_seed: 0,
        }
    }

    fn assignment(
        inst: &Instance,
        t: TargetId,
        k: OrbitId,
        fraction: f64,
    ) -> crate::model::ObservationAssignment {
        let idx = InstanceIndex::new(inst).unwrap();
        assignment_for_fraction(
            idx.window(t, k).unwrap(),
            idx.target(t).unwrap(),
            idx.orbit(k).unwrap(),
            fraction,
        )
    }

    fn with_ledgers(inst: &Instance, mut s: Schedule) -> Schedule {
        let idx = InstanceIndex::new(inst).unwrap();
        let orbits: Vec<OrbitId> = s.assignments_by_orbit.keys().copied().collect();
        for k in orbits {
            let orbit = idx.orbit(k).unwrap();
            let (m, e) = crate::model::orbit_resource_usage(
                orbit,
                |tid| idx.target(tid).unwrap().obs_duration_s,
                &s.assignments_by_orbit[&k],
            );
            s.memory_used_mb.insert(k, m);
            s.energy_used_j.insert(k, e);
        }
        s
    }

    #[test]
    fn empty_schedule_is_feasible() {
        let inst = instance();
        let report = validate_schedule(&inst, &Schedule::new()).unwrap();
        assert!(report.is_empty());
    }

    #[test]
    fn duplicate_target_across_orbits_is_reported() {
        let inst = instance();
        let mut s = Schedule::new();
        s.assignments_by_orbit
            .insert(1, vec![assignment(&inst, 1, 1, 0.5)]);
        s.assignments_by_orbit
            .insert(2, vec![assignment(&inst, 1, 2, 0.5)]);
        let s = with_ledgers(&inst, s);
        let report = validate_schedule(&inst, &s).unwrap();
        assert_eq!(
            report.violations,
            vec![Violation::DuplicateTarget {
                target_id: 1,
                orbit_ids: vec![1, 2]
            }]
        );
    }

    #[test]
    fn transition_overlap_reports_the_margin() {
        let inst = instance();
        // target 1 at fraction 0.5: starts 40, ends 60, pitch 0
        // target 2 at fraction 0:   starts 50, ends 70, pitch 24
        // transition = 24/3 + 10 = 18 s, so overlap = 60 + 18 - 50 = 28 s
        let a = assignment(&inst, 1, 1, 0.5);
        let b = assignment(&inst, 2, 1, 0.0);
        let mut s = Schedule::new();
        s.assignments_by_orbit.insert(1, vec![a, b]);
        let s = with_ledgers(&inst, s);
        let report = validate_schedule(&inst, &s).unwrap();
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::TransitionOverlap { orbit_id: 1, from_target: 1, to_target: 2, overlap_s }
                if (overlap_s - 28.0).abs() < 1e-9
        )), "report: {report}");
    }

    #[test]
    fn unknown_ids_are_hard_errors() {
        let inst = instance();
        let mut a = assignment(&inst, 1, 1, 0.5);
        a.target_id = 77;
        let mut s = Schedule::new();
        s.assignments_by_orbit.insert(1, vec![a]);
        assert_eq!(
            validate_schedule(&inst, &s).unwrap_err(),
            ModelError::UnknownTarget(77)
        );
    }

    #[test]
    fn ledger_mismatch_is_reported() {
        let inst = instance();
        let mut s = Schedule::new();
        s.assignments_by_orbit
            .insert(1, vec![assignment(&inst, 1, 1, 0.5)]);
        let mut s = with_ledgers(&inst, s);
        s.memory_used_mb.insert(1, 1.0);
        let report = validate_schedule(&inst, &s).unwrap();
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::LedgerMismatch {
                resource: ResourceKind::Memory,
                ..
            }
        )));
    }

    #[test]
    fn capacity_violations_are_reported() {
        let mut inst = instance();
        inst.orbits[0].memory_capacity_mb = 1500.0; // one 20 s observation = 2000 MB
        let mut s = Schedule::new();
        s.assignments_by_orbit
            .insert(1, vec![assignment(&inst, 1, 1, 0.5)]);
        let s = with_ledgers(&inst, s);
        let report = validate_schedule(&inst, &s).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::MemoryExceeded { orbit_id: 1, .. })));
    }

    /// Each kind of record tampering must surface as its own violation.
    #[test]
    fn tampered_assignments_are_caught() {
        let inst = instance();
        let check = |tamper: &dyn Fn(&mut crate::model::ObservationAssignment),
                     expect: &dyn Fn(&Violation) -> bool,
                     what: &str| {
            let mut a = assignment(&inst, 1, 1, 0.5);
            tamper(&mut a);
            let mut s = Schedule::new();
            s.assignments_by_orbit.insert(1, vec![a]);
            let s = with_ledgers(&inst, s);
            let report = validate_schedule(&inst, &s).unwrap();
            assert!(report.violations.iter().any(expect), "{what}: {report}");
        };

        check(
            &|a| a.start_s += 1.0,
            &|v| matches!(v, Violation::TimingMismatch { .. }),
            "shifted start",
        );
        check(
            &|a| a.end_s += 3.0,
            &|v| matches!(v, Violation::DurationMismatch { .. }),
            "stretched end",
        );
        check(
            &|a| a.pitch_deg += 0.5,
            &|v| matches!(v, Violation::AttitudeMismatch { .. }),
            "wrong pitch",
        );
        check(
            &|a| {
                // consistent timing for fraction 1.2, but outside the window:
                // start moves from 0.5 * 80 to 1.2 * 80
                a.start_fraction = 1.2;
                a.start_s += 0.7 * 80.0;
                a.end_s += 0.7 * 80.0;
            },
            &|v| matches!(v, Violation::OutsideWindow { .. }),
            "past the window end",
        );
        check(
            &|a| {
                a.pitch_deg = 31.0;
                a.roll_deg = -31.0;
            },
            &|v| matches!(v, Violation::AttitudeEnvelope { .. }),
            "outside the envelope",
        );
    }

    #[test]
    fn out_of_order_sequences_are_caught() {
        let inst = instance();
        let a = assignment(&inst, 1, 1, 0.5); // starts 40
        let b = assignment(&inst, 2, 1, 1.0); // starts 130
        let mut s = Schedule::new();
        s.assignments_by_orbit.insert(1, vec![b, a]);
        let s = with_ledgers(&inst, s);
        let report = validate_schedule(&inst, &s).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::OutOfOrder { orbit_id: 1, position: 1 })));
    }

    #[test]
    fn missing_window_is_a_violation_not_an_error() {
        let inst = instance();
        // target 2 has no window on orbit 2; forge an assignment there
        let mut a = assignment(&inst, 2, 1, 0.5);
        a.orbit_id = 2;
        let mut s = Schedule::new();
        s.assignments_by_orbit.insert(2, vec![a]);
        let s = with_ledgers(&inst, s);
        let report = validate_schedule(&inst, &s).unwrap();
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::WindowUnavailable { target_id: 2, orbit_id: 2 }
        )));
    }
}
