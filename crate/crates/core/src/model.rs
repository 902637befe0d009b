//! Domain records shared by every other module.
//!
//! All time values are mission-clock seconds from the start of the planning
//! horizon; angles are degrees; memory is MB and energy is joules.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::AttitudePair;

/// Absolute tolerance for time-constraint checks, in seconds.
pub const TIME_TOLERANCE_S: f64 = 1e-6;

/// Relative tolerance for resource (memory/energy) checks.
pub const RESOURCE_RELATIVE_TOLERANCE: f64 = 1e-9;

pub type TargetId = u32;
pub type OrbitId = u32;

/// A point target on the ground.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub id: TargetId,
    /// Geodetic latitude in [-90, 90].
    pub latitude_deg: f64,
    /// Longitude in [-180, 180).
    pub longitude_deg: f64,
    /// Observation profit, strictly positive.
    pub profit: f64,
    /// Required imaging duration, strictly positive seconds.
    pub obs_duration_s: f64,
}

/// One orbital resource: a satellite pass budgeted with its own memory and
/// energy capacity and attitude envelope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitResource {
    pub id: OrbitId,
    pub memory_capacity_mb: f64,
    pub energy_capacity_j: f64,
    /// Memory consumed per second of imaging.
    pub memory_rate_mb_per_s: f64,
    /// Energy consumed per second of imaging.
    pub imaging_energy_j_per_s: f64,
    /// Energy consumed per degree of attitude maneuver.
    pub maneuver_energy_j_per_deg: f64,
    pub pitch_rate_deg_per_s: f64,
    pub roll_rate_deg_per_s: f64,
    pub max_pitch_deg: f64,
    pub max_roll_deg: f64,
}

/// A visible time window: the interval during which a target can be imaged
/// from an orbit, together with its cloud-free success probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisibleWindow {
    pub target_id: TargetId,
    pub orbit_id: OrbitId,
    /// Window start, seconds.
    pub start_s: f64,
    /// Window end, seconds.
    pub end_s: f64,
    /// Probability that the observation succeeds (no cloud occlusion).
    pub success_prob: f64,
    /// Cross-track look angle, constant over the window.
    pub roll_angle_deg: f64,
    /// Whether the window may be used at all.
    pub available: bool,
}

impl VisibleWindow {
    /// Length of the window in seconds.
    pub fn length_s(&self) -> f64 {
        self.end_s - self.start_s
    }

    /// Length of the feasible start interval for an observation of
    /// `obs_duration_s`: `end - obs_duration - start`.
    pub fn start_span_s(&self, obs_duration_s: f64) -> f64 {
        self.end_s - obs_duration_s - self.start_s
    }

    /// Observation start time for a normalized start fraction in [0, 1].
    ///
    /// Fraction 0 starts at the window start, fraction 1 as late as the
    /// window still fits the full observation.
    pub fn start_for_fraction(&self, obs_duration_s: f64, fraction: f64) -> f64 {
        fraction * self.start_span_s(obs_duration_s) + self.start_s
    }
}

/// One scheduled observation: the chosen sub-interval of a visible window,
/// with the attitude the satellite holds while imaging.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationAssignment {
    pub target_id: TargetId,
    pub orbit_id: OrbitId,
    /// Normalized start position within the feasible start interval, in [0, 1].
    pub start_fraction: f64,
    pub start_s: f64,
    pub end_s: f64,
    pub pitch_deg: f64,
    pub roll_deg: f64,
}

impl ObservationAssignment {
    pub fn attitude(&self) -> AttitudePair {
        AttitudePair {
            pitch_deg: self.pitch_deg,
            roll_deg: self.roll_deg,
        }
    }
}

/// A full scheduling decision: per-orbit time-ordered assignment sequences
/// plus per-orbit resource ledgers.
///
/// Canonical form: an orbit id is present in `assignments_by_orbit` (and in
/// the ledgers) iff it carries at least one assignment.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub assignments_by_orbit: BTreeMap<OrbitId, Vec<ObservationAssignment>>,
    pub memory_used_mb: BTreeMap<OrbitId, f64>,
    pub energy_used_j: BTreeMap<OrbitId, f64>,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments_by_orbit.is_empty()
    }

    /// Total number of assignments across all orbits.
    pub fn assignment_count(&self) -> usize {
        self.assignments_by_orbit.values().map(Vec::len).sum()
    }

    /// Iterate all assignments, orbit by orbit in id order.
    pub fn iter_assignments(&self) -> impl Iterator<Item = &ObservationAssignment> {
        self.assignments_by_orbit.values().flatten()
    }

    pub fn contains_target(&self, target_id: TargetId) -> bool {
        self.find_target(target_id).is_some()
    }

    /// Locate a target's assignment as (orbit id, position in sequence).
    pub fn find_target(&self, target_id: TargetId) -> Option<(OrbitId, usize)> {
        for (&orbit_id, seq) in &self.assignments_by_orbit {
            if let Some(pos) = seq.iter().position(|a| a.target_id == target_id) {
                return Some((orbit_id, pos));
            }
        }
        None
    }

    pub fn memory_used(&self, orbit_id: OrbitId) -> f64 {
        self.memory_used_mb.get(&orbit_id).copied().unwrap_or(0.0)
    }

    pub fn energy_used(&self, orbit_id: OrbitId) -> f64 {
        self.energy_used_j.get(&orbit_id).copied().unwrap_or(0.0)
    }

    /// Orbit sequence, empty slice when the orbit carries nothing.
    pub fn orbit_sequence(&self, orbit_id: OrbitId) -> &[ObservationAssignment] {
        self.assignments_by_orbit
            .get(&orbit_id)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

/// The full problem input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub targets: Vec<Target>,
    pub orbits: Vec<OrbitResource>,
    pub windows: Vec<VisibleWindow>,
    pub horizon_s: f64,
    pub rng_seed: u64,
}

/// Hard errors: malformed inputs, as opposed to schedule infeasibility.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelError {
    UnknownTarget(TargetId),
    UnknownOrbit(OrbitId),
    UnknownWindow {
        target_id: TargetId,
        orbit_id: OrbitId,
    },
    DuplicateTargetId(TargetId),
    DuplicateOrbitId(OrbitId),
    DuplicateWindow {
        target_id: TargetId,
        orbit_id: OrbitId,
    },
    WindowTooShort {
        target_id: TargetId,
        orbit_id: OrbitId,
        length_s: f64,
        obs_duration_s: f64,
    },
    NonPositiveRate {
        orbit_id: OrbitId,
    },
    NegativeCapacity {
        orbit_id: OrbitId,
    },
    InvalidProbability {
        target_id: TargetId,
        orbit_id: OrbitId,
        value: f64,
    },
    NonPositiveDuration {
        target_id: TargetId,
    },
    NonPositiveProfit {
        target_id: TargetId,
    },
    TargetNotAssigned(TargetId),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::UnknownTarget(id) => write!(f, "unknown target id {id}"),
            ModelError::UnknownOrbit(id) => write!(f, "unknown orbit id {id}"),
            ModelError::UnknownWindow {
                target_id,
                orbit_id,
            } => {
                write!(
                    f,
                    "no visible window for target {target_id} on orbit {orbit_id}"
                )
            }
            ModelError::DuplicateTargetId(id) => write!(f, "duplicate target id {id}"),
            ModelError::DuplicateOrbitId(id) => write!(f, "duplicate orbit id {id}"),
            ModelError::DuplicateWindow {
                target_id,
                orbit_id,
            } => {
                write!(
                    f,
                    "duplicate window for target {target_id} on orbit {orbit_id}"
                )
            }
            ModelError::WindowTooShort {
                target_id,
                orbit_id,
                length_s,
                obs_duration_s,
            } => write!(
                f,
                "window for target {target_id} on orbit {orbit_id} is {length_s} s, \
                 shorter than the {obs_duration_s} s observation"
            ),
            ModelError::NonPositiveRate { orbit_id } => {
                write!(f, "orbit {orbit_id} has a non-positive attitude rate")
            }
            ModelError::NegativeCapacity { orbit_id } => {
                write!(
                    f,
                    "orbit {orbit_id} has a negative capacity or consumption rate"
                )
            }
            ModelError::InvalidProbability {
                target_id,
                orbit_id,
                value,
            } => write!(
                f,
                "success probability {value} for target {target_id} on orbit {orbit_id} \
                 is outside [0, 1]"
            ),
            ModelError::NonPositiveDuration { target_id } => {
                write!(
                    f,
                    "target {target_id} has a non-positive observation duration"
                )
            }
            ModelError::NonPositiveProfit { target_id } => {
                write!(f, "target {target_id} has a non-positive profit")
            }
            ModelError::TargetNotAssigned(id) => {
                write!(f, "target {id} is not assigned in the schedule")
            }
        }
    }
}

impl core::error::Error for ModelError {}

impl Instance {
    /// Check referential integrity and the per-record invariants.
    ///
    /// Loaders call this after deserialization; generators guarantee it by
    /// construction.
    pub fn validate(&self) -> Result<(), ModelError> {
        InstanceIndex::new(self).map(|_| ())
    }
}

/// Lookup structure over an [`Instance`]: id -> record and per-target /
/// per-orbit window lists. Building it validates the instance.
#[derive(Debug)]
pub struct InstanceIndex<'a> {
    instance: &'a Instance,
    target_pos: BTreeMap<TargetId, usize>,
    orbit_pos: BTreeMap<OrbitId, usize>,
    window_pos: BTreeMap<(TargetId, OrbitId), usize>,
    windows_of_target: BTreeMap<TargetId, Vec<usize>>,
    windows_of_orbit: BTreeMap<OrbitId, Vec<usize>>,
}

impl<'a> InstanceIndex<'a> {
    pub fn new(instance: &'a Instance) -> Result<Self, ModelError> {
        let mut target_pos = BTreeMap::new();
        for (i, t) in instance.targets.iter().enumerate() {
            if target_pos.insert(t.id, i).is_some() {
                return Err(ModelError::DuplicateTargetId(t.id));
            }
            if !(t.obs_duration_s > 0.0) {
                return Err(ModelError::NonPositiveDuration { target_id: t.id });
            }
            if !(t.profit > 0.0) {
                return Err(ModelError::NonPositiveProfit { target_id: t.id });
            }
        }
        let mut orbit_pos = BTreeMap::new();
        for (i, o) in instance.orbits.iter().enumerate() {
            if orbit_pos.insert(o.id, i).is_some() {
                return Err(ModelError::DuplicateOrbitId(o.id));
            }
            if !(o.pitch_rate_deg_per_s > 0.0) || !(o.roll_rate_deg_per_s > 0.0) {
                return Err(ModelError::NonPositiveRate { orbit_id: o.id });
            }
            let caps = [
                o.memory_capacity_mb,
                o.energy_capacity_j,
                o.memory_rate_mb_per_s,
                o.imaging_energy_j_per_s,
                o.maneuver_energy_j_per_deg,
                o.max_pitch_deg,
                o.max_roll_deg,
            ];
            if caps.iter().any(|c| !(*c >= 0.0)) {
                return Err(ModelError::NegativeCapacity { orbit_id: o.id });
            }
        }
        let mut window_pos = BTreeMap::new();
        let mut windows_of_target: BTreeMap<TargetId, Vec<usize>> = BTreeMap::new();
        let mut windows_of_orbit: BTreeMap<OrbitId, Vec<usize>> = BTreeMap::new();
        for (i, w) in instance.windows.iter().enumerate() {
            let t = *target_pos
                .get(&w.target_id)
                .ok_or(ModelError::UnknownTarget(w.target_id))?;
            if !orbit_pos.contains_key(&w.orbit_id) {
                return Err(ModelError::UnknownOrbit(w.orbit_id));
            }
            if window_pos.insert((w.target_id, w.orbit_id), i).is_some() {
                return Err(ModelError::DuplicateWindow {
                    target_id: w.target_id,
                    orbit_id: w.orbit_id,
                });
            }
            let obs = instance.targets[t].obs_duration_s;
            if w.length_s() < obs {
                return Err(ModelError::WindowTooShort {
                    target_id: w.target_id,
                    orbit_id: w.orbit_id,
                    length_s: w.length_s(),
                    obs_duration_s: obs,
                });
            }
            if !(0.0..=1.0).contains(&w.success_prob) {
                return Err(ModelError::InvalidProbability {
                    target_id: w.target_id,
                    orbit_id: w.orbit_id,
                    value: w.success_prob,
                });
            }
            windows_of_target.entry(w.target_id).or_default().push(i);
            windows_of_orbit.entry(w.orbit_id).or_default().push(i);
        }
        Ok(Self {
            instance,
            target_pos,
            orbit_pos,
            window_pos,
            windows_of_target,
            windows_of_orbit,
        })
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn target(&self, id: TargetId) -> Result<&'a Target, ModelError> {
        self.target_pos
            .get(&id)
            .map(|&i| &self.instance.targets[i])
            .ok_or(ModelError::UnknownTarget(id))
    }

    pub fn orbit(&self, id: OrbitId) -> Result<&'a OrbitResource, ModelError> {
        self.orbit_pos
            .get(&id)
            .map(|&i| &self.instance.orbits[i])
            .ok_or(ModelError::UnknownOrbit(id))
    }

    pub fn window(&self, target_id: TargetId, orbit_id: OrbitId) -> Option<&'a VisibleWindow> {
        self.window_pos
            .get(&(target_id, orbit_id))
            .map(|&i| &self.instance.windows[i])
    }

    pub fn windows_of_target(
        &self,
        target_id: TargetId,
    ) -> impl Iterator<Item = &'a VisibleWindow> + '_ {
        self.windows_of_target
            .get(&target_id)
            .into_iter()
            .flatten()
            .map(|&i| &self.instance.windows[i])
    }

    pub fn windows_of_orbit(
        &self,
        orbit_id: OrbitId,
    ) -> impl Iterator<Item = &'a VisibleWindow> + '_ {
        self.windows_of_orbit
            .get(&orbit_id)
            .into_iter()
            .flatten()
            .map(|&i| &self.instance.windows[i])
    }
}

/// Total profit of the assigned targets (the deterministic objective).
///
/// Assignment order is irrelevant. Panics if the schedule references a
/// target the instance does not contain; validate first for untrusted input.
pub fn schedule_profit_deterministic(instance: &Instance, schedule: &Schedule) -> f64 {
    let by_id: BTreeMap<TargetId, f64> =
        instance.targets.iter().map(|t| (t.id, t.profit)).collect();
    schedule
        .iter_assignments()
        .map(|a| {
            *by_id
                .get(&a.target_id)
                .expect("schedule references a target missing from the instance")
        })
        .sum()
}

/// Recompute an orbit's (memory, energy) usage from its assignment sequence.
///
/// Imaging charges `obs_duration * rate` per assignment; maneuvers charge
/// per-degree energy between consecutive assignments only, so the sequence
/// boundaries cost nothing.
pub fn orbit_resource_usage(
    orbit: &OrbitResource,
    targets_duration: impl Fn(TargetId) -> f64,
    sequence: &[ObservationAssignment],
) -> (f64, f64) {
    let mut memory = 0.0;
    let mut energy = 0.0;
    for a in sequence {
        let ot = targets_duration(a.target_id);
        memory += ot * orbit.memory_rate_mb_per_s;
        energy += ot * orbit.imaging_energy_j_per_s;
    }
    for pair in sequence.windows(2) {
        energy += crate::geometry::maneuver_energy(&pair[0].attitude(), &pair[1].attitude(), orbit);
    }
    (memory, energy)
}
