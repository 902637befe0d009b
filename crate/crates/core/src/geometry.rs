//! Attitude-angle model, time-dependent transition time with stabilization
//! steps, and maneuver energy.
//!
//! The roll angle is constant over a visible window (cross-track geometry
//! does not change much during a pass); the pitch angle is linear in the
//! observation midpoint: `+max_pitch` when imaging at the window start
//! (target ahead), `-max_pitch` at the window end (target behind).

use core::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{
    Instance, InstanceIndex, ObservationAssignment, OrbitResource, Target, VisibleWindow,
    TIME_TOLERANCE_S,
};
use crate::num;

/// Imaging attitude on the pitch and roll axes, degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttitudePair {
    pub pitch_deg: f64,
    pub roll_deg: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeometryError {
    /// The observation interval sticks out of its visible window.
    OutsideWindow {
        obs_start_s: f64,
        obs_end_s: f64,
        window_start_s: f64,
        window_end_s: f64,
    },
    /// Transition time requested between assignments on different orbits.
    OrbitMismatch {
        a: u32,
        b: u32,
    },
    UnknownOrbit(u32),
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::OutsideWindow {
                obs_start_s,
                obs_end_s,
                window_start_s,
                window_end_s,
            } => {
                write!(
                    f,
                    "observation [{obs_start_s}, {obs_end_s}] s outside window \
                     [{window_start_s}, {window_end_s}] s"
                )
            }
            GeometryError::OrbitMismatch { a, b } => {
                write!(f, "assignments on different orbits {a} and {b}")
            }
            GeometryError::UnknownOrbit(id) => write!(f, "unknown orbit id {id}"),
        }
    }
}

impl core::error::Error for GeometryError {}

/// Fraction of the window covered up to the observation midpoint.
fn midpoint_fraction(window: &VisibleWindow, obs_start_s: f64, obs_duration_s: f64) -> f64 {
    (obs_start_s + 0.5 * obs_duration_s - window.start_s) / window.length_s()
}

/// Imaging attitude for an observation `[obs_start_s, obs_start_s + obs_duration_s]`
/// inside `window`. Errors when the interval is not contained in the window
/// (up to the global time tolerance).
pub fn attitude_at(
    window: &VisibleWindow,
    orbit: &OrbitResource,
    obs_start_s: f64,
    obs_duration_s: f64,
) -> Result<AttitudePair, GeometryError> {
    if obs_start_s < window.start_s - TIME_TOLERANCE_S
        || obs_start_s + obs_duration_s > window.end_s + TIME_TOLERANCE_S
    {
        return Err(GeometryError::OutsideWindow {
            obs_start_s,
            obs_end_s: obs_start_s + obs_duration_s,
            window_start_s: window.start_s,
            window_end_s: window.end_s,
        });
    }
    Ok(attitude_unchecked(
        window,
        orbit,
        obs_start_s,
        obs_duration_s,
    ))
}

pub(crate) fn attitude_unchecked(
    window: &VisibleWindow,
    orbit: &OrbitResource,
    obs_start_s: f64,
    obs_duration_s: f64,
) -> AttitudePair {
    let m = midpoint_fraction(window, obs_start_s, obs_duration_s);
    AttitudePair {
        pitch_deg: orbit.max_pitch_deg * (1.0 - 2.0 * m),
        roll_deg: window.roll_angle_deg,
    }
}

/// Build the assignment that images `target` in `window` at the given
/// normalized start fraction.
pub fn assignment_for_fraction(
    window: &VisibleWindow,
    target: &Target,
    orbit: &OrbitResource,
    fraction: f64,
) -> ObservationAssignment {
    let ot = target.obs_duration_s;
    let start_s = window.start_for_fraction(ot, fraction);
    let att = attitude_unchecked(window, orbit, start_s, ot);
    ObservationAssignment {
        target_id: window.target_id,
        orbit_id: window.orbit_id,
        start_fraction: fraction,
        start_s,
        end_s: start_s + ot,
        pitch_deg: att.pitch_deg,
        roll_deg: att.roll_deg,
    }
}

/// Settle time after a slew, stepped by the total angle change in degrees.
///
/// The step table is monotone and clamps at its largest entry for changes
/// beyond 60 degrees.
pub fn stabilization_time_s(total_angle_change_deg: f64) -> f64 {
    if total_angle_change_deg <= 15.0 {
        5.0
    } else if total_angle_change_deg <= 40.0 {
        10.0
    } else {
        15.0
    }
}

/// Slew-plus-settle time between two attitudes, seconds.
///
/// The slew runs both axes in parallel (max of the per-axis times); the
/// settle step depends on the summed angle change.
pub fn transition_time(from: &AttitudePair, to: &AttitudePair, orbit: &OrbitResource) -> f64 {
    let dp = num::abs(from.pitch_deg - to.pitch_deg);
    let dr = num::abs(from.roll_deg - to.roll_deg);
    let slew = f64::max(
        dp / orbit.pitch_rate_deg_per_s,
        dr / orbit.roll_rate_deg_per_s,
    );
    slew + stabilization_time_s(dp + dr)
}

/// Energy spent maneuvering between two attitudes, joules.
///
/// Sequence boundaries cost nothing: callers only charge this between two
/// real assignments.
pub fn maneuver_energy(from: &AttitudePair, to: &AttitudePair, orbit: &OrbitResource) -> f64 {
    let dp = num::abs(from.pitch_deg - to.pitch_deg);
    let dr = num::abs(from.roll_deg - to.roll_deg);
    (dp + dr) * orbit.maneuver_energy_j_per_deg
}

/// Transition time between two scheduled observations on the same orbit.
pub fn transition_time_between(
    a: &ObservationAssignment,
    b: &ObservationAssignment,
    instance: &Instance,
) -> Result<f64, GeometryError> {
    if a.orbit_id != b.orbit_id {
        return Err(GeometryError::OrbitMismatch {
            a: a.orbit_id,
            b: b.orbit_id,
        });
    }
    let index =
        InstanceIndex::new(instance).map_err(|_| GeometryError::UnknownOrbit(a.orbit_id))?;
    let orbit = index
        .orbit(a.orbit_id)
        .map_err(|_| GeometryError::UnknownOrbit(a.orbit_id))?;
    Ok(transition_time(&a.attitude(), &b.attitude(), orbit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn orbit() -> OrbitResource {
        OrbitResource {
            id: 1,
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

    fn window(start_s: f64, end_s: f64, roll: f64) -> VisibleWindow {
        VisibleWindow {
            target_id: 1,
            orbit_id: 1,
            start_s,
            end_s,
            success_prob: 1.0,
            roll_angle_deg: roll,
            available: true,
        }
    }

    #[test]
    fn pitch_is_zero_at_window_midpoint() {
        let w = window(0.0, 100.0, 0.0);
        let att = attitude_at(&w, &orbit(), 40.0, 20.0).unwrap();
        assert_eq!(att.pitch_deg, 0.0);
        assert_eq!(att.roll_deg, 0.0);
    }

    #[test]
    fn pitch_hits_max_at_window_start() {
        let w = window(0.0, 100.0, 3.5);
        let att = attitude_at(&w, &orbit(), 0.0, 0.0).unwrap();
        assert_eq!(att.pitch_deg, 30.0);
        assert_eq!(att.roll_deg, 3.5);
    }

    #[test]
    fn pitch_linear_model_hand_values() {
        let w = window(0.0, 100.0, 0.0);
        // midpoint fraction 0.5 -> 0 degrees
        assert_eq!(
            attitude_at(&w, &orbit(), 40.0, 20.0).unwrap().pitch_deg,
            0.0
        );
        // midpoint fraction 0.1 -> 30 * 0.8 = 24 degrees
        assert_eq!(
            attitude_at(&w, &orbit(), 0.0, 20.0).unwrap().pitch_deg,
            24.0
        );
    }

    #[test]
    fn attitude_rejects_out_of_window_observation() {
        let w = window(0.0, 100.0, 0.0);
        assert!(attitude_at(&w, &orbit(), 90.0, 20.0).is_err());
        assert!(attitude_at(&w, &orbit(), -1.0, 20.0).is_err());
    }

    #[test]
    fn transition_floor_is_the_settle_time() {
        let a = AttitudePair {
            pitch_deg: 12.0,
            roll_deg: -4.0,
        };
        assert_eq!(transition_time(&a, &a, &orbit()), 5.0);
    }

    #[test]
    fn transition_hand_values() {
        let o = orbit();
        // 60 deg pitch swing at 3 deg/s: 20 s slew, total change 60 -> 15 s settle
        let a = AttitudePair {
            pitch_deg: 30.0,
            roll_deg: 0.0,
        };
        let b = AttitudePair {
            pitch_deg: -30.0,
            roll_deg: 0.0,
        };
        assert_eq!(transition_time(&a, &b, &o), 35.0);
        // (10, 5) -> (0, 0): slew max(10/3, 5/3), total 15 -> 5 s settle
        let a = AttitudePair {
            pitch_deg: 10.0,
            roll_deg: 5.0,
        };
        let b = AttitudePair {
            pitch_deg: 0.0,
            roll_deg: 0.0,
        };
        let expected = 10.0 / 3.0 + 5.0;
        assert!((transition_time(&a, &b, &o) - expected).abs() < 1e-12);
    }

    #[test]
    fn settle_steps_at_exact_boundaries() {
        assert_eq!(stabilization_time_s(15.0), 5.0);
        assert_eq!(stabilization_time_s(15.0 + 1e-9), 10.0);
        assert_eq!(stabilization_time_s(40.0), 10.0);
        assert_eq!(stabilization_time_s(40.0 + 1e-9), 15.0);
        assert_eq!(stabilization_time_s(60.0), 15.0);
        // beyond the table the settle time stays clamped
        assert_eq!(stabilization_time_s(120.0), 15.0);
    }

    #[test]
    fn maneuver_energy_hand_value() {
        let o = orbit();
        let a = AttitudePair {
            pitch_deg: 10.0,
            roll_deg: 5.0,
        };
        let b = AttitudePair {
            pitch_deg: 0.0,
            roll_deg: 0.0,
        };
        assert_eq!(maneuver_energy(&a, &b, &o), 15_000.0);
        assert_eq!(maneuver_energy(&a, &a, &o), 0.0);
    }

    #[test]
    fn transition_between_assignments() {
        let o = orbit();
        let targets = vec![
            Target {
                id: 1,
                latitude_deg: 0.0,
                longitude_deg: 0.0,
                profit: 1.0,
                obs_duration_s: 20.0,
            },
            Target {
                id: 2,
                latitude_deg: 0.0,
                longitude_deg: 1.0,
                profit: 1.0,
                obs_duration_s: 20.0,
            },
        ];
        let windows = vec![window(0.0, 100.0, 0.0), {
            let mut w = window(50.0, 150.0, 0.0);
            w.target_id = 2;
            w
        }];
        let inst = Instance {
            targets: targets.clone(),
            orbits: vec![o.clone()],
            windows: windows.clone(),
            horizon_s: 200.0,
            rng_seed: 0,
        };
        // a at midpoint (pitch 0), b at fraction 0 (midpoint fraction 0.1 -> pitch 24)
        let a = assignment_for_fraction(&windows[0], &targets[0], &o, 0.5);
        let b = assignment_for_fraction(&windows[1], &targets[1], &o, 0.0);
        // slew 24/3 = 8 s, total change 24 -> 10 s settle
        let t = transition_time_between(&a, &b, &inst).unwrap();
        assert!((t - 18.0).abs() < 1e-12);
        // symmetric in its endpoints
        assert_eq!(t, transition_time_between(&b, &a, &inst).unwrap());
    }

    proptest! {
        #[test]
        fn transition_symmetric_and_bounded(
            p1 in -30.0..30.0f64, r1 in -30.0..30.0f64,
            p2 in -30.0..30.0f64, r2 in -30.0..30.0f64,
        ) {
            let o = orbit();
            let a = AttitudePair { pitch_deg: p1, roll_deg: r1 };
            let b = AttitudePair { pitch_deg: p2, roll_deg: r2 };
            let t_ab = transition_time(&a, &b, &o);
            let t_ba = transition_time(&b, &a, &o);
            prop_assert_eq!(t_ab, t_ba);
            prop_assert!(t_ab >= 5.0);
            // within the +/-30 deg envelope: slew <= 60/3, settle <= 15
            prop_assert!(t_ab <= 60.0 / 3.0 + 15.0);
            let e_ab = maneuver_energy(&a, &b, &o);
            prop_assert_eq!(e_ab, maneuver_energy(&b, &a, &o));
            prop_assert!(e_ab >= 0.0);
        }

        #[test]
        fn settle_jumps_only_at_15_and_40(g in 0.0..120.0f64) {
            // scan a small neighbourhood of g; a jump must straddle 15 or 40
            let h = 1e-7;
            let lo = stabilization_time_s(g - h);
            let hi = stabilization_time_s(g + h);
            if lo != hi {
                prop_assert!((g - 15.0).abs() <= h * 2.0 || (g - 40.0).abs() <= h * 2.0);
            }
        }
    }

    #[test]
    fn maneuver_energy_additive_in_axis_changes() {
        let o = orbit();
        let base = AttitudePair {
            pitch_deg: 0.0,
            roll_deg: 0.0,
        };
        let p = AttitudePair {
            pitch_deg: 7.0,
            roll_deg: 0.0,
        };
        let r = AttitudePair {
            pitch_deg: 0.0,
            roll_deg: 11.0,
        };
        let both = AttitudePair {
            pitch_deg: 7.0,
            roll_deg: 11.0,
        };
        assert_eq!(
            maneuver_energy(&base, &both, &o),
            maneuver_energy(&base, &p, &o) + maneuver_energy(&base, &r, &o)
        );
    }
}
