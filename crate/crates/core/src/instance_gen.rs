//! Seeded benchmark-instance generation: target placement, two-body
//! propagation, visibility-window extraction and success-probability
//! assignment.
//!
//! Geometric mode propagates each satellite over the horizon, finds the
//! times when a target sits inside the pitch/roll look-angle envelope with
//! the sun above its horizon, and keeps one window per (target, orbit).
//! Synthetic mode skips propagation and draws windows directly; it is the
//! workhorse for unit tests and desk-scale experiments.
//!
//! The Earth model is a sphere with uniform rotation and a low-precision
//! analytic solar ephemeris, which is ample for a 0-degree solar-altitude
//! threshold.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Instance, ModelError, OrbitId, OrbitResource, Target, TargetId, VisibleWindow};
use crate::num;

pub const EARTH_RADIUS_KM: f64 = 6378.137;
pub const EARTH_MU_KM3_PER_S2: f64 = 398600.4418;
/// Sidereal rotation rate, rad/s.
pub const EARTH_ROTATION_RAD_PER_S: f64 = 7.2921159e-5;

const DEG: f64 = core::f64::consts::PI / 180.0;

/// Classical orbital elements at epoch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitalElements {
    pub semi_major_axis_km: f64,
    pub eccentricity: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub arg_perigee_deg: f64,
    pub mean_anomaly_deg: f64,
}

/// Calendar UTC epoch of mission-clock zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Epoch {
    pub year: i32,
    pub month: u32,
    pub day: u32,
    pub hour: u32,
    pub minute: u32,
    pub second: f64,
}

impl Default for Epoch {
    fn default() -> Self {
        Self {
            year: 2017,
            month: 1,
            day: 1,
            hour: 0,
            minute: 0,
            second: 0.0,
        }
    }
}

impl Epoch {
    /// Julian date of this UTC instant.
    pub fn julian_day(&self) -> f64 {
        // Fliegel-Van Flandern day number; the divisions truncate toward zero
        let (y, m, d) = (self.year as i64, self.month as i64, self.day as i64);
        let a = (m - 14) / 12;
        let jdn = (1461 * (y + 4800 + a)) / 4 + (367 * (m - 2 - 12 * a)) / 12
            - (3 * ((y + 4900 + a) / 100)) / 4
            + d
            - 32075;
        let day_fraction =
            (self.hour as f64 + self.minute as f64 / 60.0 + self.second / 3600.0) / 24.0;
        jdn as f64 - 0.5 + day_fraction
    }
}

/// A latitude/longitude box with a target count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lat_min_deg: f64,
    pub lat_max_deg: f64,
    pub lon_min_deg: f64,
    pub lon_max_deg: f64,
    pub count: usize,
}

/// Direct window sampling for synthetic instances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticParams {
    /// Probability that a (target, orbit) pair gets a window at all.
    pub window_probability: f64,
    pub window_length_range_s: (f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenMode {
    Geometric,
    Synthetic(SyntheticParams),
}

/// One orbital resource to generate: its budget plus, in geometric mode,
/// the satellite elements that fly it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSpec {
    pub resource: OrbitResource,
    pub elements: Option<OrbitalElements>,
}

/// Everything the generator needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    /// Targets drawn worldwide (latitude 60S-60N).
    pub n_world: usize,
    pub regions: Vec<Region>,
    pub horizon_s: f64,
    pub epoch: Epoch,
    /// Inclusive integer profit range.
    pub profit_range: (u32, u32),
    pub obs_duration_range_s: (f64, f64),
    pub prob_range: (f64, f64),
    /// Propagation/visibility scan step, geometric mode.
    pub step_s: f64,
    pub mode: GenMode,
    pub orbits: Vec<OrbitSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GenError {
    InvalidSpec(&'static str),
    /// Geometric mode needs elements on every orbit.
    MissingElements {
        orbit_id: OrbitId,
    },
    /// Kepler's equation failed to converge (should not happen for e < 1).
    KeplerDivergence,
    Model(ModelError),
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::InvalidSpec(what) => write!(f, "invalid generation spec: {what}"),
            GenError::MissingElements { orbit_id } => {
                write!(
                    f,
                    "orbit {orbit_id} has no orbital elements for geometric generation"
                )
            }
            GenError::KeplerDivergence => write!(f, "Kepler solve did not converge"),
            GenError::Model(e) => write!(f, "generated instance failed validation: {e}"),
        }
    }
}

impl core::error::Error for GenError {}

impl From<ModelError> for GenError {
    fn from(e: ModelError) -> Self {
        GenError::Model(e)
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<(), GenError> {
        if !(self.horizon_s > 0.0) {
            return Err(GenError::InvalidSpec("horizon must be positive"));
        }
        if !(self.step_s > 0.0) {
            return Err(GenError::InvalidSpec("step must be positive"));
        }
        for r in &self.regions {
            if r.lat_min_deg < -90.0 || r.lat_max_deg > 90.0 || r.lat_min_deg > r.lat_max_deg {
                return Err(GenError::InvalidSpec("region latitude box out of range"));
            }
            if r.lon_min_deg > r.lon_max_deg {
                return Err(GenError::InvalidSpec("region longitude box inverted"));
            }
        }
        if self.profit_range.0 < 1 || self.profit_range.0 > self.profit_range.1 {
            return Err(GenError::InvalidSpec(
                "profit range must satisfy 1 <= lo <= hi",
            ));
        }
        if !(self.obs_duration_range_s.0 > 0.0)
            || self.obs_duration_range_s.0 > self.obs_duration_range_s.1
        {
            return Err(GenError::InvalidSpec("observation duration range invalid"));
        }
        if !(0.0..=1.0).contains(&self.prob_range.0)
            || !(0.0..=1.0).contains(&self.prob_range.1)
            || self.prob_range.0 > self.prob_range.1
        {
            return Err(GenError::InvalidSpec("probability range invalid"));
        }
        if let GenMode::Synthetic(p) = &self.mode {
            if !(0.0..=1.0).contains(&p.window_probability) {
                return Err(GenError::InvalidSpec("window probability outside [0, 1]"));
            }
            if !(p.window_length_range_s.0 > 0.0)
                || p.window_length_range_s.0 > p.window_length_range_s.1
            {
                return Err(GenError::InvalidSpec("window length range invalid"));
            }
        }
        if matches!(self.mode, GenMode::Geometric) {
            for o in &self.orbits {
                if o.elements.is_none() {
                    return Err(GenError::MissingElements {
                        orbit_id: o.resource.id,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Orbit budget with the standard sensor/actuator rates.
pub fn orbit_resource(
    id: OrbitId,
    memory_capacity_mb: f64,
    energy_capacity_j: f64,
) -> OrbitResource {
    OrbitResource {
        id,
        memory_capacity_mb,
        energy_capacity_j,
        memory_rate_mb_per_s: 100.0,
        imaging_energy_j_per_s: 500.0,
        maneuver_energy_j_per_deg: 1000.0,
        pitch_rate_deg_per_s: 3.0,
        roll_rate_deg_per_s: 3.0,
        max_pitch_deg: 30.0,
        max_roll_deg: 30.0,
    }
}

/// `count` element-free orbit specs for synthetic generation, ids 1..=count.
pub fn synthetic_orbits(
    count: usize,
    memory_capacity_mb: f64,
    energy_capacity_j: f64,
) -> Vec<OrbitSpec> {
    (1..=count as u32)
        .map(|id| OrbitSpec {
            resource: orbit_resource(id, memory_capacity_mb, energy_capacity_j),
            elements: None,
        })
        .collect()
}

/// The built-in four-satellite sun-synchronous constellation used by the
/// benchmark presets.
pub fn default_constellation() -> [OrbitalElements; 4] {
    [
        OrbitalElements {
            semi_major_axis_km: 6903.673,
            eccentricity: 0.001655,
            inclination_deg: 97.5839,
            raan_deg: 97.8446,
            arg_perigee_deg: 50.5083,
            mean_anomaly_deg: 2.0288,
        },
        OrbitalElements {
            semi_major_axis_km: 6903.730,
            eccentricity: 0.001558,
            inclination_deg: 97.5310,
            raan_deg: 95.1761,
            arg_perigee_deg: 52.2620,
            mean_anomaly_deg: 31.4501,
        },
        OrbitalElements {
            semi_major_axis_km: 6909.065,
            eccentricity: 0.000997,
            inclination_deg: 97.5840,
            raan_deg: 93.1999,
            arg_perigee_deg: 254.4613,
            mean_anomaly_deg: 155.2256,
        },
        OrbitalElements {
            semi_major_axis_km: 6898.602,
            eccentricity: 0.001460,
            inclination_deg: 97.5825,
            raan_deg: 92.3563,
            arg_perigee_deg: 276.7332,
            mean_anomaly_deg: 140.1878,
        },
    ]
}

mod vec3 {
    pub type V3 = [f64; 3];

    pub fn dot(a: &V3, b: &V3) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    pub fn cross(a: &V3, b: &V3) -> V3 {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }

    pub fn sub(a: &V3, b: &V3) -> V3 {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }

    pub fn norm(a: &V3) -> f64 {
        super::num::sqrt(dot(a, a))
    }

    pub fn unit(a: &V3) -> V3 {
        let n = norm(a);
        [a[0] / n, a[1] / n, a[2] / n]
    }
}

use vec3::V3;

/// Uniform draws of world + region targets; profits are uniform integers,
/// durations uniform reals. Deterministic in the seed.
pub fn generate_targets(spec: &GenSpec, seed: u64) -> Vec<Target> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut targets =
        Vec::with_capacity(spec.n_world + spec.regions.iter().map(|r| r.count).sum::<usize>());
    let mut next_id: TargetId = 1;
    let draw = |rng: &mut ChaCha8Rng, lat: (f64, f64), lon: (f64, f64), id: TargetId| {
        let latitude_deg = rng.gen_range(lat.0..lat.1);
        let longitude_deg = rng.gen_range(lon.0..lon.1);
        let profit = rng.gen_range(spec.profit_range.0..=spec.profit_range.1) as f64;
        let obs_duration_s =
            rng.gen_range(spec.obs_duration_range_s.0..=spec.obs_duration_range_s.1);
        Target {
            id,
            latitude_deg,
            longitude_deg,
            profit,
            obs_duration_s,
        }
    };
    for _ in 0..spec.n_world {
        targets.push(draw(&mut rng, (-60.0, 60.0), (-180.0, 180.0), next_id));
        next_id += 1;
    }
    for region in &spec.regions {
        for _ in 0..region.count {
            targets.push(draw(
                &mut rng,
                (region.lat_min_deg, region.lat_max_deg),
                (region.lon_min_deg, region.lon_max_deg),
                next_id,
            ));
            next_id += 1;
        }
    }
    targets
}

/// Solve Kepler's equation `E - e sin E = M` by Newton iteration to 1e-10
/// rad on the residual.
fn solve_kepler(mean_anomaly_rad: f64, eccentricity: f64) -> Result<f64, GenError> {
    let m = num::rem_euclid(mean_anomaly_rad, 2.0 * core::f64::consts::PI);
    let mut e_anom = if eccentricity > 0.8 {
        core::f64::consts::PI
    } else {
        m
    };
    for _ in 0..50 {
        let residual = e_anom - eccentricity * num::sin(e_anom) - m;
        if num::abs(residual) <= 1e-10 {
            return Ok(e_anom);
        }
        e_anom -= residual / (1.0 - eccentricity * num::cos(e_anom));
    }
    Err(GenError::KeplerDivergence)
}

fn rot_z(v: &V3, angle_rad: f64) -> V3 {
    let (s, c) = (num::sin(angle_rad), num::cos(angle_rad));
    [v[0] * c - v[1] * s, v[0] * s + v[1] * c, v[2]]
}

fn rot_x(v: &V3, angle_rad: f64) -> V3 {
    let (s, c) = (num::sin(angle_rad), num::cos(angle_rad));
    [v[0], v[1] * c - v[2] * s, v[1] * s + v[2] * c]
}

/// Inertial position and velocity (km, km/s) at `t_s` past epoch.
pub fn propagate_inertial(elements: &OrbitalElements, t_s: f64) -> Result<(V3, V3), GenError> {
    let a = elements.semi_major_axis_km;
    let e = elements.eccentricity;
    if !(0.0..1.0).contains(&e) || a <= EARTH_RADIUS_KM {
        return Err(GenError::InvalidSpec(
            "elements must describe a closed orbit above the Earth",
        ));
    }
    let n = num::sqrt(EARTH_MU_KM3_PER_S2 / (a * a * a));
    let m = elements.mean_anomaly_deg * DEG + n * t_s;
    let e_anom = solve_kepler(m, e)?;
    let (sin_e, cos_e) = (num::sin(e_anom), num::cos(e_anom));
    let radius = a * (1.0 - e * cos_e);
    let sqrt_1me2 = num::sqrt(1.0 - e * e);
    // perifocal frame
    let pos_pf = [a * (cos_e - e), a * sqrt_1me2 * sin_e, 0.0];
    let v_scale = num::sqrt(EARTH_MU_KM3_PER_S2 * a) / radius;
    let vel_pf = [-v_scale * sin_e, v_scale * sqrt_1me2 * cos_e, 0.0];

    let to_eci = |v: &V3| {
        let v = rot_z(v, elements.arg_perigee_deg * DEG);
        let v = rot_x(&v, elements.inclination_deg * DEG);
        rot_z(&v, elements.raan_deg * DEG)
    };
    Ok((to_eci(&pos_pf), to_eci(&vel_pf)))
}

/// Greenwich sidereal angle at a Julian date, radians.
fn earth_rotation_angle_rad(jd: f64) -> f64 {
    let gmst_deg = 280.46061837 + 360.98564736629 * (jd - 2451545.0);
    num::rem_euclid(gmst_deg, 360.0) * DEG
}

/// Earth-fixed satellite position (km) at `t_s` past the epoch.
pub fn propagate(elements: &OrbitalElements, epoch: &Epoch, t_s: f64) -> Result<V3, GenError> {
    let (pos_eci, _) = propagate_inertial(elements, t_s)?;
    let theta = earth_rotation_angle_rad(epoch.julian_day()) + EARTH_ROTATION_RAD_PER_S * t_s;
    Ok(rot_z(&pos_eci, -theta))
}

/// Low-precision solar direction (unit vector, inertial frame) at a Julian
/// date; good to a few hundredths of a degree.
fn sun_direction_eci(jd: f64) -> V3 {
    let d = jd - 2451545.0;
    let mean_lon = num::rem_euclid(280.460 + 0.9856474 * d, 360.0) * DEG;
    let mean_anom = num::rem_euclid(357.528 + 0.9856003 * d, 360.0) * DEG;
    let ecliptic_lon =
        mean_lon + (1.915 * num::sin(mean_anom) + 0.020 * num::sin(2.0 * mean_anom)) * DEG;
    let obliquity = (23.439 - 0.0000004 * d) * DEG;
    [
        num::cos(ecliptic_lon),
        num::cos(obliquity) * num::sin(ecliptic_lon),
        num::sin(obliquity) * num::sin(ecliptic_lon),
    ]
}

fn target_ecef_unit(target: &Target) -> V3 {
    let lat = target.latitude_deg * DEG;
    let lon = target.longitude_deg * DEG;
    [
        num::cos(lat) * num::cos(lon),
        num::cos(lat) * num::sin(lon),
        num::sin(lat),
    ]
}

/// Along-track (pitch) and cross-track (roll) look angles from the satellite
/// toward a target, degrees, and the slant range (km).
fn look_angles(pos_eci: &V3, vel_eci: &V3, target_eci: &V3) -> (f64, f64, f64) {
    let los = vec3::sub(target_eci, pos_eci);
    let nadir = vec3::unit(&[-pos_eci[0], -pos_eci[1], -pos_eci[2]]);
    let r_hat = [-nadir[0], -nadir[1], -nadir[2]];
    let v_radial = vec3::dot(vel_eci, &r_hat);
    let along = vec3::unit(&vec3::sub(
        vel_eci,
        &[
            v_radial * r_hat[0],
            v_radial * r_hat[1],
            v_radial * r_hat[2],
        ],
    ));
    let cross = vec3::cross(&nadir, &along);
    let depth = vec3::dot(&los, &nadir);
    let pitch = num::atan2(vec3::dot(&los, &along), depth) / DEG;
    let roll = num::atan2(vec3::dot(&los, &cross), depth) / DEG;
    (pitch, roll, vec3::norm(&los))
}

struct OrbitTrack {
    jd0: f64,
    elements: OrbitalElements,
    /// Per step: inertial position, velocity, earth angle, and the ECEF
    /// sub-satellite unit vector for the coarse visibility prefilter.
    pos: Vec<V3>,
    vel: Vec<V3>,
    theta: Vec<f64>,
    sat_unit_ecef: Vec<V3>,
    cos_prefilter: f64,
}

impl OrbitTrack {
    fn build(
        elements: &OrbitalElements,
        epoch: &Epoch,
        horizon_s: f64,
        step_s: f64,
    ) -> Result<Self, GenError> {
        let jd0 = epoch.julian_day();
        let theta0 = earth_rotation_angle_rad(jd0);
        let steps = (horizon_s / step_s) as usize;
        let mut pos = Vec::with_capacity(steps + 1);
        let mut vel = Vec::with_capacity(steps + 1);
        let mut theta = Vec::with_capacity(steps + 1);
        let mut sat_unit_ecef = Vec::with_capacity(steps + 1);
        for j in 0..=steps {
            let t = j as f64 * step_s;
            let (p, v) = propagate_inertial(elements, t)?;
            let th = theta0 + EARTH_ROTATION_RAD_PER_S * t;
            sat_unit_ecef.push(vec3::unit(&rot_z(&p, -th)));
            pos.push(p);
            vel.push(v);
            theta.push(th);
        }
        // everything beyond the geometric horizon is invisible regardless of
        // the look-angle envelope
        let apoapsis = elements.semi_major_axis_km * (1.0 + elements.eccentricity);
        let horizon_angle = num::atan2(
            num::sqrt(apoapsis * apoapsis - EARTH_RADIUS_KM * EARTH_RADIUS_KM),
            EARTH_RADIUS_KM,
        );
        let cos_prefilter = num::cos(f64::min(horizon_angle + 0.01, core::f64::consts::PI));
        Ok(Self {
            jd0,
            elements: *elements,
            pos,
            vel,
            theta,
            sat_unit_ecef,
            cos_prefilter,
        })
    }

    /// Visibility predicate at an arbitrary time (used for endpoint
    /// refinement between scan samples).
    fn visible_at(
        &self,
        t_s: f64,
        target_unit: &V3,
        orbit: &OrbitResource,
    ) -> Result<bool, GenError> {
        let (p, v) = propagate_inertial(&self.elements, t_s)?;
        let theta = earth_rotation_angle_rad(self.jd0) + EARTH_ROTATION_RAD_PER_S * t_s;
        Ok(self.check(&p, &v, theta, t_s, target_unit, orbit))
    }

    fn check(
        &self,
        pos: &V3,
        vel: &V3,
        theta: f64,
        t_s: f64,
        target_unit: &V3,
        orbit: &OrbitResource,
    ) -> bool {
        let target_eci_unit = rot_z(target_unit, theta);
        let target_eci = [
            EARTH_RADIUS_KM * target_eci_unit[0],
            EARTH_RADIUS_KM * target_eci_unit[1],
            EARTH_RADIUS_KM * target_eci_unit[2],
        ];
        let (pitch, roll, _) = look_angles(pos, vel, &target_eci);
        if num::abs(pitch) > orbit.max_pitch_deg || num::abs(roll) > orbit.max_roll_deg {
            return false;
        }
        let sun = sun_direction_eci(self.jd0 + t_s / 86400.0);
        vec3::dot(&sun, &target_eci_unit) >= 0.0
    }
}

/// Extract visible windows for all targets against all element-bearing
/// orbits. One window per (target, orbit): the longest pass, ties to the
/// earliest. Success probabilities are drawn afterwards in (target, orbit)
/// order from the same stream.
pub fn compute_windows(
    targets: &[Target],
    spec: &GenSpec,
    seed: u64,
) -> Result<Vec<VisibleWindow>, GenError> {
    let step = spec.step_s;
    let mut windows: Vec<VisibleWindow> = Vec::new();
    for orbit_spec in &spec.orbits {
        let orbit = &orbit_spec.resource;
        let elements = orbit_spec
            .elements
            .as_ref()
            .ok_or(GenError::MissingElements { orbit_id: orbit.id })?;
        let track = OrbitTrack::build(elements, &spec.epoch, spec.horizon_s, step)?;
        for target in targets {
            if let Some(w) = best_window_for(target, orbit, &track, spec)? {
                windows.push(w);
            }
        }
    }
    windows.sort_by_key(|w| (w.target_id, w.orbit_id));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    for w in &mut windows {
        w.success_prob = rng.gen_range(spec.prob_range.0..=spec.prob_range.1);
    }
    Ok(windows)
}

fn best_window_for(
    target: &Target,
    orbit: &OrbitResource,
    track: &OrbitTrack,
    spec: &GenSpec,
) -> Result<Option<VisibleWindow>, GenError> {
    let tgt_unit = target_ecef_unit(target);
    let step = spec.step_s;
    let n = track.pos.len();

    let mut best: Option<(f64, f64, f64)> = None; // (start, end, roll at closest approach)
    let mut run_start: Option<usize> = None;
    for j in 0..=n {
        let visible = j < n && {
            // coarse central-angle filter, then the full envelope test
            vec3::dot(&track.sat_unit_ecef[j], &tgt_unit) >= track.cos_prefilter
                && track.check(
                    &track.pos[j],
                    &track.vel[j],
                    track.theta[j],
                    j as f64 * step,
                    &tgt_unit,
                    orbit,
                )
        };
        if visible && run_start.is_none() {
            run_start = Some(j);
        }
        if !visible {
            if let Some(s) = run_start.take() {
                let e = j - 1;
                let start = if s == 0 {
                    0.0
                } else {
                    refine_edge(
                        track,
                        &tgt_unit,
                        orbit,
                        (s - 1) as f64 * step,
                        s as f64 * step,
                    )?
                };
                let end = if e + 1 == n {
                    e as f64 * step
                } else {
                    refine_edge(
                        track,
                        &tgt_unit,
                        orbit,
                        (e + 1) as f64 * step,
                        e as f64 * step,
                    )?
                };
                if end - start >= target.obs_duration_s {
                    let roll = roll_at_closest_approach(track, &tgt_unit, s, e, step)?;
                    let better = match &best {
                        None => true,
                        Some((bs, be, _)) => {
                            let (len, blen) = (end - start, be - bs);
                            len > blen || (len == blen && start < *bs)
                        }
                    };
                    if better {
                        best = Some((start, end, roll));
                    }
                }
            }
        }
    }
    Ok(best.map(|(start_s, end_s, roll_angle_deg)| VisibleWindow {
        target_id: target.id,
        orbit_id: orbit.id,
        start_s,
        end_s,
        success_prob: 0.0, // drawn by the caller
        roll_angle_deg,
        available: true,
    }))
}

/// Bisect the visibility boundary between an invisible and a visible time
/// down to 0.1 s; returns the visible-side endpoint.
fn refine_edge(
    track: &OrbitTrack,
    target_unit: &V3,
    orbit: &OrbitResource,
    mut invisible_t: f64,
    mut visible_t: f64,
) -> Result<f64, GenError> {
    while num::abs(visible_t - invisible_t) > 0.1 {
        let mid = 0.5 * (visible_t + invisible_t);
        if track.visible_at(mid, target_unit, orbit)? {
            visible_t = mid;
        } else {
            invisible_t = mid;
        }
    }
    Ok(visible_t)
}

/// Cross-track look angle at the pass's closest-approach time, located by a
/// coarse scan over the run samples plus a ternary-search polish.
fn roll_at_closest_approach(
    track: &OrbitTrack,
    target_unit: &V3,
    run_start: usize,
    run_end: usize,
    step: f64,
) -> Result<f64, GenError> {
    let slant = |t: f64| -> Result<f64, GenError> {
        let (p, v) = propagate_inertial(&track.elements, t)?;
        let theta = earth_rotation_angle_rad(track.jd0) + EARTH_ROTATION_RAD_PER_S * t;
        let tgt_eci_unit = rot_z(target_unit, theta);
        let tgt = [
            EARTH_RADIUS_KM * tgt_eci_unit[0],
            EARTH_RADIUS_KM * tgt_eci_unit[1],
            EARTH_RADIUS_KM * tgt_eci_unit[2],
        ];
        let (_, _, d) = look_angles(&p, &v, &tgt);
        Ok(d)
    };
    let mut best_j = run_start;
    let mut best_d = f64::INFINITY;
    for j in run_start..=run_end {
        let d = slant(j as f64 * step)?;
        if d < best_d {
            best_d = d;
            best_j = j;
        }
    }
    let mut lo = (best_j as f64 - 1.0) * step;
    let mut hi = (best_j as f64 + 1.0) * step;
    lo = f64::max(lo, run_start as f64 * step);
    hi = f64::min(hi, run_end as f64 * step);
    for _ in 0..60 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if slant(m1)? <= slant(m2)? {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t_closest = 0.5 * (lo + hi);
    let (p, v) = propagate_inertial(&track.elements, t_closest)?;
    let theta = earth_rotation_angle_rad(track.jd0) + EARTH_ROTATION_RAD_PER_S * t_closest;
    let tgt_eci_unit = rot_z(target_unit, theta);
    let tgt = [
        EARTH_RADIUS_KM * tgt_eci_unit[0],
        EARTH_RADIUS_KM * tgt_eci_unit[1],
        EARTH_RADIUS_KM * tgt_eci_unit[2],
    ];
    let (_, roll, _) = look_angles(&p, &v, &tgt);
    Ok(roll)
}

/// Draw windows directly: each (target, orbit) pair gets a window with the
/// configured probability, uniform start, uniform length and uniform roll.
/// Pairs whose drawn length cannot fit the observation are dropped.
fn synthetic_windows(targets: &[Target], spec: &GenSpec, seed: u64) -> Vec<VisibleWindow> {
    let params = match &spec.mode {
        GenMode::Synthetic(p) => *p,
        GenMode::Geometric => unreachable!("synthetic_windows requires synthetic mode"),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut windows = Vec::new();
    for orbit_spec in &spec.orbits {
        let orbit = &orbit_spec.resource;
        for target in targets {
            if !rng.gen_bool(params.window_probability) {
                continue;
            }
            let length =
                rng.gen_range(params.window_length_range_s.0..=params.window_length_range_s.1);
            let start = rng.gen_range(0.0..f64::max(spec.horizon_s - length, f64::MIN_POSITIVE));
            let roll = rng.gen_range(-orbit.max_roll_deg..=orbit.max_roll_deg);
            let prob = rng.gen_range(spec.prob_range.0..=spec.prob_range.1);
            if length < target.obs_duration_s {
                continue;
            }
            windows.push(VisibleWindow {
                target_id: target.id,
                orbit_id: orbit.id,
                start_s: start,
                end_s: start + length,
                success_prob: prob,
                roll_angle_deg: roll,
                available: true,
            });
        }
    }
    windows.sort_by_key(|w| (w.target_id, w.orbit_id));
    windows
}

/// Full pipeline: targets, then windows per the spec's mode, assembled into
/// a validated instance. Identical seeds and specs yield identical
/// instances, field for field.
pub fn generate(spec: &GenSpec, seed: u64) -> Result<Instance, GenError> {
    spec.validate()?;
    let targets = generate_targets(spec, seed);
    let windows = match &spec.mode {
        GenMode::Geometric => compute_windows(&targets, spec, seed)?,
        GenMode::Synthetic(_) => synthetic_windows(&targets, spec, seed),
    };
    let instance = Instance {
        targets,
        orbits: spec.orbits.iter().map(|o| o.resource.clone()).collect(),
        windows,
        horizon_s: spec.horizon_s,
        rng_seed: seed,
    };
    instance.validate()?;
    Ok(instance)
}
