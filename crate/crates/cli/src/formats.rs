//! Versioned on-disk formats: JSON documents for instances, schedules,
//! scenario matrices and run manifests, plus the CSV writers.
//!
//! Every document carries a `schema` tag so stale files fail loudly. JSON is
//! pretty-printed with stable key order; CSV floats are printed with nine
//! significant digits. See `docs/FORMATS.md` for the field-by-field layout.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use aeos_core::heuristics::{SolverConfig, TraceRecord};
use aeos_core::model::{Instance, Schedule};
use aeos_core::uncertainty::ScenarioMatrix;

pub const INSTANCE_SCHEMA: &str = "aeos.instance/1";
pub const SCHEDULE_SCHEMA: &str = "aeos.schedule/1";
pub const SCENARIOS_SCHEMA: &str = "aeos.scenarios/1";
pub const MANIFEST_SCHEMA: &str = "aeos.manifest/1";

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    schema: String,
    instance: Instance,
}

#[derive(Serialize, Deserialize)]
struct ScheduleDoc {
    schema: String,
    schedule: Schedule,
}

/// Scenario outcomes as one row-major bit stream (LSB first within each
/// byte), base64-encoded.
#[derive(Serialize, Deserialize)]
struct ScenarioDoc {
    schema: String,
    sample_size: usize,
    seed: u64,
    columns: Vec<(u32, u32)>,
    bits_b64: String,
}

/// Everything needed to reproduce a solver run bit-exactly, plus its
/// outcome summary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub tool_version: String,
    /// Instance path as given; relative paths resolve against the
    /// manifest's own directory on replay.
    pub instance_path: String,
    pub scenario_seed: u64,
    pub sample_size: usize,
    pub config: SolverConfig,
    pub outcome: RunOutcome,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunOutcome {
    pub initial_profit: f64,
    pub best_profit: f64,
    pub targets_assigned: usize,
    pub iterations: usize,
    /// Wall-clock seconds; informational, not part of the reproducible state.
    pub runtime_s: f64,
}

/// Nine significant digits, fixed scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.8e}")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .with_context(|| format!("serializing {}", path.display()))?;
    text.push('\n');
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating directory {}", parent.display()))?;
        }
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_instance(path: &Path, instance: &Instance) -> Result<()> {
    write_json(
        path,
        &InstanceDoc {
            schema: INSTANCE_SCHEMA.into(),
            instance: instance.clone(),
        },
    )
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let doc: InstanceDoc = read_json(path)?;
    if doc.schema != INSTANCE_SCHEMA {
        bail!(
            "{}: expected schema {INSTANCE_SCHEMA}, found {}",
            path.display(),
            doc.schema
        );
    }
    doc.instance
        .validate()
        .with_context(|| format!("{}: instance failed validation", path.display()))?;
    Ok(doc.instance)
}

pub fn write_schedule(path: &Path, schedule: &Schedule) -> Result<()> {
    write_json(
        path,
        &ScheduleDoc {
            schema: SCHEDULE_SCHEMA.into(),
            schedule: schedule.clone(),
        },
    )
}

pub fn read_schedule(path: &Path) -> Result<Schedule> {
    let doc: ScheduleDoc = read_json(path)?;
    if doc.schema != SCHEDULE_SCHEMA {
        bail!(
            "{}: expected schema {SCHEDULE_SCHEMA}, found {}",
            path.display(),
            doc.schema
        );
    }
    Ok(doc.schedule)
}

fn pack_bits(words: &[u64], n_bits: usize) -> Vec<u8> {
    let n_bytes = n_bits.div_ceil(8);
    let mut bytes = Vec::with_capacity(n_bytes);
    for w in words {
        bytes.extend_from_slice(&w.to_le_bytes());
    }
    bytes.truncate(n_bytes);
    bytes
}

fn unpack_bits(bytes: &[u8], n_bits: usize) -> Vec<u64> {
    let n_words = n_bits.div_ceil(64);
    let mut words = vec![0u64; n_words];
    for (i, b) in bytes.iter().enumerate() {
        if i / 8 < n_words {
            words[i / 8] |= (*b as u64) << (8 * (i % 8));
        }
    }
    words
}

pub fn write_scenarios(path: &Path, matrix: &ScenarioMatrix) -> Result<()> {
    let n_bits = matrix.sample_size * matrix.columns.len();
    write_json(
        path,
        &ScenarioDoc {
            schema: SCENARIOS_SCHEMA.into(),
            sample_size: matrix.sample_size,
            seed: matrix.seed,
            columns: matrix.columns.clone(),
            bits_b64: BASE64.encode(pack_bits(&matrix.bits, n_bits)),
        },
    )
}

pub fn read_scenarios(path: &Path) -> Result<ScenarioMatrix> {
    let doc: ScenarioDoc = read_json(path)?;
    if doc.schema != SCENARIOS_SCHEMA {
        bail!(
            "{}: expected schema {SCENARIOS_SCHEMA}, found {}",
            path.display(),
            doc.schema
        );
    }
    let n_bits = doc.sample_size * doc.columns.len();
    let bytes = BASE64
        .decode(doc.bits_b64.as_bytes())
        .with_context(|| format!("{}: scenario bits are not valid base64", path.display()))?;
    if bytes.len() != n_bits.div_ceil(8) {
        bail!(
            "{}: scenario bit stream holds {} bytes, expected {}",
            path.display(),
            bytes.len(),
            n_bits.div_ceil(8)
        );
    }
    Ok(ScenarioMatrix {
        sample_size: doc.sample_size,
        columns: doc.columns,
        bits: unpack_bits(&bytes, n_bits),
        seed: doc.seed,
    })
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    write_json(path, manifest)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let doc: RunManifest = read_json(path)?;
    if doc.schema != MANIFEST_SCHEMA {
        bail!(
            "{}: expected schema {MANIFEST_SCHEMA}, found {}",
            path.display(),
            doc.schema
        );
    }
    Ok(doc)
}

pub fn write_trace_csv(path: &Path, trace: &[TraceRecord]) -> Result<()> {
    let mut out =
        String::from("iteration,outer,temperature,profit,best_profit,accepted,assigned\n");
    for r in trace {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.iteration,
            r.outer,
            fmt_f64(r.temperature),
            fmt_f64(r.profit),
            fmt_f64(r.best_profit),
            u8::from(r.accepted),
            r.assigned,
        ));
    }
    atomic_write(path, out.as_bytes())
}

pub fn write_profile_csv(path: &Path, sorted_profits: &[f64]) -> Result<()> {
    let mut out = String::from("rank,profit\n");
    for (i, p) in sorted_profits.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i, fmt_f64(*p)));
    }
    atomic_write(path, out.as_bytes())
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating directory {}", parent.display()))?;
        }
    }
    let mut file =
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    file.write_all(bytes)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    atomic_write(path, text.as_bytes())
}
