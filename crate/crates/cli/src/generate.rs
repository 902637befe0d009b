//! `aeos generate`: build a benchmark instance file.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use aeos_core::instance_gen::{
    self, default_constellation, orbit_resource, Epoch, GenMode, GenSpec, OrbitSpec, Region,
    SyntheticParams,
};

use crate::formats;

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Benchmark preset: paper-500, paper-650, paper-800 or paper-950
    /// (four-satellite constellation, 24 h horizon, geometric windows).
    #[arg(long, conflicts_with_all = ["n_world", "synthetic", "region"])]
    pub preset: Option<String>,

    /// Worldwide target count (synthetic mode).
    #[arg(long)]
    pub n_world: Option<usize>,

    /// Extra region box as lat_min:lat_max:lon_min:lon_max:count; repeatable.
    #[arg(long)]
    pub region: Vec<String>,

    /// Draw windows directly instead of propagating orbits.
    #[arg(long)]
    pub synthetic: bool,

    /// Synthetic: probability that a (target, orbit) pair gets a window.
    #[arg(long, default_value_t = 0.9)]
    pub window_prob: f64,

    /// Synthetic: window length range as min:max seconds.
    #[arg(long, default_value = "120:400")]
    pub window_len: String,

    /// Synthetic: number of orbit resources.
    #[arg(long, default_value_t = 2)]
    pub orbit_count: usize,

    /// Memory capacity per orbit, MB.
    #[arg(long, default_value_t = 7500.0)]
    pub memory_mb: f64,

    /// Energy capacity per orbit, J.
    #[arg(long, default_value_t = 80_000.0)]
    pub energy_j: f64,

    /// Planning horizon, seconds.
    #[arg(long)]
    pub horizon_s: Option<f64>,

    /// Propagation scan step, seconds (geometric mode).
    #[arg(long, default_value_t = 1.0)]
    pub step_s: f64,

    /// Epoch as YYYY-MM-DDTHH:MM:SS (UTC).
    #[arg(long, default_value = "2017-01-01T00:00:00")]
    pub epoch: String,

    /// Success-probability range as lo:hi.
    #[arg(long, default_value = "0.3:1.0")]
    pub prob_range: String,

    /// Observation-duration range as lo:hi seconds.
    #[arg(long, default_value = "15:30")]
    pub obs_duration: String,

    /// Integer profit range as lo:hi.
    #[arg(long, default_value = "1:10")]
    pub profit_range: String,

    #[arg(long)]
    pub seed: u64,

    /// Output instance JSON path.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn parse_pair(text: &str, what: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        bail!("{what}: expected lo:hi, got {text}");
    }
    let lo = parts[0]
        .parse::<f64>()
        .with_context(|| format!("{what}: bad low bound"))?;
    let hi = parts[1]
        .parse::<f64>()
        .with_context(|| format!("{what}: bad high bound"))?;
    Ok((lo, hi))
}

fn parse_region(text: &str) -> Result<Region> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 5 {
        bail!("region: expected lat_min:lat_max:lon_min:lon_max:count, got {text}");
    }
    Ok(Region {
        lat_min_deg: parts[0].parse()?,
        lat_max_deg: parts[1].parse()?,
        lon_min_deg: parts[2].parse()?,
        lon_max_deg: parts[3].parse()?,
        count: parts[4].parse()?,
    })
}

pub fn parse_epoch(text: &str) -> Result<Epoch> {
    let (date, time) = text
        .split_once('T')
        .with_context(|| format!("epoch: expected YYYY-MM-DDTHH:MM:SS, got {text}"))?;
    let d: Vec<&str> = date.split('-').collect();
    let t: Vec<&str> = time.split(':').collect();
    if d.len() != 3 || t.len() != 3 {
        bail!("epoch: expected YYYY-MM-DDTHH:MM:SS, got {text}");
    }
    Ok(Epoch {
        year: d[0].parse()?,
        month: d[1].parse()?,
        day: d[2].parse()?,
        hour: t[0].parse()?,
        minute: t[1].parse()?,
        second: t[2].parse()?,
    })
}

/// The three benchmark interest regions, 150 targets each.
fn benchmark_regions() -> [Region; 3] {
    let china = Region {
        lat_min_deg: 3.0,
        lat_max_deg: 53.0,
        lon_min_deg: 74.0,
        lon_max_deg: 133.0,
        count: 150,
    };
    let australia = Region {
        lat_min_deg: -43.0,
        lat_max_deg: -10.0,
        lon_min_deg: 112.0,
        lon_max_deg: 154.0,
        count: 150,
    };
    let america = Region {
        lat_min_deg: 24.0,
        lat_max_deg: 49.0,
        lon_min_deg: -125.0,
        lon_max_deg: -73.0,
        count: 150,
    };
    [china, australia, america]
}

pub fn build_spec(args: &GenerateArgs) -> Result<GenSpec> {
    let profit = parse_pair(&args.profit_range, "profit-range")?;
    let mut spec = GenSpec {
        n_world: args.n_world.unwrap_or(0),
        regions: args
            .region
            .iter()
            .map(|r| parse_region(r))
            .collect::<Result<_>>()?,
        horizon_s: args.horizon_s.unwrap_or(86_400.0),
        epoch: parse_epoch(&args.epoch)?,
        profit_range: (profit.0 as u32, profit.1 as u32),
        obs_duration_range_s: parse_pair(&args.obs_duration, "obs-duration")?,
        prob_range: parse_pair(&args.prob_range, "prob-range")?,
        step_s: args.step_s,
        mode: GenMode::Synthetic(SyntheticParams {
            window_probability: args.window_prob,
            window_length_range_s: parse_pair(&args.window_len, "window-len")?,
        }),
        orbits: instance_gen::synthetic_orbits(args.orbit_count, args.memory_mb, args.energy_j),
    };

    if let Some(preset) = &args.preset {
        let regions = benchmark_regions();
        let region_count = match preset.as_str() {
            "paper-500" => 0,
            "paper-650" => 1,
            "paper-800" => 2,
            "paper-950" => 3,
            other => bail!("unknown preset {other}; expected paper-500/650/800/950"),
        };
        spec.n_world = 500;
        spec.regions = regions[..region_count].to_vec();
        spec.mode = GenMode::Geometric;
        spec.orbits = default_constellation()
            .iter()
            .enumerate()
            .map(|(i, elements)| OrbitSpec {
                resource: orbit_resource(i as u32 + 1, args.memory_mb, args.energy_j),
                elements: Some(*elements),
            })
            .collect();
    } else if !args.synthetic {
        bail!("choose either --preset for geometric generation or --synthetic");
    }
    Ok(spec)
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let spec = build_spec(args)?;
    let instance = instance_gen::generate(&spec, args.seed)?;
    formats::write_instance(&args.out, &instance)?;
    println!(
        "wrote {}: {} targets, {} orbits, {} windows",
        args.out.display(),
        instance.targets.len(),
        instance.orbits.len(),
        instance.windows.len()
    );
    Ok(())
}
