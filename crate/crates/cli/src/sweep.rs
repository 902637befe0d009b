//! `aeos sweep`: run the solver over a parameter grid x instance set x
//! seeds and emit per-run rows plus per-point aggregates.
//!
//! The scenario seed is held fixed across every run of an instance (common
//! random numbers) while the solver seed walks `solver_seed_base + run`.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;

use aeos_core::heuristics::{run_annealing, SolverConfig};
use aeos_core::model::{Instance, InstanceIndex};
use aeos_core::uncertainty::{required_sample_size, sample_scenarios};

use crate::formats::{self, fmt_f64};
use crate::solve::ConfigArgs;
use crate::verbose;

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Instance file; repeatable.
    #[arg(long = "instance", required = true)]
    pub instances: Vec<PathBuf>,

    /// Grid dimension as key=v1,v2,...; repeatable. Keys: energy_j,
    /// memory_mb, alpha, epsilon, destroy_fraction, max_failures,
    /// max_iterations, samples.
    #[arg(long = "param")]
    pub params: Vec<String>,

    /// Runs (solver seeds) per grid point.
    #[arg(long, default_value_t = 10)]
    pub runs: usize,

    /// Fixed cloud-scenario seed shared by all runs.
    #[arg(long, default_value_t = 1)]
    pub scenario_seed: u64,

    /// Run r uses solver seed base + r.
    #[arg(long, default_value_t = 1000)]
    pub solver_seed_base: u64,

    /// Per-run output CSV.
    #[arg(long)]
    pub out: PathBuf,

    /// Per-point aggregate CSV (defaults to the row CSV path with a
    /// `.agg.csv` suffix).
    #[arg(long)]
    pub aggregate_out: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

const SWEEP_KEYS: &[&str] = &[
    "energy_j",
    "memory_mb",
    "alpha",
    "epsilon",
    "destroy_fraction",
    "max_failures",
    "max_iterations",
    "samples",
];

#[derive(Clone, Debug)]
pub struct GridAxis {
    pub key: String,
    pub values: Vec<f64>,
}

/// One grid point: a value per declared axis, in axis order.
pub type GridPoint = Vec<f64>;

pub fn parse_axes(params: &[String]) -> Result<Vec<GridAxis>> {
    let mut axes = Vec::new();
    for p in params {
        let (key, values) = p
            .split_once('=')
            .with_context(|| format!("--param {p}: expected key=v1,v2,..."))?;
        if !SWEEP_KEYS.contains(&key) {
            bail!("--param {key}: unknown key; expected one of {SWEEP_KEYS:?}");
        }
        if axes.iter().any(|a: &GridAxis| a.key == key) {
            bail!("--param {key}: duplicate axis");
        }
        let values: Vec<f64> = values
            .split(',')
            .map(|v| {
                v.parse::<f64>()
                    .with_context(|| format!("--param {key}: bad value {v}"))
            })
            .collect::<Result<_>>()?;
        if values.is_empty() {
            bail!("--param {key}: empty value list");
        }
        axes.push(GridAxis {
            key: key.to_string(),
            values,
        });
    }
    Ok(axes)
}

/// Cross product of the axes, in declaration order; a single empty point
/// when no axes were given.
pub fn expand_grid(axes: &[GridAxis]) -> Vec<GridPoint> {
    let mut points: Vec<GridPoint> = vec![vec![]];
    for axis in axes {
        let mut next = Vec::with_capacity(points.len() * axis.values.len());
        for p in &points {
            for &v in &axis.values {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        points = next;
    }
    points
}

fn apply_point(
    axes: &[GridAxis],
    point: &GridPoint,
    instance: &mut Instance,
    config: &mut SolverConfig,
) {
    for (axis, &value) in axes.iter().zip(point) {
        match axis.key.as_str() {
            "energy_j" => instance
                .orbits
                .iter_mut()
                .for_each(|o| o.energy_capacity_j = value),
            "memory_mb" => instance
                .orbits
                .iter_mut()
                .for_each(|o| o.memory_capacity_mb = value),
            "alpha" => config.ccp.alpha = value,
            "epsilon" => config.ccp.epsilon = value,
            "destroy_fraction" => config.destroy_fraction = value,
            "max_failures" => config.max_failures = value as u32,
            "max_iterations" => config.max_iterations = value as u32,
            "samples" => config.ccp.sample_size_override = Some(value as usize),
            _ => unreachable!("keys are validated at parse time"),
        }
    }
}

pub struct SweepRow {
    pub instance: String,
    pub point: GridPoint,
    pub run: usize,
    pub solver_seed: u64,
    pub sample_size: usize,
    pub initial_profit: f64,
    pub best_profit: f64,
    pub assigned: usize,
    pub runtime_s: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn run_sweep_point(
    base_instance: &Instance,
    instance_name: &str,
    base_config: &SolverConfig,
    axes: &[GridAxis],
    point: &GridPoint,
    runs: usize,
    scenario_seed: u64,
    solver_seed_base: u64,
) -> Result<Vec<SweepRow>> {
    let mut instance = base_instance.clone();
    let mut config = base_config.clone();
    apply_point(axes, point, &mut instance, &mut config);
    config.validate().map_err(|e| anyhow::anyhow!("{e}"))?;

    let index = InstanceIndex::new(&instance).map_err(|e| anyhow::anyhow!("{e}"))?;
    let n_vars = instance
        .windows
        .iter()
        .filter(|w| w.available)
        .count()
        .max(1);
    let sample_size =
        required_sample_size(&config.ccp, n_vars).map_err(|e| anyhow::anyhow!("{e}"))?;
    let scenarios = sample_scenarios(&instance, sample_size, scenario_seed);

    let mut rows = Vec::with_capacity(runs);
    for run in 0..runs {
        let mut run_config = config.clone();
        run_config.seed = solver_seed_base + run as u64;
        let start = Instant::now();
        let outcome = run_annealing(&index, &scenarios, &run_config);
        rows.push(SweepRow {
            instance: instance_name.to_string(),
            point: point.clone(),
            run,
            solver_seed: run_config.seed,
            sample_size,
            initial_profit: outcome.initial_profit,
            best_profit: outcome.best_profit,
            assigned: outcome.best_schedule.assignment_count(),
            runtime_s: start.elapsed().as_secs_f64(),
        });
    }
    Ok(rows)
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    if args.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let axes = parse_axes(&args.params)?;
    let grid = expand_grid(&axes);
    let base_config = args.config.build()?;

    let key_cols: Vec<&str> = axes.iter().map(|a| a.key.as_str()).collect();
    let mut rows_csv = String::from("instance");
    for k in &key_cols {
        rows_csv.push_str(&format!(",{k}"));
    }
    rows_csv.push_str(
        ",run,solver_seed,scenario_seed,sample_size,initial_profit,best_profit,assigned,runtime_s\n",
    );
    let mut agg_csv = String::from("instance");
    for k in &key_cols {
        agg_csv.push_str(&format!(",{k}"));
    }
    agg_csv
        .push_str(",runs,mean_initial_profit,mean_best_profit,median_best_profit,mean_runtime_s\n");

    for path in &args.instances {
        let instance = formats::read_instance(path)?;
        let name = path.display().to_string();
        for point in &grid {
            if verbose() {
                eprintln!("sweep: {name} point {point:?}");
            }
            let rows = run_sweep_point(
                &instance,
                &name,
                &base_config,
                &axes,
                point,
                args.runs,
                args.scenario_seed,
                args.solver_seed_base,
            )?;
            for r in &rows {
                rows_csv.push_str(&r.instance);
                for v in &r.point {
                    rows_csv.push_str(&format!(",{}", fmt_f64(*v)));
                }
                rows_csv.push_str(&format!(
                    ",{},{},{},{},{},{},{},{}\n",
                    r.run,
                    r.solver_seed,
                    args.scenario_seed,
                    r.sample_size,
                    fmt_f64(r.initial_profit),
                    fmt_f64(r.best_profit),
                    r.assigned,
                    fmt_f64(r.runtime_s),
                ));
            }
            let mut best: Vec<f64> = rows.iter().map(|r| r.best_profit).collect();
            best.sort_unstable_by(f64::total_cmp);
            let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
            let initial: Vec<f64> = rows.iter().map(|r| r.initial_profit).collect();
            let runtime: Vec<f64> = rows.iter().map(|r| r.runtime_s).collect();
            agg_csv.push_str(&name.to_string());
            for v in point {
                agg_csv.push_str(&format!(",{}", fmt_f64(*v)));
            }
            agg_csv.push_str(&format!(
                ",{},{},{},{},{}\n",
                rows.len(),
                fmt_f64(mean(&initial)),
                fmt_f64(mean(&best)),
                fmt_f64(median(&best)),
                fmt_f64(mean(&runtime)),
            ));
        }
    }

    formats::write_text(&args.out, &rows_csv)?;
    let agg_path = args
        .aggregate_out
        .clone()
        .unwrap_or_else(|| args.out.with_extension("agg.csv"));
    formats::write_text(&agg_path, &agg_csv)?;
    println!(
        "wrote {} ({} instances x {} points x {} runs) and {}",
        args.out.display(),
        args.instances.len(),
        grid.len(),
        args.runs,
        agg_path.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_expansion_counts_match() {
        // the benchmark sensitivity layout: 9 parameter combos x 10 runs
        // over 4 instances = 360 rows
        let axes = parse_axes(&[
            "alpha=0.10,0.15,0.20".into(),
            "epsilon=0.01,0.05,0.09".into(),
        ])
        .unwrap();
        let grid = expand_grid(&axes);
        assert_eq!(grid.len(), 9);
        let instances = 4;
        let runs = 10;
        assert_eq!(grid.len() * instances * runs, 360);
    }

    #[test]
    fn bad_axes_are_rejected() {
        assert!(parse_axes(&["spin=1,2".into()]).is_err());
        assert!(parse_axes(&["alpha".into()]).is_err());
        assert!(parse_axes(&["alpha=0.1".into(), "alpha=0.2".into()]).is_err());
        assert!(parse_axes(&["alpha=".into()]).is_err());
    }

    #[test]
    fn empty_axis_list_is_a_single_point() {
        assert_eq!(expand_grid(&[]), vec![Vec::<f64>::new()]);
    }
}
