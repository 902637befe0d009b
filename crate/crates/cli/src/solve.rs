//! `aeos solve` and `aeos replay`: run the annealing solver and write the
//! schedule, manifest and trace; replay reproduces a manifest bit-exactly.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;

use aeos_core::heuristics::{run_annealing, SolverConfig};
use aeos_core::model::{Instance, InstanceIndex};
use aeos_core::uncertainty::{required_sample_size, sample_scenarios};
use aeos_core::validate::validate_schedule;

use crate::formats::{self, RunManifest, RunOutcome};
use crate::verbose;

#[derive(Args, Debug, Clone)]
pub struct ConfigArgs {
    /// Solver config JSON (missing fields take defaults); flags below
    /// override the file.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Chance-constraint interval complement.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Tolerated fraction of violating scenarios.
    #[arg(long)]
    pub epsilon: Option<f64>,

    /// Simultaneous-feasibility risk of the sample bound.
    #[arg(long)]
    pub theta: Option<f64>,

    /// Scenario count; overrides the sample-size bound.
    #[arg(long)]
    pub samples: Option<usize>,

    #[arg(long)]
    pub destroy_fraction: Option<f64>,

    #[arg(long)]
    pub initial_temperature: Option<f64>,

    #[arg(long)]
    pub cooling_rate: Option<f64>,

    #[arg(long)]
    pub chain_growth: Option<f64>,

    #[arg(long)]
    pub improvement_threshold: Option<f64>,

    #[arg(long)]
    pub max_failures: Option<u32>,

    #[arg(long)]
    pub max_inner_failures: Option<u32>,

    #[arg(long)]
    pub max_iterations: Option<u32>,

    #[arg(long)]
    pub scan_resolution: Option<f64>,

    #[arg(long)]
    pub refine_tolerance: Option<f64>,

    /// Seed of the annealing random stream.
    #[arg(long)]
    pub solver_seed: Option<u64>,
}

impl ConfigArgs {
    pub fn build(&self) -> Result<SolverConfig> {
        let mut config = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))?
            }
            None => SolverConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field { $target = v; })*
            };
        }
        set! {
            alpha => config.ccp.alpha,
            epsilon => config.ccp.epsilon,
            theta => config.ccp.theta,
            destroy_fraction => config.destroy_fraction,
            initial_temperature => config.initial_temperature,
            cooling_rate => config.cooling_rate,
            chain_growth => config.chain_growth,
            improvement_threshold => config.improvement_threshold,
            max_failures => config.max_failures,
            max_inner_failures => config.max_inner_failures,
            max_iterations => config.max_iterations,
            scan_resolution => config.start_time.scan_resolution,
            refine_tolerance => config.start_time.refine_tolerance,
            solver_seed => config.seed,
        }
        if let Some(samples) = self.samples {
            config.ccp.sample_size_override = Some(samples);
        }
        config.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(config)
    }
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,

    /// Output schedule JSON.
    #[arg(long)]
    pub out: PathBuf,

    /// Output run-manifest JSON.
    #[arg(long)]
    pub manifest: Option<PathBuf>,

    /// Output per-iteration trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,

    /// Also dump the sampled scenario matrix.
    #[arg(long)]
    pub scenarios_out: Option<PathBuf>,

    /// Seed of the cloud-scenario stream.
    #[arg(long, default_value_t = 1)]
    pub scenario_seed: u64,

    #[command(flatten)]
    pub config: ConfigArgs,
}

pub struct SolveProducts {
    pub manifest: RunManifest,
}

/// Run one seeded solve and write every requested artifact.
#[allow(clippy::too_many_arguments)]
pub fn run_solve(
    instance: &Instance,
    instance_path: &str,
    config: &SolverConfig,
    scenario_seed: u64,
    out: &Path,
    manifest_path: Option<&Path>,
    trace_path: Option<&Path>,
    scenarios_out: Option<&Path>,
) -> Result<SolveProducts> {
    let index = InstanceIndex::new(instance).map_err(|e| anyhow::anyhow!("{e}"))?;
    let n_vars = instance
        .windows
        .iter()
        .filter(|w| w.available)
        .count()
        .max(1);
    let sample_size =
        required_sample_size(&config.ccp, n_vars).map_err(|e| anyhow::anyhow!("{e}"))?;
    if verbose() {
        eprintln!("sampling {sample_size} scenarios over {n_vars} windows");
    }
    let scenarios = sample_scenarios(instance, sample_size, scenario_seed);

    let start = Instant::now();
    let outcome = run_annealing(&index, &scenarios, config);
    let runtime_s = start.elapsed().as_secs_f64();

    let report =
        validate_schedule(instance, &outcome.best_schedule).map_err(|e| anyhow::anyhow!("{e}"))?;
    if !report.is_empty() {
        bail!("internal error: solver produced an infeasible schedule\n{report}");
    }

    formats::write_schedule(out, &outcome.best_schedule)?;
    if let Some(path) = trace_path {
        formats::write_trace_csv(path, &outcome.trace)?;
    }
    if let Some(path) = scenarios_out {
        formats::write_scenarios(path, &scenarios)?;
    }
    let manifest = RunManifest {
        schema: formats::MANIFEST_SCHEMA.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        instance_path: instance_path.to_string(),
        scenario_seed,
        sample_size,
        config: config.clone(),
        outcome: RunOutcome {
            initial_profit: outcome.initial_profit,
            best_profit: outcome.best_profit,
            targets_assigned: outcome.best_schedule.assignment_count(),
            iterations: outcome.trace.len(),
            runtime_s,
        },
    };
    if let Some(path) = manifest_path {
        formats::write_manifest(path, &manifest)?;
    }
    println!(
        "initial_profit={} best_profit={} assigned={} iterations={} runtime_s={:.3}",
        manifest.outcome.initial_profit,
        manifest.outcome.best_profit,
        manifest.outcome.targets_assigned,
        manifest.outcome.iterations,
        runtime_s
    );
    Ok(SolveProducts { manifest })
}

pub fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let mut config = args.config.build()?;
    // the manifest must pin the exact sample size, so resolve it eagerly
    let instance = formats::read_instance(&args.instance)?;
    let n_vars = instance
        .windows
        .iter()
        .filter(|w| w.available)
        .count()
        .max(1);
    let sample_size =
        required_sample_size(&config.ccp, n_vars).map_err(|e| anyhow::anyhow!("{e}"))?;
    config.ccp.sample_size_override = Some(sample_size);

    run_solve(
        &instance,
        &args.instance.display().to_string(),
        &config,
        args.scenario_seed,
        &args.out,
        args.manifest.as_deref(),
        args.trace.as_deref(),
        args.scenarios_out.as_deref(),
    )?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    /// Manifest of a previous solve.
    #[arg(long)]
    pub manifest: PathBuf,

    /// Output schedule JSON.
    #[arg(long)]
    pub out: PathBuf,

    /// Output trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

pub fn cmd_replay(args: &ReplayArgs) -> Result<()> {
    let manifest = formats::read_manifest(&args.manifest)?;
    let instance_path = {
        let p = PathBuf::from(&manifest.instance_path);
        if p.is_relative() {
            args.manifest.parent().unwrap_or(Path::new(".")).join(p)
        } else {
            p
        }
    };
    let instance = formats::read_instance(&instance_path)?;
    let products = run_solve(
        &instance,
        &manifest.instance_path,
        &manifest.config,
        manifest.scenario_seed,
        &args.out,
        None,
        args.trace.as_deref(),
        None,
    )?;
    if products.manifest.outcome.best_profit != manifest.outcome.best_profit
        || products.manifest.outcome.targets_assigned != manifest.outcome.targets_assigned
    {
        bail!(
            "replay diverged from the manifest: best_profit {} vs {}",
            products.manifest.outcome.best_profit,
            manifest.outcome.best_profit
        );
    }
    Ok(())
}
