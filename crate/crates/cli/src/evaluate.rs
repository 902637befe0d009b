//! `aeos evaluate`: validate a schedule against its instance and report its
//! confidence-quantile profit under freshly sampled scenarios.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;

use aeos_core::uncertainty::{confidence_profit, sample_scenarios, scenario_profits};
use aeos_core::validate::validate_schedule;

use crate::formats;

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub instance: PathBuf,

    #[arg(long)]
    pub schedule: PathBuf,

    /// Tolerated fraction of violating scenarios.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,

    /// Number of scenarios to sample.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,

    /// Scenario-stream seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Write the ascending per-scenario profit CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Write the validation report as JSON here (also on failure).
    #[arg(long)]
    pub report_json: Option<PathBuf>,
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    if args.samples == 0 {
        bail!("--samples must be at least 1");
    }
    if !(0.0..1.0).contains(&args.epsilon) {
        bail!("--epsilon must be in [0, 1)");
    }
    let instance = formats::read_instance(&args.instance)?;
    let schedule = formats::read_schedule(&args.schedule)?;

    let report = validate_schedule(&instance, &schedule).map_err(|e| anyhow::anyhow!("{e}"))?;
    if let Some(path) = &args.report_json {
        formats::write_text(
            path,
            &format!("{}\n", serde_json::to_string_pretty(&report)?),
        )?;
    }
    if !report.is_empty() {
        bail!("schedule is infeasible for this instance\n{report}");
    }

    let scenarios = sample_scenarios(&instance, args.samples, args.seed);
    let profit = confidence_profit(&instance, &schedule, &scenarios, args.epsilon);
    if let Some(path) = &args.out {
        let mut profits = scenario_profits(&instance, &schedule, &scenarios);
        profits.sort_unstable_by(f64::total_cmp);
        formats::write_profile_csv(path, &profits)?;
    }
    println!("confidence_profit={profit}");
    Ok(())
}
