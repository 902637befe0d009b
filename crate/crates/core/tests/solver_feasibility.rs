//! Cross-module property: every schedule the construction and annealing
//! paths produce validates cleanly, across many seeded instances.

use aeos_core::heuristics::{construct_initial, run_annealing, SolverConfig};
use aeos_core::model::InstanceIndex;
use aeos_core::uncertainty::{sample_scenarios, CcpParams};
use aeos_core::validate::validate_schedule;
use aeos_testkit::desk_instance;

fn quick_config(seed: u64) -> SolverConfig {
    SolverConfig {
        max_iterations: 15,
        max_failures: 10,
        max_inner_failures: 5,
        ccp: CcpParams {
            sample_size_override: Some(40),
            ..CcpParams::default()
        },
        seed,
        ..SolverConfig::default()
    }
}

#[test]
fn solver_outputs_validate_on_100_seeded_instances() {
    for seed in 0..100u64 {
        let n_targets = 10 + (seed as usize % 30);
        let inst = desk_instance(seed, n_targets, 2);
        let index = InstanceIndex::new(&inst).unwrap();
        let config = quick_config(seed);

        let constructed = construct_initial(&index, &config);
        let report = validate_schedule(&inst, &constructed).unwrap();
        assert!(
            report.is_empty(),
            "seed {seed}: construction invalid\n{report}"
        );

        let scenarios = sample_scenarios(&inst, 40, seed ^ 0xBEEF);
        let outcome = run_annealing(&index, &scenarios, &config);
        let report = validate_schedule(&inst, &outcome.best_schedule).unwrap();
        assert!(
            report.is_empty(),
            "seed {seed}: annealed schedule invalid\n{report}"
        );
        assert!(outcome.best_profit >= outcome.initial_profit);
    }
}
