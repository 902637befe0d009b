//! End-to-end checks of the command-line surface and its file contracts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use aeos_cli::formats;
use aeos_core::model::Schedule;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_aeos")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn generate_small(dir: &Path, seed: u64, name: &str) -> PathBuf {
    run_ok(&[
        "generate",
        "--synthetic",
        "--n-world",
        "25",
        "--orbit-count",
        "2",
        "--horizon-s",
        "7200",
        "--seed",
        &seed.to_string(),
        "--out",
        &p(dir, name),
    ]);
    dir.join(name)
}

#[test]
fn generate_rejects_bad_flags() {
    let dir = tempfile::tempdir().unwrap();
    // neither preset nor synthetic
    let out = run(&["generate", "--seed", "1", "--out", &p(dir.path(), "x.json")]);
    assert!(!out.status.success());
    // unknown preset
    let out = run(&[
        "generate",
        "--preset",
        "paper-9000",
        "--seed",
        "1",
        "--out",
        &p(dir.path(), "x.json"),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));
}

#[test]
fn generate_zero_targets_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "generate",
        "--synthetic",
        "--n-world",
        "0",
        "--orbit-count",
        "2",
        "--seed",
        "1",
        "--out",
        &p(dir.path(), "empty.json"),
    ]);
    let inst = formats::read_instance(&dir.path().join("empty.json")).unwrap();
    assert!(inst.targets.is_empty());
    assert!(inst.windows.is_empty());

    generate_small(dir.path(), 5, "a.json");
    generate_small(dir.path(), 5, "b.json");
    assert_eq!(
        std::fs::read(dir.path().join("a.json")).unwrap(),
        std::fs::read(dir.path().join("b.json")).unwrap()
    );
}

#[test]
fn solve_on_an_empty_instance_yields_an_empty_schedule() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "generate",
        "--synthetic",
        "--n-world",
        "0",
        "--orbit-count",
        "1",
        "--seed",
        "3",
        "--out",
        &p(dir.path(), "empty.json"),
    ]);
    let stdout = run_ok(&[
        "solve",
        "--instance",
        &p(dir.path(), "empty.json"),
        "--out",
        &p(dir.path(), "sched.json"),
        "--samples",
        "50",
        "--max-iterations",
        "20",
        "--max-failures",
        "10",
    ]);
    assert!(stdout.contains("best_profit=0"), "stdout: {stdout}");
    let sched = formats::read_schedule(&dir.path().join("sched.json")).unwrap();
    assert_eq!(sched, Schedule::new());
}

#[test]
fn trace_agrees_with_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate_small(dir.path(), 8, "inst.json");
    run_ok(&[
        "solve",
        "--instance",
        &inst.display().to_string(),
        "--out",
        &p(dir.path(), "sched.json"),
        "--manifest",
        &p(dir.path(), "man.json"),
        "--trace",
        &p(dir.path(), "trace.csv"),
        "--samples",
        "200",
        "--max-iterations",
        "100",
        "--max-failures",
        "50",
        "--scenario-seed",
        "4",
        "--solver-seed",
        "9",
    ]);
    let manifest = formats::read_manifest(&dir.path().join("man.json")).unwrap();
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let last = trace.lines().last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    // columns: iteration,outer,temperature,profit,best_profit,accepted,assigned
    let final_best: f64 = fields[4].parse().unwrap();
    assert_eq!(final_best, manifest.outcome.best_profit);
    assert_eq!(trace.lines().count() - 1, manifest.outcome.iterations);

    // the solved schedule is feasible and scores what the manifest says
    let stdout = run_ok(&[
        "evaluate",
        "--instance",
        &inst.display().to_string(),
        "--schedule",
        &p(dir.path(), "sched.json"),
        "--epsilon",
        "0.01",
        "--samples",
        "200",
        "--seed",
        "4",
        "--out",
        &p(dir.path(), "profile.csv"),
    ]);
    let f: f64 = stdout
        .trim()
        .strip_prefix("confidence_profit=")
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(f, manifest.outcome.best_profit);
}

#[test]
fn evaluate_rejects_an_inconsistent_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let inst_a = generate_small(dir.path(), 8, "a.json");
    generate_small(dir.path(), 9, "b.json");
    run_ok(&[
        "solve",
        "--instance",
        &inst_a.display().to_string(),
        "--out",
        &p(dir.path(), "sched_a.json"),
        "--samples",
        "100",
        "--max-iterations",
        "50",
        "--max-failures",
        "25",
    ]);
    // a schedule solved for instance A does not validate against instance B
    let out = run(&[
        "evaluate",
        "--instance",
        &p(dir.path(), "b.json"),
        "--schedule",
        &p(dir.path(), "sched_a.json"),
        "--report-json",
        &p(dir.path(), "report.json"),
    ]);
    assert!(!out.status.success());
    let report = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(report.contains("violations"));
}

#[test]
fn evaluate_epsilon_zero_is_the_minimum_scenario_profit() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate_small(dir.path(), 12, "inst.json");
    run_ok(&[
        "solve",
        "--instance",
        &inst.display().to_string(),
        "--out",
        &p(dir.path(), "sched.json"),
        "--samples",
        "100",
        "--max-iterations",
        "50",
        "--max-failures",
        "25",
    ]);
    let stdout = run_ok(&[
        "evaluate",
        "--instance",
        &inst.display().to_string(),
        "--schedule",
        &p(dir.path(), "sched.json"),
        "--epsilon",
        "0",
        "--samples",
        "150",
        "--seed",
        "2",
        "--out",
        &p(dir.path(), "profile.csv"),
    ]);
    let f: f64 = stdout
        .trim()
        .strip_prefix("confidence_profit=")
        .unwrap()
        .parse()
        .unwrap();
    let profile = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let first_row: f64 = profile
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(
        f, first_row,
        "epsilon 0 must return the smallest scenario profit"
    );
}

#[test]
fn sweep_single_point_matches_solve() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate_small(dir.path(), 20, "inst.json");
    run_ok(&[
        "sweep",
        "--instance",
        &inst.display().to_string(),
        "--runs",
        "1",
        "--scenario-seed",
        "6",
        "--solver-seed-base",
        "31",
        "--samples",
        "150",
        "--max-iterations",
        "60",
        "--max-failures",
        "30",
        "--out",
        &p(dir.path(), "sweep.csv"),
    ]);
    let stdout = run_ok(&[
        "solve",
        "--instance",
        &inst.display().to_string(),
        "--out",
        &p(dir.path(), "sched.json"),
        "--samples",
        "150",
        "--max-iterations",
        "60",
        "--max-failures",
        "30",
        "--scenario-seed",
        "6",
        "--solver-seed",
        "31",
    ]);
    let best_from_solve = stdout
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix("best_profit="))
        .unwrap()
        .parse::<f64>()
        .unwrap();

    let rows = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(rows.lines().count(), 2, "one header + one row:\n{rows}");
    let row: Vec<&str> = rows.lines().nth(1).unwrap().split(',').collect();
    // columns: instance,run,solver_seed,scenario_seed,sample_size,initial,best,assigned,runtime
    let best_from_sweep: f64 = row[6].parse().unwrap();
    assert_eq!(best_from_sweep, best_from_solve);

    // aggregates exist with matching means
    let agg = std::fs::read_to_string(dir.path().join("sweep.agg.csv")).unwrap();
    let arow: Vec<&str> = agg.lines().nth(1).unwrap().split(',').collect();
    let mean_best: f64 = arow[3].parse().unwrap();
    assert_eq!(mean_best, best_from_solve);
}

#[test]
fn sweep_rows_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate_small(dir.path(), 21, "inst.json");
    for name in ["s1.csv", "s2.csv"] {
        run_ok(&[
            "sweep",
            "--instance",
            &inst.display().to_string(),
            "--param",
            "energy_j=40000,80000",
            "--runs",
            "2",
            "--scenario-seed",
            "6",
            "--solver-seed-base",
            "100",
            "--samples",
            "100",
            "--max-iterations",
            "40",
            "--max-failures",
            "20",
            "--out",
            &p(dir.path(), name),
        ]);
    }
    // identical except the wall-clock runtime column
    let strip_runtime = |name: &str| -> Vec<String> {
        std::fs::read_to_string(dir.path().join(name))
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    assert_eq!(strip_runtime("s1.csv"), strip_runtime("s2.csv"));
}

#[test]
fn config_file_fills_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate_small(dir.path(), 23, "inst.json");
    // a partial config file: unspecified fields take defaults
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{ "max_iterations": 40, "max_failures": 20, "seed": 77,
             "ccp": { "alpha": 0.1, "epsilon": 0.01, "theta": 0.01,
                      "sample_size_override": 100 } }"#,
    )
    .unwrap();
    let from_config = run_ok(&[
        "solve", "--instance", &inst.display().to_string(),
        "--out", &p(dir.path(), "s1.json"),
        "--config", &p(dir.path(), "cfg.json"),
    ]);
    // the same run spelled out in flags
    let from_flags = run_ok(&[
        "solve", "--instance", &inst.display().to_string(),
        "--out", &p(dir.path(), "s2.json"),
        "--samples", "100", "--max-iterations", "40", "--max-failures", "20",
        "--solver-seed", "77",
    ]);
    assert_eq!(
        from_config.split_whitespace().collect::<Vec<_>>()[..4],
        from_flags.split_whitespace().collect::<Vec<_>>()[..4],
        "config file and flags disagree"
    );
    assert_eq!(
        std::fs::read(dir.path().join("s1.json")).unwrap(),
        std::fs::read(dir.path().join("s2.json")).unwrap()
    );

    // a flag wins over the file
    let overridden = run_ok(&[
        "solve", "--instance", &inst.display().to_string(),
        "--out", &p(dir.path(), "s3.json"),
        "--config", &p(dir.path(), "cfg.json"),
        "--solver-seed", "78",
    ]);
    assert_ne!(from_config, overridden);
}

#[test]
fn benchmark_preset_has_the_documented_shape() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "generate", "--preset", "paper-650", "--seed", "1",
        "--out", &p(dir.path(), "bench.json"),
    ]);
    let inst = formats::read_instance(&dir.path().join("bench.json")).unwrap();
    assert_eq!(inst.targets.len(), 650);
    assert_eq!(inst.orbits.len(), 4);
    assert!(!inst.windows.is_empty());
    assert_eq!(inst.horizon_s, 86_400.0);
    for w in &inst.windows {
        assert!(w.start_s >= 0.0 && w.end_s <= inst.horizon_s);
        assert!(w.roll_angle_deg.abs() <= 30.0 + 0.05);
        assert!((0.3..=1.0).contains(&w.success_prob));
    }
    // region box targets sit inside their box
    for t in &inst.targets[500..] {
        assert!((3.0..=53.0).contains(&t.latitude_deg));
        assert!((74.0..=133.0).contains(&t.longitude_deg));
    }
}

#[test]
fn solve_rejects_invalid_ccp_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate_small(dir.path(), 22, "inst.json");
    let out = run(&[
        "solve",
        "--instance",
        &inst.display().to_string(),
        "--out",
        &p(dir.path(), "s.json"),
        "--alpha",
        "0.05",
        "--epsilon",
        "0.10",
    ]);
    assert!(
        !out.status.success(),
        "epsilon above alpha must be rejected"
    );
}

#[test]
fn scenario_dump_replays_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = generate_small(dir.path(), 30, "inst.json");
    run_ok(&[
        "solve",
        "--instance",
        &inst_path.display().to_string(),
        "--out",
        &p(dir.path(), "sched.json"),
        "--scenarios-out",
        &p(dir.path(), "scen.json"),
        "--samples",
        "120",
        "--max-iterations",
        "40",
        "--max-failures",
        "20",
        "--scenario-seed",
        "17",
    ]);
    let matrix = formats::read_scenarios(&dir.path().join("scen.json")).unwrap();
    let inst = formats::read_instance(&inst_path).unwrap();
    let again = aeos_core::uncertainty::sample_scenarios(&inst, 120, 17);
    assert_eq!(matrix, again);
}
