use ppmsync::config::{Engine, ExperimentConfig};
use ppmsync::harness::{run_trials, sweep, verify_cost_equivalence, write_csv, Experiment, SweepGrid};

fn config(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

fn near_noiseless_dmc(idc: &str, trials: usize) -> ExperimentConfig {
    config(&format!(
        r#"{{
            "scheme": "dmc",
            "channel": {{ "type": "bsc", "crossover": 1e-6 }},
            "idc": {idc},
            "design_idc": {{ "type": "deterministic", "k": 1 }},
            "messages": 256,
            "epsilon": 0.25,
            "delta": 0.5,
            "trials": {trials},
            "base_seed": 9,
            "calibration_trials": 2000
        }}"#
    ))
}

fn gauss(messages: usize, trials: usize) -> ExperimentConfig {
    config(&format!(
        r#"{{
            "scheme": "gauss",
            "channel": {{ "type": "gaussian", "eta2": 1.0 }},
            "idc": {{ "type": "deletion", "d": 0.1 }},
            "messages": {messages},
            "epsilon": 0.2,
            "delta": 0.5,
            "trials": {trials},
            "base_seed": 3
        }}"#
    ))
}

#[test]
fn reports_are_reproducible() {
    let c = gauss(64, 40);
    let mut a = run_trials(&c).unwrap();
    let mut b = run_trials(&c).unwrap();
    a.wall_time_secs = 0.0;
    b.wall_time_secs = 0.0;
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());

    let mut other = c.clone();
    other.base_seed += 1;
    let outcomes = Experiment::new(&other).unwrap().run_range(0..40).unwrap();
    let same = Experiment::new(&c).unwrap().run_range(0..40).unwrap();
    assert_ne!(
        outcomes.iter().map(|o| o.message).collect::<Vec<_>>(),
        same.iter().map(|o| o.message).collect::<Vec<_>>()
    );
}

#[test]
fn clean_channel_never_errs() {
    let r = run_trials(&near_noiseless_dmc(r#"{ "type": "deterministic", "k": 1 }"#, 200)).unwrap();
    assert_eq!(r.errors, 0, "{r:?}");
    assert_eq!(r.ci_low, 0.0);
    assert_eq!(r.alignment.properties_hold, r.alignment.typical_trials);
}

#[test]
fn full_deletion_always_errs() {
    let c = near_noiseless_dmc(r#"{ "type": "deletion", "d": 1.0 }"#, 50);
    let r = run_trials(&c).unwrap();
    assert_eq!(r.errors, r.trials_run);
    assert_eq!(r.missed_detections, r.trials_run);
    assert_eq!(r.ci_high, 1.0);
}

#[test]
fn compact_engine_agrees_with_materialized() {
    let mut c = gauss(64, 300);
    c.engine = Engine::Materialized;
    let m = run_trials(&c).unwrap();
    c.engine = Engine::Compact;
    let k = run_trials(&c).unwrap();
    assert_eq!(k.engine, Engine::Compact);
    assert!(m.ci_low <= k.ci_high && k.ci_low <= m.ci_high, "{} vs {}", m.error_rate, k.error_rate);
    assert_eq!(m.rate_identity, k.rate_identity);
}

#[test]
fn empty_sweep_writes_header_only() {
    let grid: SweepGrid = serde_json::from_str(r#"{ "base": {}, "points": [] }"#).unwrap();
    let rows = sweep(&grid);
    assert!(rows.is_empty());
    let mut out = Vec::new();
    write_csv(&rows, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("point,scheme,"));
}

#[test]
fn sweep_reports_failing_points_in_place() {
    let grid: SweepGrid = serde_json::from_str(
        r#"{
            "base": {
                "scheme": "gauss",
                "channel": { "type": "gaussian", "eta2": 1.0 },
                "idc": { "type": "deletion", "d": 0.1 },
                "messages": 64, "epsilon": 0.2, "delta": 0.5, "trials": 10
            },
            "points": [ { "messages": 2 }, {}, { "epsilon": 1.5 } ]
        }"#,
    )
    .unwrap();
    let rows = sweep(&grid);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1].status, "ok");
    assert_eq!(rows[1].trials, 10);
    for i in [0, 2] {
        assert_eq!(rows[i].point, i);
        assert_ne!(rows[i].status, "ok");
        assert_eq!(rows[i].trials, 0);
    }
}

#[test]
fn cost_equivalence_without_drift() {
    let c = config(
        r#"{
            "scheme": "dmc",
            "channel": { "type": "bsc", "crossover": 0.2 },
            "idc": { "type": "deterministic", "k": 1 },
            "design_idc": { "type": "deletion", "d": 0.1 },
            "messages": 16, "epsilon": 0.5, "delta": 0.5, "trials": 1,
            "calibration_trials": 1000
        }"#,
    );
    let r = verify_cost_equivalence(&c, 500).unwrap();
    assert_eq!(r.mu, 1.0);
    assert_eq!(r.max_abs_trial_difference, 0.0);
    assert!(r.within(4.0));
}
