use std::path::PathBuf;

use proptest::prelude::*;
use truthful_cascade::harness::{
    emit_csv, read_summary, run_cli, run_summary, run_sweep, ExperimentConfig, HarnessError, SummaryRow, SweepAxis,
    SweepSpec,
};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("truthful-cascade-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const BASE: &str = r#"
seed = 5
horizon = 300
replications = 2

[instance]
ads = 4
slots = 2

[mechanism]
kind = "avcg1"
tune = "T1"
"#;

fn row() -> impl Strategy<Value = SummaryRow> {
    let real = prop_oneof![any::<f64>(), Just(f64::NAN), Just(f64::INFINITY), Just(-0.0)];
    (real.clone(), any::<u64>(), real.clone(), real.clone(), real.clone(), real.clone(), real.clone(), real, any::<u64>())
        .prop_map(|(value, replication, rt, rt_sw, rt_dev, bound, relative, stderr, seed)| SummaryRow {
            axis: "T".into(),
            value,
            replication,
            rt,
            rt_sw,
            rt_dev,
            bound,
            relative,
            stderr,
            seed,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn summary_csv_round_trips(rows in prop::collection::vec(row(), 0..20), tag in any::<u32>()) {
        let path = scratch(&format!("roundtrip-{tag}.csv"));
        emit_csv(&rows, &path).unwrap();
        let back = read_summary(&path).unwrap();
        let mut sorted = rows.clone();
        sorted.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.replication.cmp(&b.replication)));
        prop_assert_eq!(back.len(), sorted.len());
        for (a, b) in back.iter().zip(&sorted) {
            prop_assert!(a.same_bits(b), "{:?} vs {:?}", a, b);
        }
    }
}

#[test]
fn empty_summary_is_header_only() {
    let path = scratch("empty.csv");
    emit_csv(&[], &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "axis,value,replication,RT,RT_sw,RT_dev,bound,relative,stderr,seed\n");
}

#[test]
fn unknown_keys_are_rejected() {
    for bad in [
        format!("{BASE}\nextra = 1\n"),
        BASE.replace("slots = 2", "slots = 2\nspeed = 3"),
        BASE.replace("tune = \"T1\"", "tune = \"T1\"\ntemperature = 0.5"),
        BASE.replace("tune = \"T1\"", "tune = \"T42\""),
        BASE.replace("kind = \"avcg1\"", "kind = \"gsp\""),
    ] {
        assert!(matches!(ExperimentConfig::from_toml(&bad), Err(HarnessError::Config(_) | HarnessError::Model(_))), "{bad}");
    }
}

#[test]
fn single_run_row_reports_relative_regret() {
    let cfg = ExperimentConfig::from_toml(&BASE.replace("replications = 2", "replications = 1")).unwrap();
    let rows = run_summary(&cfg).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].relative, rows[0].rt / rows[0].bound);
}

#[test]
fn sweep_emits_one_sorted_row_per_point_and_replication() {
    let base = ExperimentConfig::from_toml(BASE).unwrap();
    let spec = SweepSpec::new(SweepAxis::T, vec![200.0, 300.0, 400.0], base).unwrap();
    let rows = run_sweep(&spec).unwrap();
    assert_eq!(rows.len(), 6);
    let path = scratch("sweep.csv");
    emit_csv(&rows, &path).unwrap();
    let back = read_summary(&path).unwrap();
    let keys: Vec<(f64, u64)> = back.iter().map(|r| (r.value, r.replication)).collect();
    assert_eq!(keys, [(200.0, 0), (200.0, 1), (300.0, 0), (300.0, 1), (400.0, 0), (400.0, 1)]);
    assert!(back.iter().all(|r| r.axis == "T" && r.seed == 5));
    assert!(SweepSpec::new(SweepAxis::T, vec![3.0, 2.0], ExperimentConfig::from_toml(BASE).unwrap()).is_err());
}

#[test]
fn sweeps_are_reproducible() {
    let base = ExperimentConfig::from_toml(BASE).unwrap();
    let spec = SweepSpec::new(SweepAxis::N, vec![3.0, 5.0], base).unwrap();
    let (a, b) = (run_sweep(&spec).unwrap(), run_sweep(&spec).unwrap());
    assert!(a.iter().zip(&b).all(|(x, y)| x.same_bits(y)));
}

#[test]
fn cli_round_trip() {
    let cfg = scratch("cli.toml");
    std::fs::write(&cfg, BASE).unwrap();
    let (trace, summary, sweep) = (scratch("cli-trace.csv"), scratch("cli-summary.csv"), scratch("cli-sweep.csv"));
    let s = |p: &PathBuf| p.to_str().unwrap().to_string();

    let code = run_cli(["tc", "run", "--config", &s(&cfg), "--out", &s(&trace), "--summary", &s(&summary)]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("replication,t,phase,ranking,clicked,expected_revenue,realized_revenue\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 300);
    assert_eq!(read_summary(&summary).unwrap().len(), 2);

    let code = run_cli(["tc", "sweep", "--config", &s(&cfg), "--axis", "K", "--points", "1,2,3", "--out", &s(&sweep)]);
    assert_eq!(code, 0);
    assert_eq!(read_summary(&sweep).unwrap().len(), 6);

    assert_eq!(run_cli(["tc", "sweep", "--config", &s(&cfg), "--out", &s(&sweep)]), 2);
    assert_eq!(run_cli(["tc", "sweep", "--config", &s(&cfg), "--axis", "gamma", "--points", "1", "--out", &s(&sweep)]), 2);
    std::fs::write(&cfg, format!("{BASE}\nbogus = true\n")).unwrap();
    assert_eq!(run_cli(["tc", "run", "--config", &s(&cfg), "--out", &s(&trace)]), 2);
}

#[test]
fn cli_bounds_and_verify() {
    assert_eq!(run_cli(["tc", "bounds", "--theorem", "T7", "--N", "8", "--T", "512"]), 0);
    assert_eq!(run_cli(["tc", "bounds", "--theorem", "T1", "--K", "2", "--N", "10", "--T", "10000", "--lambda-min", "0.8"]), 0);
    assert_eq!(run_cli(["tc", "bounds", "--theorem", "T1", "--N", "10", "--T", "3"]), 2);
    assert_eq!(run_cli(["tc", "verify"]), 0);
    assert_eq!(run_cli(["tc", "frobnicate"]), 2);
}
