use std::path::Path;

use super::real_main;
use crate::error::{CliError, EXIT_CONFIG, EXIT_DATA};
use crate::tables::{parse_summaries, COMPARISON_HEADER, SUMMARIES_HEADER};

fn cli(args: &[&str]) -> Result<(), CliError> {
    let mut argv = vec!["sailswarm".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    real_main(argv)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn run_writes_one_row_per_tick() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let traj = dir.path().join("t.csv");
    cli(&["run", "--seed", "1", "--out", p(&out), "--trajectory", p(&traj)]).unwrap();
    let text = read(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,polarization,hull_area,unsafe_pairs"));
    assert_eq!(lines.count(), 301);
    assert_eq!(read(&traj).lines().count(), 1 + 301 * 10);
}

#[test]
fn run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        cli(&["run", "--seed", "4", "--environment", "gusty10", "--out", p(out)]).unwrap();
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"n_robots": 6, "horizon": 50, "window": [10, 50]}"#).unwrap();
    let out = dir.path().join("m.csv");
    cli(&["run", "--config", p(&cfg), "--set", "dt=0.5", "--out", p(&out)]).unwrap();
    assert_eq!(read(&out).lines().count(), 1 + 101);
}

#[test]
fn missing_config_is_config_error_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let err = cli(&["run", "--config", p(&dir.path().join("nope.json")), "--out", p(&out)]).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_CONFIG);
    assert!(!out.exists());
}

#[test]
fn parse_error_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"n_robots\": 10,\n  \"dt\": oops\n}\n").unwrap();
    let err = cli(&["run", "--config", p(&cfg), "--out", p(&dir.path().join("m.csv"))]).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_CONFIG);
    assert!(err.to_string().contains("line 3"), "{err}");
}

#[test]
fn unknown_override_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = cli(&["run", "--flock.zones.r_nope", "3", "--out", p(&dir.path().join("m.csv"))]).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_CONFIG);
}

#[test]
fn sweep_then_analyze_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    cli(&[
        "sweep",
        "--seeds",
        "3",
        "--jobs",
        "2",
        "--sweep.environments",
        r#"["steady5","gusty10"]"#,
        "--sweep.gammas=[0.01,1,10]",
        "--horizon",
        "120",
        "--window",
        "[40,120]",
        "--out",
        p(&out),
    ])
    .unwrap();
    let summaries = out.join("summaries.csv");
    let text = read(&summaries);
    assert_eq!(text.lines().next().unwrap(), SUMMARIES_HEADER.join(","));
    let rows = parse_summaries(&text).unwrap();
    assert_eq!(rows.len(), 2 * 4 * 3);

    let manifest: serde_json::Value = serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["seeds"], serde_json::json!([1, 2, 3]));
    assert_eq!(manifest["config_digest"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);

    let cmp = dir.path().join("cmp.csv");
    let svg = dir.path().join("cmp.svg");
    cli(&["analyze", p(&summaries), "--out", p(&cmp), "--svg", p(&svg), "--table3"]).unwrap();
    let text = read(&cmp);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), COMPARISON_HEADER.join(","));
    assert_eq!(lines.count(), 2 * 3 * 3);
    assert!(read(&svg).starts_with("<svg"));
}

#[test]
fn seeds_flag_scales_default_plan() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    cli(&["sweep", "--seeds", "5", "--horizon", "20", "--window", "[0,20]", "--out", p(&out)]).unwrap();
    assert_eq!(read(&out.join("summaries.csv")).lines().count(), 1 + 520);
}

#[test]
fn unpaired_seeds_are_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.csv");
    std::fs::write(
        &s,
        "env,controller,gamma,seed,median_polarization,median_hull_area,cumulative_unsafe\n\
         steady5,baseline,,1,0.7,200,10\n\
         steady5,baseline,,2,0.7,210,12\n\
         steady5,speed_weighted,0.01,1,0.75,190,8\n\
         steady5,speed_weighted,0.01,3,0.75,190,8\n",
    )
    .unwrap();
    let out = dir.path().join("c.csv");
    let err = cli(&["analyze", p(&s), "--out", p(&out)]).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_DATA);
    let msg = err.to_string();
    assert!(msg.contains("steady5") && msg.contains("0.01"), "{msg}");
    assert!(!out.exists());
}

#[test]
fn identical_arms_are_never_significant() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.csv");
    let mut text = String::from("env,controller,gamma,seed,median_polarization,median_hull_area,cumulative_unsafe\n");
    for seed in 1..=12 {
        let (phi, area, c) = (0.5 + seed as f64 / 100.0, 200.0 + seed as f64, seed * 3);
        text.push_str(&format!("gusty5,baseline,,{seed},{phi},{area},{c}\n"));
        text.push_str(&format!("gusty5,speed_weighted,0.5,{seed},{phi},{area},{c}\n"));
    }
    std::fs::write(&s, text).unwrap();
    let out = dir.path().join("c.csv");
    cli(&["analyze", p(&s), "--out", p(&out)]).unwrap();
    let body = read(&out);
    assert_eq!(body.lines().count(), 4);
    assert!(body.lines().skip(1).all(|l| l.ends_with(",false")));
}

#[test]
fn malformed_summaries_are_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.csv");
    std::fs::write(&s, "env,controller\nsteady5,baseline\n").unwrap();
    let err = cli(&["analyze", p(&s), "--out", p(&dir.path().join("c.csv"))]).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_DATA);
}
