use std::path::Path;
use std::process::{Command, Output};

use mexp_cli::{Command as Cmd, ExperimentConfig};
use proptest::prelude::*;

fn mexp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mexp"))
        .args(args)
        .env_remove("MEXP_SEED")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn rotation_decay_csv_with_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rot.csv");
    let o = mexp(&["decay", "--system", "rotation", "--samples", "20000", "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["n", "estimate", "ci_low", "ci_high"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 20);
    for r in &rows {
        let (est, lo, hi): (f64, f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!(lo <= 0.1 && 0.1 <= hi, "row {r:?}");
        assert!((0.09..=0.11).contains(&est));
    }
    let side = json(&dir.path().join("rot.csv.json"));
    assert_eq!(side["command"], "decay");
    assert_eq!(side["config"]["system"], "rotation");
    let timing = json(&dir.path().join("rot.csv.timing.json"));
    assert!(timing["runtime_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn exit_codes() {
    let o = mexp(&["decay", "--system", "doubling", "--sided", "two", "--samples", "100"]);
    assert_eq!(o.status.code(), Some(3));
    let o = mexp(&["decay", "--system", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mexp(&["verdict", "--system", "rotation", "--format", "markdown"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mexp(&["explain", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mexp(&["battery", "--cases", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn explain_and_list() {
    let o = mexp(&["explain", "thD"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("compact interval"));
    let o = mexp(&["explain", "circle1"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("Denjoy"));
    let o = mexp(&["--list"]);
    let text = String::from_utf8_lossy(&o.stdout).into_owned();
    for name in ["doubling", "cat", "denjoy", "lebesgue", "denjoy-minimal"] {
        assert!(text.contains(name), "{name} missing from {text}");
    }
}

#[test]
fn interval_square_verdict() {
    let o = mexp(&[
        "verdict", "--system", "interval-square", "--delta", "0.1", "--samples", "2000", "--x-probes", "20",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["verdict"], "evidence_not_expansive");
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# rotation run\nsystem = rotation\ndelta = 0.2\nn_max = 4\nsamples = 2000\nseed = 11\nformat = json\n",
    )
    .unwrap();
    let o = mexp(&["decay", "--config", path(&cfg), "--delta", "0.05"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["seed"], 11);
    assert_eq!(v["config"]["delta"], 0.05);
    assert_eq!(v["config"]["n_max"], 4);
}

#[test]
fn seed_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_mexp"))
        .args(["decay", "--system", "rotation", "--nmax", "3", "--samples", "500", "--format", "json"])
        .env("MEXP_SEED", "42")
        .output()
        .unwrap();
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["seed"], 42);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for (i, w) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("e{i}.json"));
        let o = mexp(&[
            "--workers", w, "entropy", "--system", "doubling", "--samples", "2000", "--x-probes", "20", "--nmax", "8",
            "--seed", "5", "--out", path(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn battery_subset_markdown() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.md");
    let o = mexp(&["battery", "--cases", "thA,atomic", "--seed", "7", "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let md = std::fs::read_to_string(&out).unwrap();
    assert!(md.starts_with("# Battery report"));
    assert!(md.contains("## thA: pass"));
    let side = json(&dir.path().join("b.md.json"));
    assert_eq!(side["result"]["cases"].as_array().unwrap().len(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_text_round_trips(
        delta in prop::option::of(1e-6..1.0f64),
        grid in prop::option::of(prop::collection::vec(1e-6..1.0f64, 1..4)),
        n_max in prop::option::of(1u32..64),
        alpha in 0.0..1.0f64,
        seed in any::<u64>(),
        system in prop::option::of("[a-z][a-z-]{0,12}"),
    ) {
        let mut c = ExperimentConfig::new(Cmd::Entropy);
        c.delta = delta;
        c.delta_grid = grid;
        c.n_max = n_max;
        c.system = system;
        c.system_params.insert("alpha".into(), alpha);
        c.seed = seed;
        let back = ExperimentConfig::from_text(&c.to_text(), Cmd::Decay).unwrap();
        prop_assert_eq!(back, c);
    }
}
