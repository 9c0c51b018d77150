use std::path::Path;
use std::process::{Command, Output};

fn dgbo(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgbo"))
        .args(args)
        .current_dir(dir)
        .env_remove("DGBO_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

const EVOLVE: &str = r#"
[params]
a = 0.5

[grid]
n = 256
half_length = 20.0

[evolution]
dt = 0.01
t_end = 0.2
snapshot_stride = 5

[data]
kind = "gaussian"
amp = 0.5
width = 1.0
"#;

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn evolve_writes_ledger_field_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("ev.toml"), EVOLVE).unwrap();
    let o = dgbo(tmp.path(), &["evolve", "--config", "ev.toml", "--out", "run"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let ledger = read(tmp.path().join("run/ledger.csv"));
    assert!(ledger.starts_with("t,I1,I2,I3,M\n"));
    assert_eq!(ledger.lines().count(), 1 + 5);
    let field = read(tmp.path().join("run/field.csv"));
    assert!(field.starts_with("x,u\n"));
    assert_eq!(field.lines().count(), 1 + 256);
    let m: serde_json::Value = serde_json::from_str(&read(tmp.path().join("run/manifest.json"))).unwrap();
    assert_eq!(m["command"], "evolve");
    assert_eq!(m["config"]["grid"]["n"], 256);
    assert_eq!(m["config"]["data"]["kind"], "gaussian");
    // no temp files left behind
    let names: Vec<_> = std::fs::read_dir(tmp.path().join("run")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 4, "{names:?}");
}

#[test]
fn identical_config_gives_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("ev.toml"), EVOLVE).unwrap();
    assert_eq!(code(&dgbo(tmp.path(), &["evolve", "--config", "ev.toml", "--out", "a"])), 0);
    assert_eq!(code(&dgbo(tmp.path(), &["--sequential", "evolve", "--config", "ev.toml", "--out", "b"])), 0);
    for f in ["ledger.csv", "field.csv"] {
        assert_eq!(read(tmp.path().join("a").join(f)), read(tmp.path().join("b").join(f)), "{f}");
    }
}

#[test]
fn unknown_key_is_malformed() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("ev.toml"), format!("{EVOLVE}colour = \"red\"\n")).unwrap();
    let o = dgbo(tmp.path(), &["evolve", "--config", "ev.toml", "--out", "x"]);
    assert_eq!(code(&o), 64);
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
    assert!(!tmp.path().join("x").exists());
}

#[test]
fn bad_arguments_are_malformed() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&dgbo(tmp.path(), &["frobnicate"])), 64);
    assert_eq!(code(&dgbo(tmp.path(), &["evolve", "--config", "missing.toml"])), 64);
    assert_eq!(code(&dgbo(tmp.path(), &["experiment", "no-such-thing"])), 64);
    assert_eq!(code(&dgbo(tmp.path(), &["stein", "--alpha", "1.5", "--b", "0.3"])), 64);
    assert_eq!(code(&dgbo(tmp.path(), &["--help"])), 0);
}

#[test]
fn out_of_range_parameter_is_malformed() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("ev.toml"), EVOLVE.replace("a = 0.5", "a = 1.5")).unwrap();
    assert_eq!(code(&dgbo(tmp.path(), &["evolve", "--config", "ev.toml"])), 64);
}

#[test]
fn experiment_id_must_match_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "experiment = \"t-star\"\n[params]\na = 0.5\n[grid]\nn = 256\nhalf_length = 20.0\n";
    std::fs::write(tmp.path().join("e.toml"), cfg).unwrap();
    assert_eq!(code(&dgbo(tmp.path(), &["experiment", "k-momentum", "--config", "e.toml"])), 64);
}

#[test]
fn stein_member_verdict() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dgbo(tmp.path(), &["stein", "--alpha", "0.6", "--b", "0.3", "--out", "s"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "member");
    let csv = read(tmp.path().join("s/stein.csv"));
    assert!(csv.starts_with("eta,value\n"));
    let o = dgbo(tmp.path(), &["stein", "--alpha", "0.2", "--b", "0.9", "--out", "s2"]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "non-member");
}

#[test]
fn identity_report_and_verdict_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dgbo(tmp.path(), &["identities", "--which", "weight1-noderivative", "--a", "0.5", "--out", "i"]);
    assert_eq!(code(&o), 0);
    let r: serde_json::Value = serde_json::from_str(&read(tmp.path().join("i/report.json"))).unwrap();
    assert!(r["report"]["relative_residual"].as_f64().unwrap() < 1e-8);
    // far too coarse to resolve the data: the residual check fails
    let o = dgbo(tmp.path(), &["identities", "--which", "weight1", "--n", "16", "--out", "j"]);
    assert_eq!(code(&o), 2);
    assert!(tmp.path().join("j/report.json").exists());
}

#[test]
fn runtime_error_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = EVOLVE.replace("kind = \"gaussian\"\namp = 0.5\nwidth = 1.0", "kind = \"file\"\npath = \"nowhere.csv\"");
    std::fs::write(tmp.path().join("ev.toml"), cfg).unwrap();
    assert_eq!(code(&dgbo(tmp.path(), &["evolve", "--config", "ev.toml"])), 1);
}

#[test]
fn file_data_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("ev.toml"), EVOLVE).unwrap();
    assert_eq!(code(&dgbo(tmp.path(), &["evolve", "--config", "ev.toml", "--out", "a"])), 0);
    let cfg = EVOLVE
        .replace("kind = \"gaussian\"\namp = 0.5\nwidth = 1.0", "kind = \"file\"\npath = \"a/field.csv\"")
        .replace("t_end = 0.2", "t_end = 0.0");
    std::fs::write(tmp.path().join("f.toml"), cfg).unwrap();
    let o = dgbo(tmp.path(), &["evolve", "--config", "f.toml", "--out", "b"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(tmp.path().join("a/field.csv")), read(tmp.path().join("b/field.csv")));
}

#[test]
fn out_dir_from_environment_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec!["stein", "--alpha", "0.6", "--b", "0.3"];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_dgbo"))
            .args(&args)
            .current_dir(tmp.path())
            .env("DGBO_OUT_DIR", "from-env")
            .output()
            .unwrap()
    };
    assert_eq!(code(&run(&[])), 0);
    assert!(tmp.path().join("from-env/stein.csv").exists());
    assert_eq!(code(&run(&["--out", "from-flag"])), 0);
    assert!(tmp.path().join("from-flag/manifest.json").exists());
}

#[test]
fn t_star_experiment_from_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"
[params]
a = 0.5

[grid]
n = 4096
half_length = 100.0

[evolution]
dt = 0.001
t_end = 2.4

[data]
kind = "derivative-of-gaussian"
amp = 2.8284271247461903
width = 1.0
"#;
    std::fs::write(tmp.path().join("t.toml"), cfg).unwrap();
    let o = dgbo(tmp.path(), &["experiment", "t-star", "--config", "t.toml", "--out", "t"]);
    // coarse grid: the root is resolved, c(t) to 1e-6 is not
    assert!(matches!(code(&o), 0 | 2), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&read(tmp.path().join("t/report.json"))).unwrap();
    let gap = r["report"]["relative_gap"].as_f64().unwrap();
    assert!(gap < 0.01, "{gap}");
    assert!((r["report"]["t_star_formula"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    let m: serde_json::Value = serde_json::from_str(&read(tmp.path().join("t/manifest.json"))).unwrap();
    assert_eq!(m["config"]["experiment"], "t-star");
    assert!(read(tmp.path().join("t/ledger.csv")).starts_with("t,I1,I2,I3,M\n"));
}
