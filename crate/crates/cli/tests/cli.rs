use std::path::Path;
use std::process::{Command, Output};

fn perspec(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perspec")).args(args).current_dir(dir).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

const RANDOM: &str = r#"
period = [2, 3]
grid = 12
refine = 6
[potential]
kind = "random"
seed = 11
norm = "0.8"
[ids]
energies = { min = "-5", max = "5", count = 21 }
theta_n = 16
box_sizes = [3]
[measure]
energies = { min = "-5", max = "5", count = 101 }
eps = "0.05"
theta_n = 16
source = [{ site = [0, 0], re = "1" }]
[certify]
energy = "0.37"
samples = 4
"#;

#[test]
fn staircase_example_has_three_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let out = perspec(&["example", "staircase", "--period", "2,2"], dir.path());
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["result"]["gaps"].as_array().unwrap().len(), 3);
    assert_eq!(v["config"]["period"], serde_json::json!([2, 2]));
}

#[test]
fn checkerboard_spectrum_lists_the_gap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cb.toml", "period = [2, 2]\n[potential]\nkind = \"checkerboard\"\ndelta = \"0.5\"\n");
    let out = perspec(&["spectrum", "--config", &cfg], dir.path());
    assert!(out.status.success());
    let v = json(&out);
    let gaps = v["result"]["gaps"].as_array().unwrap();
    assert_eq!(gaps.len(), 1);
    assert!((gaps[0]["lower"].as_f64().unwrap() + 0.5).abs() < 1e-4);
    assert!((gaps[0]["upper"].as_f64().unwrap() - 0.5).abs() < 1e-4);
    assert!(v["tolerances"]["extrema_tolerance"].as_f64().unwrap() > 0.0);
    assert_eq!(v["tool"], "perspec");
}

#[test]
fn zero_period_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "period = [2, 0]\n");
    let out = perspec(&["spectrum", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["field"], "period[1]");
    assert_eq!(err["error"]["kind"], "ConfigError");
}

#[test]
fn malformed_numbers_point_at_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "period = [2]\ngrid = \"many\"\n");
    let out = perspec(&["spectrum", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["field"], "grid");
}

#[test]
fn non_coprime_certification_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "period = [2, 4]\n[certify]\nenergy = 0\n");
    let out = perspec(&["certify", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "NotCoprime");
}

#[test]
fn failed_ratio_check_exits_with_assertion_code() {
    // δ_n of a staircase potential sits almost entirely in one band, where
    // the density of states only carries weight 1/P.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "m.toml",
        "period = [2, 3]\n[potential]\nkind = \"staircase\"\n[measure]\nenergies = { min = \"0\", max = \"60\", count = 3001 }\neps = \"0.05\"\ntheta_n = 16\ncheck_ratio = true\nsource = [{ site = [1, 2], re = \"1\" }]\n",
    );
    let out = perspec(&["measure", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.toml", RANDOM);
    for cmd in ["bands", "spectrum", "ids", "measure", "certify"] {
        let a = perspec(&[cmd, "--config", &cfg, "--out", "a.json", "--plot"], dir.path());
        let b = perspec(&[cmd, "--config", &cfg, "--out", "b.json", "--plot", "--threads", "1"], dir.path());
        assert!(a.status.success() && b.status.success(), "{cmd}: {}", String::from_utf8_lossy(&a.stderr));
        let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
        assert_eq!(read("a.json"), read("b.json"), "{cmd}");
        assert_eq!(read("a.svg"), read("b.svg"), "{cmd}");
        let csv = cmd.to_string() + ".csv";
        let name = if cmd == "spectrum" { "spectrum.csv" } else { csv.as_str() };
        assert_eq!(read(&format!("a.{name}")), read(&format!("b.{name}")), "{cmd}");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.toml", RANDOM);
    let a = json(&perspec(&["spectrum", "--config", &cfg], dir.path()));
    let b = json(&perspec(&["spectrum", "--config", &cfg, "--seed", "12"], dir.path()));
    assert_eq!(b["config"]["potential"]["seed"], 12);
    assert_ne!(a["result"]["bands"], b["result"]["bands"]);
}

#[test]
fn construct_lp_reports_stages() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "lp.toml", "period = [2, 3]\ngrid = 12\nrefine = 6\n[lp]\nstages = 2\nseed = 5\nfraction = \"0.5\"\n");
    let out = perspec(&["construct-lp", "--config", &cfg, "--out", "lp.json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("lp.json")).unwrap()).unwrap();
    let stages = v["result"]["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 2);
    assert!(stages.iter().all(|s| s["interval"] == true && s["margin_after"].as_f64().unwrap() > 0.0));
    let csv = std::fs::read_to_string(dir.path().join("lp.stages.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}
