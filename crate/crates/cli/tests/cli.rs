use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use skycov::experiments::Manifest;
use skycov::ScenarioConfig;
use tempfile::TempDir;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn skycov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skycov")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &TempDir, cfg: &ScenarioConfig) -> String {
    let p = dir.path().join("scenario.toml");
    fs::write(&p, cfg.to_toml_string()).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn ccdf_writes_csv_and_manifest() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ccdf.csv");
    let cfg = config("reference_drone.toml");
    let o = skycov(&[
        "ccdf", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(),
        "--grid=-5,0,5", "--engines", "analytic,monte_carlo", "--mc-n", "2000", "--seed", "9",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("threshold_db,engine,value,stderr"));
    assert_eq!(lines.count(), 6);
    let m = Manifest::from_json(&fs::read_to_string(dir.path().join("ccdf.manifest.json")).unwrap()).unwrap();
    assert_eq!((m.tool.as_str(), m.seed, m.mc_n), ("skycov", 9, 2000));
}

#[test]
fn replay_reproduces_csv_exactly() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.csv");
    let cfg = config("reference_drone.toml");
    let o = skycov(&[
        "sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(),
        "--param", "bs_density_and_height", "--grid", "1:20,1:40,10:20,10:40",
        "--engines", "analytic,mc", "--mc-n", "1000",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = dir.path().join("sweep.manifest.json");
    let again = dir.path().join("again.csv");
    let r = skycov(&["replay", "--manifest", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(r.status.success(), "{}", stderr(&r));
    let first = fs::read(&out).unwrap();
    assert_eq!(first, fs::read(&again).unwrap());
    assert!(String::from_utf8(first).unwrap().starts_with("lambda_bs,h_bs,engine,coverage,stderr,argmax\n"));
}

#[test]
fn ground_ccdf_skips_theorem2() {
    let cfg = config("reference_ground.toml");
    let o = skycov(&["ccdf", "--config", cfg.to_str().unwrap(), "--grid", "0", "--mc-n", "500"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("note: theorem2 skipped"));
    let csv = String::from_utf8(o.stdout).unwrap();
    let engines: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(engines, ["analytic", "monte_carlo"]);
}

#[test]
fn empty_grid_is_a_config_error() {
    let cfg = config("reference_drone.toml");
    let o = skycov(&["sweep", "--config", cfg.to_str().unwrap(), "--param", "drone_altitude", "--grid", ""]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn invalid_config_names_the_field() {
    let dir = TempDir::new().unwrap();
    let mut cfg = ScenarioConfig::reference_drone();
    cfg.lambda_bs = -1.0;
    let path = write_config(&dir, &cfg);
    let o = skycov(&["ccdf", "--config", &path, "--grid", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lambda_bs"), "{}", stderr(&o));
    let v = skycov(&["validate", "--config", &path]);
    assert_eq!(v.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let o = skycov(&["validate", "--config", "/nonexistent/skycov.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--config"));
}

#[test]
fn analytic_engine_rejects_large_m() {
    let dir = TempDir::new().unwrap();
    let mut cfg = ScenarioConfig::reference_drone();
    cfg.channel.m_los = 11;
    let path = write_config(&dir, &cfg);
    let o = skycov(&["ccdf", "--config", &path, "--grid", "0", "--engines", "analytic"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let mc = skycov(&["ccdf", "--config", &path, "--grid", "0", "--engines", "monte_carlo", "--mc-n", "200"]);
    assert!(mc.status.success(), "{}", stderr(&mc));
}

#[test]
fn interference_needs_a_drone() {
    let cfg = config("reference_ground.toml");
    let o = skycov(&["interference", "--config", cfg.to_str().unwrap(), "--grid", "50,100"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn validate_reports_geometry() {
    for name in ["reference_drone.toml", "reference_ground.toml", "drone_distributed.toml"] {
        let o = skycov(&["validate", "--config", config(name).to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        let text = String::from_utf8(o.stdout).unwrap();
        assert!(text.starts_with("ok: "), "{text}");
    }
    let o = skycov(&["validate", "--config", config("reference_drone.toml").to_str().unwrap()]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("r0 = 570.1"));
}

#[test]
fn worker_count_from_environment() {
    let cfg = config("reference_drone.toml");
    let args = ["ccdf", "--config", cfg.to_str().unwrap(), "--grid", "0,3", "--engines", "mc", "--mc-n", "3000"];
    let run = |workers: &str| {
        Command::new(env!("CARGO_BIN_EXE_skycov")).args(args).env("SKYCOV_WORKERS", workers).output().unwrap()
    };
    let (one, three) = (run("1"), run("3"));
    assert!(one.status.success() && three.status.success());
    assert_eq!(one.stdout, three.stdout);
    assert_eq!(run("many").status.code(), Some(2));
}
