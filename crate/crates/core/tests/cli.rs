use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kleinlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kleinlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn version_flag() {
    let o = Command::new(env!("CARGO_BIN_EXE_kleinlab")).arg("--version").output().unwrap();
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nsamples = 40\nprobe = 0.4\n").unwrap();
    let out = dir.path().join("out");
    let o = kleinlab(
        &["inversion-demo", "--config", cfg.to_str().unwrap(), "--set", "samples=50", "--seed", "9"],
        &out,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("inversion-demo.csv")).unwrap();
    assert!(csv.starts_with("pair,xi_re,xi_im,xi2_re,xi2_im,trace_defect,square_defect\n"));
    assert_eq!(csv.lines().count(), 51);

    let j: Value = serde_json::from_str(&std::fs::read_to_string(out.join("inversion-demo.json")).unwrap()).unwrap();
    assert_eq!(j["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(j["config"]["samples"], 50);
    assert_eq!(j["config"]["probe"], 0.4);
    assert_eq!(j["config"]["seed"], 9);
    let m = &j["manifest"];
    assert_eq!(m["subcommand"], "inversion-demo");
    let names: Vec<&str> = m["inputs"].as_array().unwrap().iter().map(|i| i["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"config") && names.contains(&"effective-config"));
    assert_eq!(m["input_hash"].as_str().unwrap().len(), 64);

    // stdout carries the result block
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed, j["result"]);
}

#[test]
fn invalid_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "samples = 40\nsamplez = 3\n").unwrap();
    let o = kleinlab(&["lyapunov", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let pres = dir.path().join("g.txt");
    std::fs::write(&pres, "[[1, 1], [0, 1]]\n").unwrap();
    let o = kleinlab(&["arithmeticity", "--presentation", pres.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("minpoly:"), "{}", stderr(&o));

    let o = kleinlab(&["lyapunov", "--set", "samples"], &out);
    assert_eq!(o.status.code(), Some(2));
    let o = kleinlab(&["drift", "--set", "target=padic:5"], &out);
    assert_eq!(o.status.code(), Some(2));
    let o = kleinlab(&["lyapunov", "--preset", "bianchi-zi", "--presentation", pres.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.join("lyapunov.csv").exists());
}

#[test]
fn escaping_orbit_walk_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = kleinlab(&["main-lemma", "--set", "circle=norm5", "--set", "samples=30"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("budget exceeded"));
}

#[test]
fn unwritable_output_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let o = kleinlab(&["inversion-demo", "--set", "samples=30"], &blocker.join("sub"));
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}
