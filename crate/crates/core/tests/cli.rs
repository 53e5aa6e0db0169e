use serde_json::{json, Value};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qclab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qclab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, value: Value) -> String {
    let path = dir.join(name);
    fs::write(&path, value.to_string()).unwrap();
    path.to_string_lossy().into_owned()
}

fn manifest(dir: &Path) -> Vec<Value> {
    fs::read_to_string(dir.join("manifest.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn cayley_rows_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", json!({ "params": { "r_max": 3 } }));
    let out = tmp.path().join("out");
    let res = qclab(&["cayley", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(out.join("cayley.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("r,shell,"));
    let pairs: Vec<(u32, u32)> = lines[1..4]
        .iter()
        .map(|l| {
            let mut f = l.split(',');
            (f.next().unwrap().parse().unwrap(), f.next().unwrap().parse().unwrap())
        })
        .collect();
    assert_eq!(pairs, vec![(1, 4), (2, 12), (3, 36)]);
    let entries = manifest(&out);
    assert_eq!(entries.len(), 1);
    let hash = entries[0]["config_hash"].as_str().unwrap();
    assert_eq!(lines.last().unwrap(), &format!("# manifest: config_hash={hash}"));
    assert_eq!(entries[0]["status"], "ok");
    assert_eq!(entries[0]["outputs"][0]["file"], "cayley.csv");
}

#[test]
fn flag_summary_json() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "f.json",
        json!({ "experiment": "flag", "params": { "n_qubits": 1, "pattern": "Y,Z" }, "output_dir": "o" }),
    );
    let res = qclab(&["flag", "--config", &cfg], tmp.path());
    assert_eq!(res.status.code(), Some(0));
    let summary: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("o/flag.json")).unwrap()).unwrap();
    assert_eq!(summary["s"], 2);
    assert_eq!(summary["n_H"], 4);
    assert_eq!(summary["N"], 1);
}

#[test]
fn rerun_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "g.json",
        json!({ "params": { "pairs": 2, "solver": { "starts": 3, "segments": 6 } } }),
    );
    for _ in 0..2 {
        let res = qclab(&["geodesic", "--config", &cfg, "--seed", "5", "--out", "o"], tmp.path());
        assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    }
    let entries = manifest(&tmp.path().join("o"));
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["outputs_hash"], entries[1]["outputs_hash"]);
    assert_eq!(entries[0]["config_hash"], entries[1]["config_hash"]);
    let res = qclab(&["geodesic", "--config", &cfg, "--seed", "6", "--out", "o"], tmp.path());
    assert_eq!(res.status.code(), Some(0));
    let entries = manifest(&tmp.path().join("o"));
    assert_ne!(entries[0]["config_hash"], entries[2]["config_hash"]);
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    let unknown = write_config(p, "a.json", json!({ "params": { "radius": 3 } }));
    assert_eq!(qclab(&["cayley", "--config", &unknown], p).status.code(), Some(2));
    let no_seed = write_config(p, "b.json", json!({}));
    assert_eq!(qclab(&["holder", "--config", &no_seed], p).status.code(), Some(2));
    let mismatch = write_config(p, "c.json", json!({ "experiment": "flag" }));
    assert_eq!(qclab(&["cayley", "--config", &mismatch], p).status.code(), Some(2));
    assert_eq!(qclab(&["cayley", "--config", "missing.json"], p).status.code(), Some(2));
    assert_eq!(qclab(&["nonsense", "--config", &no_seed], p).status.code(), Some(2));
    let bad_angle = write_config(p, "d.json", json!({ "params": { "cos_pi_alpha": "1/2" } }));
    assert_eq!(qclab(&["dioph-scan", "--config", &bad_angle], p).status.code(), Some(2));
}

#[test]
fn unresolved_scan_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "u.json",
        json!({ "params": { "phi": 1.0, "eps_max": 1e-3, "eps_min": 1e-5, "points": 4, "n_max": 2 } }),
    );
    let res = qclab(&["u1-scan", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(res.status.code(), Some(3));
    let entries = manifest(&tmp.path().join("o"));
    assert_eq!(entries[0]["status"], "InsufficientData");
}

#[test]
fn thread_cap_is_honoured() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", json!({ "params": { "r_max": 4 } }));
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_qclab"))
            .args(["cayley", "--config", &cfg, "--out", "o"])
            .env("QCLAB_THREADS", threads)
            .current_dir(tmp.path())
            .output()
            .unwrap()
    };
    assert_eq!(run("1").status.code(), Some(0));
    assert_eq!(run("0").status.code(), Some(2));
    assert_eq!(run("many").status.code(), Some(2));
}
