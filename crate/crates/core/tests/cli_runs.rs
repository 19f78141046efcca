//! End-to-end runs of the command-line tool.

use std::path::Path;
use std::process::Command;

use meshbias::{paths, Architecture};
use serde_json::Value;

fn meshbias(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_meshbias"))
        .args(args)
        .env("MESHBIAS_WORKERS", "2")
        .output()
        .unwrap()
}

fn stdout(o: &std::process::Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read_csv(text: &str) -> Vec<Vec<String>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn paths_csv_matches_the_library() {
    let out = stdout(&meshbias(&["paths", "--m", "50", "--arch", "clements"]));
    let rows = read_csv(&out);
    assert_eq!(rows.len(), 51);
    assert!(rows.iter().all(|r| r.len() == 51));
    assert_eq!(rows[0][1], "1");
    assert_eq!(rows[0][50], "50");
    for i in [1, 17, 50] {
        for j in [1, 25, 50] {
            let want = paths::big_log10(&paths::count(50, Architecture::Rectangular, i, j).unwrap());
            let got: f64 = rows[i][j].parse().unwrap();
            assert_eq!(got, want);
        }
    }
}

#[test]
fn zero_noise_zeta_is_all_zero() {
    let out = stdout(&meshbias(&["zeta", "--m", "4", "--noise", "0", "--unitaries", "5", "--trials", "3"]));
    let rows = read_csv(&out);
    assert_eq!(rows.len(), 5);
    for r in &rows[1..] {
        assert!(r[1..].iter().all(|v| v.parse::<f64>().unwrap() == 0.0));
    }
}

#[test]
fn noiseless_calibration_is_exact() {
    let out = stdout(&meshbias(&["calibrate", "--m", "6", "--meas-noise", "0"]));
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["config"]["m"], 6);
    assert!(doc["result"]["max_error"].as_f64().unwrap() < 1e-6);
}

#[test]
fn errors_are_reported_as_json() {
    let o = meshbias(&["paths", "--m", "100000"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(o.stderr.split(|&b| b == b'\n').rev().find(|l| !l.is_empty()).unwrap()).unwrap();
    assert_eq!(v["error"]["kind"], "too_large");

    let o = meshbias(&["paths", "--arch", "hexagonal"]);
    assert_eq!(o.status.code(), Some(2));

    let o = meshbias(&["calibrate", "--arch", "reck", "--m", "4"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn json_config_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"m": 5, "nonsense": 1}"#).unwrap();
    let o = meshbias(&["paths", "--json-config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("\"json\""));

    std::fs::write(&cfg, r#"{"m": 5}"#).unwrap();
    let rows = read_csv(&stdout(&meshbias(&["paths", "--m", "9", "--json-config", cfg.to_str().unwrap()])));
    assert_eq!(rows.len(), 6, "the config file overrides --m");
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn runs_reproduce_from_their_metadata() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cases: &[(&str, &[&str])] = &[
        ("mpbias", &["--m", "5", "--trials", "20", "--seed", "4"]),
        ("zeta", &["--m", "4", "--unitaries", "4", "--trials", "3", "--ensemble", "uniform"]),
        ("calibrate", &["--m", "4", "--repeats", "3", "--meas-noise", "0.01"]),
        ("flow", &["--m", "6", "--arch", "reck", "--k", "2"]),
        ("depsets", &["--m", "4"]),
        ("decompose", &["--m", "5", "--seed", "9"]),
    ];
    for (cmd, args) in cases {
        let first = a.path().join(cmd);
        let mut full = vec![*cmd];
        full.extend_from_slice(args);
        full.extend_from_slice(&["--out", first.to_str().unwrap()]);
        stdout(&meshbias(&full));

        let meta = first.join(format!("{cmd}.json"));
        let second = b.path().join(cmd);
        // different worker count on purpose: results must not depend on it
        let o = Command::new(env!("CARGO_BIN_EXE_meshbias"))
            .args([*cmd, "--json-config", meta.to_str().unwrap(), "--out", second.to_str().unwrap()])
            .env("MESHBIAS_WORKERS", "1")
            .output()
            .unwrap();
        stdout(&o);
        assert_eq!(files(&first), files(&second), "{cmd}");
    }
}

#[test]
fn reconstruct_inverts_decompose() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    stdout(&meshbias(&["decompose", "--m", "6", "--seed", "3", "--out", out.to_str().unwrap()]));
    let p = out.join("parameters.json");
    let doc: Value = serde_json::from_str(&stdout(&meshbias(&["reconstruct", "--input", p.to_str().unwrap()]))).unwrap();
    assert!(doc["result"]["unitarity_deviation"].as_f64().unwrap() < 1e-12);
    let u = meshbias::unitary::matrix_from_json(&std::fs::read_to_string(out.join("unitary.json")).unwrap()).unwrap();
    let entries = &doc["result"]["entries"];
    for r in 0..6 {
        for c in 0..6 {
            let re = entries[r][c][0].as_f64().unwrap();
            assert!((re - u[(r, c)].re).abs() < 1e-10);
        }
    }
}

#[test]
fn every_subcommand_runs() {
    for cmd in [
        "decompose", "paths", "flow", "centrality", "zeta", "mpbias", "depsets", "calibrate", "catalan", "asymptotics",
    ] {
        let o = meshbias(&[cmd, "--m", "4", "--unitaries", "2", "--trials", "4"]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stdout.is_empty(), "{cmd}");
    }
}
