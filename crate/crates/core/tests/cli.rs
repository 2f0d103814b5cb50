use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn sdh(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_sdh")).args(args).output().unwrap().status.code().unwrap()
}

fn quiver(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn suites_exit_zero() {
    let d = TempDir::new().unwrap();
    let a2 = quiver(d.path(), "a2.json", r#"{"vertices": 2, "arrows": [[1, 2]]}"#);
    let out = d.path().join("r.json");
    let out = out.to_str().unwrap();
    assert_eq!(sdh(&["--quiver", &a2, "--q", "2", "--suite", "quantum-group", "--out", out]), 0);
    assert_eq!(sdh(&["--quiver", &a2, "--q", "2", "--suite", "reflection", "--out", out]), 0);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(r["suite"], "reflection");
    assert_eq!(r["q"], 2);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
}

#[test]
fn assoc_z2_report_is_deterministic() {
    let d = TempDir::new().unwrap();
    let a2 = quiver(d.path(), "a2.json", r#"{"vertices": 2, "arrows": [[1, 2]]}"#);
    let o1 = d.path().join("1.json");
    let o2 = d.path().join("2.json");
    for o in [&o1, &o2] {
        let args = ["--quiver", &a2, "--q", "2", "--suite", "assoc-z2", "--samples", "50", "--seed", "0", "--out", o.to_str().unwrap()];
        assert_eq!(sdh(&args), 0);
    }
    let t1 = fs::read(&o1).unwrap();
    assert_eq!(t1, fs::read(&o2).unwrap());
    let r: serde_json::Value = serde_json::from_slice(&t1).unwrap();
    let checks = r["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 50);
    assert!(checks.iter().all(|c| c["status"] == "pass"));
}

#[test]
fn perturbed_relation_exits_one() {
    let d = TempDir::new().unwrap();
    let a2 = quiver(d.path(), "a2.json", r#"{"vertices": 2, "arrows": [[1, 2]]}"#);
    let out = d.path().join("r.json");
    for suite in ["ringel", "quantum-group", "presentation-uv", "euler-lemmas"] {
        assert_eq!(sdh(&["--quiver", &a2, "--q", "2", "--suite", suite, "--perturb", "--out", out.to_str().unwrap()]), 1, "{suite}");
    }
}

#[test]
fn bad_input_exits_two() {
    let d = TempDir::new().unwrap();
    let empty = quiver(d.path(), "empty.json", "");
    let a2 = quiver(d.path(), "a2.json", r#"{"vertices": 2, "arrows": [[1, 2]]}"#);
    let cyc = quiver(d.path(), "cyc.json", r#"{"vertices": 2, "arrows": [[1, 2], [2, 1]]}"#);
    let out = d.path().join("t.json");
    let out = out.to_str().unwrap();
    assert_eq!(sdh(&["--quiver", &empty, "--q", "2", "--table", "--bound", "2", "--out", out]), 2);
    assert_eq!(sdh(&["--quiver", &cyc, "--q", "2", "--suite", "ringel", "--out", out]), 2);
    assert_eq!(sdh(&["--quiver", &a2, "--q", "4", "--suite", "ringel", "--out", out]), 2);
    assert_eq!(sdh(&["--quiver", &a2, "--q", "2", "--suite", "nope", "--out", out]), 2);
    assert_eq!(sdh(&["--quiver", &a2, "--q", "2", "--suite", "assoc-z", "--samples", "0", "--out", out]), 2);
    assert_eq!(sdh(&["--quiver", &a2, "--q", "2", "--suite", "assoc-z", "--perturb", "--out", out]), 2);
    assert_eq!(sdh(&["--quiver", &a2, "--q", "2"]), 2);
}

#[test]
fn tables() {
    let d = TempDir::new().unwrap();
    let vect = quiver(d.path(), "v.json", r#"{"vertices": 1, "arrows": []}"#);
    let a2 = quiver(d.path(), "a2.json", r#"{"vertices": 2, "arrows": [[1, 2]]}"#);
    let out = d.path().join("t.csv");
    let out_s = out.to_str().unwrap();
    assert_eq!(sdh(&["--quiver", &vect, "--q", "2", "--table", "--bound", "2", "--format", "csv", "--out", out_s]), 0);
    let t = fs::read_to_string(&out).unwrap();
    assert!(t.starts_with("a,c,b,hall_number,constant\n"));
    assert!(t.contains("S1,S1,S1+S1,3,1/2\n"));

    let out = d.path().join("t.json");
    let out_s = out.to_str().unwrap();
    assert_eq!(sdh(&["--quiver", &a2, "--q", "3", "--table", "--bound", "2", "--out", out_s]), 0);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(rows.iter().any(|r| r["a"] == "S1" && r["c"] == "S2" && r["b"] == "P1" && r["constant"] == "2"));
    let keys: Vec<(String, String, String)> =
        rows.iter().map(|r| (r["a"].to_string(), r["c"].to_string(), r["b"].to_string())).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}
