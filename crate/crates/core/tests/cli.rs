use std::path::Path;
use std::process::{Command, Output};

fn wqed(config: &str, dir: &Path, extra: &[&str]) -> Output {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_wqed"))
        .arg("--config")
        .arg(&cfg)
        .args(extra)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const FREE_SCATTER: &str = r#"{
  "command": "scatter",
  "lattice": { "L": 71, "epsilon": 1.0, "J": 0.3183098861837907, "Delta": 1.0, "g": 0.0, "rwa": true, "n_max": 1 },
  "packets": [ { "kind": "gaussian", "k_bar": 1.5707963267948966, "sigma": 0.4, "x_bar": -15.0 } ],
  "plan": { "t_plus": 20.0, "dt_report": 5.0 }
}"#;

#[test]
fn scatter_output_is_bitwise_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let mut fields = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        let o = wqed(FREE_SCATTER, tmp.path(), &["--out", out.to_str().unwrap(), "--seed", "11"]);
        assert!(o.status.success(), "{}", stderr(&o));
        fields.push(std::fs::read(out.join("field.csv")).unwrap());
    }
    assert_eq!(fields[0], fields[1]);
    let text = String::from_utf8(fields[0].clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x [sites],re [1],im [1],density [photons/site]");
}

#[test]
fn manifest_echoes_resolved_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = wqed(FREE_SCATTER, tmp.path(), &["--out", out.to_str().unwrap(), "--seed", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "scatter");
    assert_eq!(m["config"]["seed"], 5);
    assert_eq!(m["config"]["plan"]["method"], "chebyshev");
    assert_eq!(m["config"]["support_widths"], 5.0);
    assert!(m["version"].as_str().unwrap().starts_with('v'));
    assert!(out.join("plots.gp").exists());
    for f in m["files"].as_array().unwrap() {
        assert!(out.join(f.as_str().unwrap()).exists());
    }
}

#[test]
fn string_for_number_exits_with_schema_error() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = FREE_SCATTER.replace("\"L\": 71", "\"L\": \"fifty-one\"");
    let o = wqed(&bad, tmp.path(), &["--out", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lattice.L"), "{}", stderr(&o));
}

#[test]
fn unknown_fields_and_commands_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let extra = FREE_SCATTER.replace("\"rwa\": true", "\"rwa\": true, \"kappa\": 1.0");
    let o = wqed(&extra, tmp.path(), &["--out", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kappa"));
    let o = wqed(r#"{"command": "render"}"#, tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("render"));
}

#[test]
fn invalid_values_and_io_failures_have_their_own_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let even = FREE_SCATTER.replace("\"L\": 71", "\"L\": 50");
    let o = wqed(&even, tmp.path(), &["--out", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let o = wqed(FREE_SCATTER, tmp.path(), &["--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn fluorescence_scan_decreases_with_separation() {
    let config = r#"{
      "command": "fluorescence-scan",
      "lattice": { "L": 161, "epsilon": 1.0, "J": 0.3183098861837907, "Delta": 1.0, "g": 0.3, "rwa": true, "n_max": 2 },
      "geometry": {
        "front": { "kind": "gaussian", "k_bar": 1.5707963267948966, "sigma": 0.25, "x_bar": -25.0 },
        "k_bar_back": 1.5707963267948966,
        "exit_distance": 16.0
      },
      "ls": [0, 4, 8, 16, 24, 32],
      "support_widths": 4.0
    }"#;
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("f");
    let o = wqed(config, tmp.path(), &["--out", out.to_str().unwrap(), "--threads", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut rd = csv::Reader::from_path(out.join("fluorescence.csv")).unwrap();
    assert_eq!(rd.headers().unwrap().get(1), Some("F [1]"));
    let f: Vec<f64> = rd.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(f.len(), 6);
    assert!(f[5] < 0.1 * f[0]);
    assert!(f[2..].windows(2).all(|w| w[1] < w[0]), "{f:?}");
    let script = std::fs::read_to_string(out.join("plots.gp")).unwrap();
    assert!(script.contains("fluorescence.csv"));
}
