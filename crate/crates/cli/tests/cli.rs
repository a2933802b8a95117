use serde_json::Value;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_translates"))
}

fn spectra() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../spectra")
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Every output file except the manifest, by name.
fn outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "manifest.json")
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn missing_spectrum_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["density"], &tmp.path().join("o"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let z = spectra().join("integers.json");
    let z = z.to_str().unwrap();
    let bad_json = write(d, "bad.json", "{\"kind\": \"arithmetic\",");
    let unknown = write(d, "unknown.json", r#"{"kind":"arithmetic","step":1,"T":100,"colour":"red"}"#);
    let sigma = write(d, "sigma.json", r#"{"sigma":{"kind":"tabulated","ys":[0,1,2],"vals":[3,2,4]}}"#);
    let cases: Vec<Vec<&str>> = vec![
        vec!["radius", "--spectrum", z, "--rho", ""],
        vec!["radius", "--spectrum", z],
        vec!["gen", "--spectrum", z, "--stages", "0"],
        vec!["density", "--spectrum", "/nonexistent/spectrum.json"],
        vec!["density", "--spectrum", bad_json.to_str().unwrap()],
        vec!["density", "--spectrum", unknown.to_str().unwrap()],
        vec!["bernstein", "--config", sigma.to_str().unwrap()],
        vec!["pair", "--a", "4.0", "--no-span"],
        vec!["pair", "--K", "3", "--no-span"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let o = run(args, &d.join(format!("o{i}")));
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn stage_failure_exits_3_with_diagnostic() {
    let tmp = tempfile::tempdir().unwrap();
    let sparse = write(tmp.path(), "sparse.json", r#"{"kind":"explicit","points":[0.0,50.0]}"#);
    let out = tmp.path().join("o");
    let o = run(&["gen", "--spectrum", sparse.to_str().unwrap(), "--stages", "2"], &out);
    assert_eq!(o.status.code(), Some(3));
    let f = json(&out.join("failure.json"));
    assert_eq!(f["diagnostic"]["stage"], 1);
    assert_eq!(json(&out.join("manifest.json"))["status"], "failed");
}

#[test]
fn density_bounds_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("z");
    let z = spectra().join("integers.json");
    let o = run(&["density", "--spectrum", z.to_str().unwrap(), "--horizon", "1024", "--s-min", "2", "--tol", "0.01"], &out);
    assert!(o.status.success());
    let b = json(&out.join("summary.json"))["bound"].as_f64().unwrap();
    assert!((0.95..=1.0).contains(&b), "{b}");
    assert!(out.join("family.csv").exists());
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["command"], "density");
    assert_eq!(m["parameters"]["horizon"], 1024.0);
    assert!(m["timestamp"].is_u64());

    let out = tmp.path().join("sq");
    let sq = spectra().join("squares.json");
    assert!(run(&["density", "--spectrum", sq.to_str().unwrap()], &out).status.success());
    assert_eq!(json(&out.join("summary.json"))["bound"], 0.0);
    assert!(!out.join("family.csv").exists());
}

#[test]
fn pair_defaults_and_verdicts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("default");
    assert!(run(&["pair", "--no-span"], &out).status.success());
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["parameters"]["a"], Value::Null);
    assert_eq!(m["resolved"]["a"].as_f64().unwrap(), 0.45 * std::f64::consts::PI);
    let g = json(&out.join("margin.json"));
    assert_eq!(g["verdict"], "PASS");
    assert!(g["margin"]["min"].as_f64().unwrap() > 0.0);

    let out = tmp.path().join("low");
    let a = format!("{}", 0.2 * std::f64::consts::PI);
    assert!(run(&["pair", "--a", &a, "--no-span"], &out).status.success());
    assert_eq!(json(&out.join("margin.json"))["verdict"], "FAIL");
}

#[test]
fn bernstein_single_interval_certificate_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write(tmp.path(), "cluster.json", r#"{"kind":"explicit","points":[1.0,1.1,1.2,1.3,1.4,1.5,1.6,1.7,1.8,1.9]}"#);
    let cfg = write(
        tmp.path(),
        "cfg.json",
        r#"{"sigma":{"kind":"log","c0":0,"c1":0.01,"shift":1},"carleman_radii":[],
            "uniqueness":{"psi":{"kind":"constant","value":0.5},"horizon":10,"s_min":0.1}}"#,
    );
    let out = tmp.path().join("o");
    let o = run(&["bernstein", "--config", cfg.to_str().unwrap(), "--spectrum", spec.to_str().unwrap()], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let u = &json(&out.join("bernstein.json"))["uniqueness"];
    assert_eq!(u["pass"], false);
    assert_eq!(u["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn bernstein_default_carleman_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    assert!(run(&["bernstein"], &out).status.success());
    let csv = std::fs::read_to_string(out.join("carleman.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert_eq!(json(&out.join("bernstein.json"))["carleman"]["holds"], true);
}

#[test]
fn gen_rerun_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let s = spectra().join("sqrt.json");
    let args = ["gen", "--spectrum", s.to_str().unwrap(), "--stages", "2", "--max-freqs", "160", "--no-telescope"];
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&args, &a).status.success());
    assert!(run(&args, &b).status.success());
    assert_eq!(outputs(&a), outputs(&b));
    let strip = |p: &Path| {
        let mut m = json(&p.join("manifest.json"));
        m.as_object_mut().unwrap().remove("timestamp");
        m.as_object_mut().unwrap().remove("out");
        m
    };
    assert_eq!(strip(&a), strip(&b));
    let certs = json(&a.join("certificates.json"));
    for c in certs.as_array().unwrap() {
        let d = c["delta"].as_f64().unwrap();
        assert!(c["eq1_measured"].as_f64().unwrap() <= d);
        assert!(c["eq2_measured"].as_f64().unwrap() <= d);
    }
}

#[test]
fn verify_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    assert!(run(&["verify"], &out).status.success());
    assert_eq!(json(&out.join("verify.json"))["all_pass"], true);
}
