use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chdef::RingMatrix;
use serde_json::Value;

fn chdef(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chdef"))
        .args(args)
        .output()
        .unwrap()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn verify_reports_all_true() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verify.json");
    let o = chdef(&["figure8", "verify", "--json", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = read_json(&path);
    for key in [
        "relation_exact",
        "form_invariant_exact",
        "det_formula_exact",
        "trace_formula_exact",
        "unipotent_exact",
    ] {
        assert_eq!(v[key], Value::Bool(true), "{key}");
    }
    assert_eq!(v["seed"], 0);
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        std::fs::read_to_string(&path).unwrap()
    );
}

#[test]
fn verify_output_matches_schema() {
    let schema: Value =
        serde_json::from_str(include_str!("../schemas/figure8_verify.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    for args in [
        &["figure8", "verify"][..],
        &["figure8", "verify", "--inject-fault", "--seed", "5"],
    ] {
        let o = chdef(args);
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(validator.is_valid(&v), "{v}");
    }
    assert!(!validator.is_valid(&serde_json::json!({"relation_exact": true})));
}

#[test]
fn injected_fault_is_reported() {
    let o = chdef(&["figure8", "verify", "--inject-fault"]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["relation_exact"], Value::Bool(false));
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn sweep_signature_transition() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = chdef(&[
        "figure8",
        "sweep",
        "--start",
        "0",
        "--end",
        "3.14159",
        "--steps",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&out);
    assert_eq!(
        rows[0][..7],
        ["alpha", "re_trace", "im_trace", "sig_p", "sig_q", "sig_z", "det_J"]
    );
    assert_eq!(rows[0].last().unwrap(), "seed");
    assert_eq!(rows.len(), 8);
    let two_thirds = 2.0 * std::f64::consts::PI / 3.0;
    for r in &rows[1..] {
        let a: f64 = r[0].parse().unwrap();
        let sig = (r[3].as_str(), r[4].as_str());
        if a < two_thirds - 1e-3 {
            assert_eq!(sig, ("3", "1"), "alpha={a}");
        } else if a > two_thirds + 1e-3 {
            assert_eq!(sig, ("2", "2"), "alpha={a}");
        }
    }
    assert!(std::fs::read(&out).unwrap().iter().all(|&b| b != b'\r'));
}

#[test]
fn sweep_single_point_and_margins() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = chdef(&[
        "figure8",
        "sweep",
        "--start",
        "0",
        "--end",
        "0",
        "--steps",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][1], "7.000000000000");
    assert_eq!(rows[1][2], "0.000000000000");

    let o = chdef(&[
        "figure8",
        "sweep",
        "--start",
        "0",
        "--end",
        "0.3",
        "--steps",
        "2",
        "--audit",
        "--ball-length",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&out);
    let col = rows[0]
        .iter()
        .position(|h| h == "consistency_margin")
        .unwrap();
    let m0: f64 = rows[1][col].parse().unwrap();
    let m1: f64 = rows[2][col].parse().unwrap();
    assert!(m0 > 0.0 && m1.is_finite());
}

#[test]
fn sweep_rejects_bad_ranges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = chdef(&[
        "figure8",
        "sweep",
        "--start",
        "0",
        "--end",
        "4",
        "--steps",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    let o = chdef(&[
        "figure8",
        "sweep",
        "--start",
        "0",
        "--end",
        "1",
        "--steps",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bend_hnn_reduces_to_the_input_at_unity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bent.json");
    let datum = data("bend_hnn.json");
    let o = chdef(&[
        "bend",
        "--datum",
        datum.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let bent = read_json(&out);
    let input = read_json(&datum);
    assert_eq!(bent["angle_divisor"], 3);
    assert!(bent["relations"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["identity"] == Value::Bool(true)));
    for g in input["gens"].as_array().unwrap() {
        let name = g["name"].as_str().unwrap();
        let before: RingMatrix = serde_json::from_value(g["image"].clone()).unwrap();
        let after: RingMatrix = serde_json::from_value(bent["images"][name].clone()).unwrap();
        assert_eq!(after.at_unity(), before, "{name}");
    }
}

#[test]
fn bend_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bent.json");
    let out = out.to_str().unwrap();
    let o = chdef(&[
        "bend",
        "--datum",
        data("bend_amalgam.json").to_str().unwrap(),
        "--out",
        out,
    ]);
    assert_eq!(code(&o), 0);
    let o = chdef(&[
        "bend",
        "--datum",
        data("bend_bad_delta.json").to_str().unwrap(),
        "--out",
        out,
    ]);
    assert_eq!(code(&o), 4);
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{\"kind\": \"hnn\"").unwrap();
    let o = chdef(&["bend", "--datum", junk.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 3);
    let o = chdef(&[
        "bend",
        "--datum",
        dir.path().join("missing.json").to_str().unwrap(),
        "--out",
        out,
    ]);
    assert_eq!(code(&o), 6);
    let o = chdef(&["bend", "--datum"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bend_relation_failure_exit_code() {
    // a relator between the two factors that the images do not satisfy
    let dir = tempfile::tempdir().unwrap();
    let mut datum = read_json(&data("bend_amalgam.json"));
    datum["relators"]
        .as_array_mut()
        .unwrap()
        .push(serde_json::json!("a b = b a"));
    let path = dir.path().join("bad_rel.json");
    std::fs::write(&path, datum.to_string()).unwrap();
    let o = chdef(&[
        "bend",
        "--datum",
        path.to_str().unwrap(),
        "--out",
        dir.path().join("o.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 5);
}

fn audit(dir: &Path, extra: &[&str]) -> (i32, Value) {
    let out = dir.join("audit.json");
    let mut args = vec![
        "audit",
        "--rep",
        "figure8",
        "--cusp",
        "m,l",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let o = chdef(&args);
    let v = if out.exists() {
        read_json(&out)
    } else {
        Value::Null
    };
    (code(&o), v)
}

#[test]
fn audit_passes_and_fails_as_expected() {
    let dir = tempfile::tempdir().unwrap();
    let (c, v) = audit(dir.path(), &["--calibrate"]);
    assert_eq!(c, 0);
    assert_eq!(v["pass"], Value::Bool(true));
    assert!(v["condition2"]["min_margin"].as_f64().unwrap() > 0.0);
    assert!(v["certification"]
        .as_str()
        .unwrap()
        .ends_with("not a discreteness proof"));
    assert_eq!(v["seed"], 0);

    let (c, v) = audit(
        dir.path(),
        &["--calibrate", "--alpha", "0.05", "--reference-alpha", "0"],
    );
    assert_eq!(c, 0);
    assert_eq!(v["parabolic_audit"].as_array().unwrap().len(), 2);

    let (c, v) = audit(dir.path(), &["--level", "5"]);
    assert_eq!(c, 1);
    assert!(!v["condition2"]["violations"].as_array().unwrap().is_empty());

    let (c, _) = audit(dir.path(), &["--calibrate", "--alpha", "2.5"]);
    assert_eq!(c, 7);
    let (c, _) = audit(dir.path(), &[]);
    assert_eq!(c, 2);
}

#[test]
fn audit_reads_a_bent_rep_file() {
    let dir = tempfile::tempdir().unwrap();
    let bent = dir.path().join("bent.json");
    let o = chdef(&[
        "bend",
        "--datum",
        data("bend_hnn.json").to_str().unwrap(),
        "--out",
        bent.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let o = chdef(&[
        "classify",
        "--rep",
        bent.to_str().unwrap(),
        "--word",
        "t",
        "--alpha",
        "0.9",
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["tag"], "ellipto-parabolic");
    let angle = v["rotation_angles"][0].as_f64().unwrap();
    assert!((angle.abs() - 1.2).abs() < 1e-6, "{angle}");
}

#[test]
fn classify_figure8_words() {
    for (word, alpha, tag) in [
        ("m", "0.5", "parabolic-unipotent"),
        ("l", "0.5", "ellipto-parabolic"),
        ("l", "0", "parabolic-unipotent"),
    ] {
        let o = chdef(&[
            "classify", "--rep", "figure8", "--word", word, "--alpha", alpha,
        ]);
        assert_eq!(code(&o), 0);
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["tag"], tag, "{word} at {alpha}");
    }
    let o = chdef(&[
        "classify", "--rep", "figure8", "--word", "x", "--alpha", "0",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn tolerance_overrides_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_chdef"))
        .args([
            "classify", "--rep", "figure8", "--word", "m", "--alpha", "0.5",
        ])
        .env("CHDEF_TOL_EIG", "-1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn worker_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "4"] {
        let out = dir.path().join(format!("s{workers}.csv"));
        let o = chdef(&[
            "figure8",
            "sweep",
            "--start",
            "-1",
            "--end",
            "1",
            "--steps",
            "9",
            "--audit",
            "--ball-length",
            "3",
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
