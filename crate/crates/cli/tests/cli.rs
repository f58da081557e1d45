use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_manycopy"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn schema() -> jsonschema::JSONSchema {
    let text =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json")).unwrap();
    let value: Value = serde_json::from_str(&text).unwrap();
    jsonschema::JSONSchema::compile(&value).expect("schema compiles")
}

/// Parses stdout as a report and validates it against the committed schema.
fn report(out: &Output) -> Value {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let value: Value = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}"));
    let compiled = schema();
    if let Err(errors) = compiled.validate(&value) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("report violates schema: {msgs:?}\n{text}");
    }
    value
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn subspace_two_by_two() {
    let out = run(&["subspace", "2", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdict"]["outcome"], "Witnessed");
    assert_eq!(r["evidence"]["x"], serde_json::json!([1.0, 2.0]));
    assert!((r["evidence"]["min_pt_eigenvalue"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((r["evidence"]["witness_value"].as_f64().unwrap() - 0.5).abs() < 1e-6);
}

#[test]
fn entangled_pair_then_witness() {
    let dir = tempfile::tempdir().unwrap();
    let pair = dir.path().join("pair.json").display().to_string();
    let gen = run(&["examples", "entangled-pair", "--d", "2", "--state", "bell", "--out", &pair]);
    assert_eq!(gen.status.code(), Some(0));
    let g = report(&gen);
    assert_eq!(g["evidence"]["metadata"]["schmidt_rank"], 2);
    let out = run(&["witness", &pair]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdict"]["outcome"], "IndistinguishableManyCopy");
    assert!(r["evidence"]["states"][1]["value"].as_f64().unwrap() >= 0.5 - 1e-6);
    assert!(r["verdict"]["note"].as_str().unwrap().contains("sufficient, not necessary"));
}

#[test]
fn tmax_on_product_line_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "line.json", r#"{"dA":2,"dB":2,"kind":"pure","data":[[1,0],[0,0],[0,0],[0,0]]}"#);
    let out = run(&["tmax", &p]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["verdict"]["outcome"], "Inconclusive");
    assert!(r["evidence"]["value"].as_f64().unwrap().abs() < 1e-6);
}

#[test]
fn tmax_on_copies_multiplies() {
    let dir = tempfile::tempdir().unwrap();
    let basis = dir.path().join("s22.json").display().to_string();
    assert_eq!(run(&["subspace", "2", "2", "--out", &basis]).status.code(), Some(0));
    let r = report(&run(&["tmax", &basis, "--copies", "2"]));
    assert!((r["evidence"]["value"].as_f64().unwrap() - 0.25).abs() < 1e-6);
    assert_eq!(r["evidence"]["ambient"], serde_json::json!([4, 4]));
}

#[test]
fn discriminate_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let classical = dir.path().join("c.json").display().to_string();
    let family = dir.path().join("f.json").display().to_string();
    run(&["examples", "classical-pair", "--out", &classical]);
    run(&["examples", "me-family", "--d", "2", "--m", "3", "--k", "2", "--out", &family]);

    let r = report(&run(&["discriminate", &classical, "--mode", "perfect"]));
    assert_eq!(r["verdict"]["outcome"], "Distinguishable");
    assert!(r["evidence"]["value"].as_f64().unwrap() >= 1.0 - 1e-5);

    let out = run(&["discriminate", &family, "--copies", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdict"]["outcome"], "Indistinguishable");
    assert!(r["evidence"]["value"].as_f64().unwrap() <= 1e-5);

    let r = report(&run(&["witness", &classical]));
    assert_eq!(r["verdict"]["outcome"], "Inconclusive");
}

#[test]
fn product_pair_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json").display().to_string();
    let r = report(&run(&["examples", "entangled-pair", "--state", "product", "--out", &p]));
    assert_eq!(r["evidence"]["metadata"]["entangled"], false);
    assert!(r["verdict"]["note"].as_str().unwrap().contains("not entangled"));
    let r = report(&run(&["examples", "entangled-pair", "--state", "schmidt", "--weights", "0.9,0.1", "--out", &p]));
    assert!((r["evidence"]["metadata"]["largest_schmidt_sq"].as_f64().unwrap() - 0.9).abs() < 1e-12);
}

#[test]
fn errors_exit_one_with_a_single_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{ not json");
    let overlap = write(
        dir.path(),
        "overlap.json",
        r#"{"dA":2,"dB":2,"states":[{"label":"a","kind":"pure","data":[[1,0],[0,0],[0,0],[0,0]]},{"label":"b","kind":"pure","data":[[0.6,0],[0.8,0],[0,0],[0,0]]}]}"#,
    );
    let cases: Vec<Vec<&str>> = vec![
        vec!["tmax", &bad],
        vec!["tmax", "/nonexistent/file.json"],
        vec!["witness", &overlap],
        vec!["subspace", "3", "2"],
        vec!["subspace", "5", "5", "--max-dim", "16"],
        vec!["examples", "me-family", "--d", "2", "--m", "2", "--k", "2", "--out", "/dev/null"],
    ];
    for args in cases {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error: "), "{err}");
        assert!(out.stdout.is_empty());
    }
}

fn strip_timestamp(text: &[u8]) -> Value {
    let mut v: Value = serde_json::from_slice(text).unwrap();
    v.as_object_mut().unwrap().remove("generated_unix");
    v
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let pair = dir.path().join("pair.json").display().to_string();
    run(&["examples", "entangled-pair", "--d", "3", "--state", "random", "--seed", "11", "--out", &pair]);
    for args in [vec!["witness", pair.as_str()], vec!["subspace", "3", "4"], vec!["discriminate", pair.as_str()]] {
        let a = run(&args);
        let b = run(&args);
        let (ra, rb) = (String::from_utf8(a.stdout.clone()).unwrap(), String::from_utf8(b.stdout.clone()).unwrap());
        let mask = |s: &str| s.lines().filter(|l| !l.contains("\"generated_unix\"")).collect::<Vec<_>>().join("\n");
        assert_eq!(mask(&ra), mask(&rb), "{args:?}");
        assert_eq!(strip_timestamp(&a.stdout), strip_timestamp(&b.stdout));
    }
}

#[test]
fn report_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(&["--report", path.to_str().unwrap(), "subspace", "2", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(schema().is_valid(&v));
    assert_eq!(v["tolerances"]["sdp"], 1e-9);
}
