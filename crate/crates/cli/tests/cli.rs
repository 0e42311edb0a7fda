use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

use k3cert_cli::{InputDocument, OutputDocument};

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn k3cert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_k3cert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn check(name: &str, extra: &[&str]) -> Output {
    let path = example(name);
    let mut args = vec!["check", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    k3cert(&args)
}

#[test]
fn exit_codes_on_bundled_documents() {
    for (name, code) in [
        ("gizatullin.json", 0),
        ("hyperbolic_plane.json", 1),
        ("low_degree_control.json", 1),
        ("search_limited.json", 2),
    ] {
        let out = check(name, &[]);
        assert_eq!(out.status.code(), Some(code), "{name}");
        assert!(out.stderr.is_empty(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn malformed_documents_exit_three_with_a_field_diagnostic() {
    let mut truncated = tempfile::NamedTempFile::new().unwrap();
    write!(truncated, r#"{{"gram": [[4, 20], [20, 4]], "polari"#).unwrap();
    let out = k3cert(&["check", truncated.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());

    let mut float = tempfile::NamedTempFile::new().unwrap();
    write!(float, r#"{{"gram": [[4, 20], [20, 4.0]], "polarization": [1, 0]}}"#).unwrap();
    let out = k3cert(&["check", float.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gram[1][1]"));

    let out = k3cert(&["check", "/nonexistent/lattice.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_three_and_help_exits_zero() {
    assert_eq!(k3cert(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(k3cert(&["check"]).status.code(), Some(3));
    assert_eq!(k3cert(&["pell", "x"]).status.code(), Some(3));
    assert_eq!(k3cert(&["pell", "49"]).status.code(), Some(3));
    assert_eq!(k3cert(&["--help"]).status.code(), Some(0));
    assert_eq!(k3cert(&["--version"]).status.code(), Some(0));
}

#[test]
fn json_output_parses_and_text_carries_the_same_verdict() {
    for name in ["gizatullin.json", "hyperbolic_plane.json", "low_degree_control.json", "search_limited.json"] {
        let json = check(name, &["--format", "json"]);
        let doc: OutputDocument = serde_json::from_slice(&json.stdout).expect(name);
        assert_eq!(doc.format_version, "1");
        assert_eq!(doc.steps.len(), 5);
        assert!(doc.timing.is_none());
        let text = String::from_utf8(check(name, &["--format", "text"]).stdout).unwrap();
        assert_eq!(text.lines().next().unwrap(), format!("verdict: {}", doc.verdict));
    }
}

#[test]
fn json_output_is_byte_stable_and_independent_of_jobs() {
    let first = check("gizatullin.json", &["--verify"]).stdout;
    assert_eq!(first, check("gizatullin.json", &["--verify"]).stdout);
    assert_eq!(first, check("gizatullin.json", &["--verify", "--jobs", "8"]).stdout);
}

#[test]
fn timing_is_opt_in() {
    let out = check("gizatullin.json", &["--timing"]);
    let doc: OutputDocument = serde_json::from_slice(&out.stdout).unwrap();
    let timing = doc.timing.expect("timing requested");
    assert_eq!(timing.keys().cloned().collect::<Vec<_>>(), ["S1", "S2", "S3", "S4", "S5"]);
}

#[test]
fn quartic_report_contents() {
    let doc: OutputDocument =
        serde_json::from_slice(&check("gizatullin.json", &["--verify"]).stdout).unwrap();
    assert_eq!(doc.verdict, "pass");
    assert!(doc.steps.iter().all(|s| s.status == "pass"));
    assert_eq!(doc.derived.dominant_root.as_deref(), Some("5 + 2√6"));
    assert_eq!(doc.derived.char_poly.as_deref(), Some("λ² - 10λ + 1"));
    let s5 = &doc.steps[4].details;
    assert_eq!(s5["root_claim"]["consistent"], serde_json::json!(false));
    assert_eq!(s5["oracle"]["agrees"], serde_json::json!(true));
    assert_eq!(doc.steps[1].details["oracle"]["agrees"], serde_json::json!(true));
    assert_eq!(doc.steps[3].details["oracle"]["agrees"], serde_json::json!(true));
}

#[test]
fn degree_bound_flag_overrides_the_document() {
    let doc: OutputDocument =
        serde_json::from_slice(&check("low_degree_control.json", &["--degree-bound", "6"]).stdout)
            .unwrap();
    // degrees 2 and 4 only: (1, 0) has degree 4 and is h itself
    assert_eq!(doc.verdict, "pass");
}

#[test]
fn wrapper_subcommands() {
    let out = k3cert(&["pell", "24", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "(5, 1)\n");

    let out = k3cert(&["pell", "61"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["x"].to_string(), "1766319049");
    assert_eq!(v["y"].to_string(), "226153980");

    let quartic = example("gizatullin.json");
    let quartic = quartic.to_str().unwrap();
    let out = k3cert(&["disc", quartic]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["invariant_factors"], serde_json::json!([4, 96]));
    assert_eq!(v["order"], serde_json::json!(384));

    let out = k3cert(&["orbit", quartic, "--k-max", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let degrees: Vec<String> = v["orbit"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["degree"].to_string())
        .collect();
    assert_eq!(degrees, ["4", "20", "196", "1940"]);

    let out = k3cert(&["enumerate", quartic, "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("3 classes below degree 16"));
    assert!(text.contains("agrees"));
}

#[test]
fn bundled_documents_round_trip() {
    for name in ["gizatullin.json", "hyperbolic_plane.json", "low_degree_control.json", "search_limited.json"] {
        let doc = InputDocument::read(&example(name)).unwrap();
        let once = doc.to_json();
        let twice = InputDocument::parse(&once).unwrap().to_json();
        assert_eq!(once, twice, "{name}");
    }
}
