use std::process::{Command, Output};

use qbayes::scenarios::ScenarioReport;

fn qbayes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbayes"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn example1_json_report() {
    let o = qbayes(&["run", "example1", "--r", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("\"ccr_probability\": 1.0"));
    assert!(text.contains("\"qcr_match_fidelity\": 0.5"));
    let rep: ScenarioReport = serde_json::from_str(&text).unwrap();
    assert_eq!(rep.scenario, "example1");
    assert_eq!(rep.parameters["r"], 0.5);
    let again =
        qbayes::scenarios::emit_report(&rep, qbayes::scenarios::OutputFormat::Json).unwrap();
    assert_eq!(again, text);
}

#[test]
fn json_output_is_deterministic_and_sorted() {
    let a = stdout(&qbayes(&["run", "hardy"]));
    let b = stdout(&qbayes(&["run", "hardy"]));
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    let amp = &v["states"][0]["amplitudes"][0];
    assert!(amp["re"].is_number() && amp["im"].is_number());
}

#[test]
fn text_format_has_one_row_per_step() {
    let o = qbayes(&["run", "fr", "--format", "text"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for step in ["A1", "A2", "A3", "A4", "A5", "A6"] {
        assert_eq!(
            text.lines()
                .filter(|l| l.starts_with(&format!("{step} ")))
                .count(),
            1,
            "{step}"
        );
    }
}

#[test]
fn run_all_emits_an_array() {
    let o = qbayes(&["run", "all", "--prior", "steady"]);
    assert_eq!(o.status.code(), Some(0));
    let reports: Vec<ScenarioReport> = serde_json::from_str(&stdout(&o)).unwrap();
    let names: Vec<_> = reports.iter().map(|r| r.scenario.as_str()).collect();
    assert_eq!(
        names,
        ["example1", "example2", "frauchiger_renner", "hardy"]
    );
    assert!(reports.iter().all(|r| r.prior == "steady_state"));
}

#[test]
fn explicit_prior_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("prior.json");
    let d = 0.25;
    let entries: Vec<Vec<serde_json::Value>> = (0..4)
        .map(|i| {
            (0..4)
                .map(|j| serde_json::json!({"re": if i == j { d } else { 0.0 }, "im": 0.0}))
                .collect()
        })
        .collect();
    std::fs::write(
        &path,
        serde_json::json!({"dim": 4, "entries": entries}).to_string(),
    )
    .unwrap();
    let o = qbayes(&[
        "run",
        "example2",
        "--prior",
        "file",
        "--prior-file",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let rep: ScenarioReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rep.prior, "explicit");

    // not positive semi-definite
    std::fs::write(
        &path,
        r#"{"dim": 2, "entries": [[{"re": 1.5, "im": 0}, {"re": 0, "im": 0}], [{"re": 0, "im": 0}, {"re": -0.5, "im": 0}]]}"#,
    )
    .unwrap();
    let o = qbayes(&[
        "run",
        "example2",
        "--prior",
        "file",
        "--prior-file",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(qbayes(&["run", "nope"]).status.code(), Some(1));
    assert_eq!(
        qbayes(&["run", "example1", "--r", "1.5"]).status.code(),
        Some(1)
    );
    assert_eq!(
        qbayes(&["run", "hardy", "--alpha", "0.8", "--beta", "0.5"])
            .status
            .code(),
        Some(1)
    );
    let h = std::f64::consts::FRAC_1_SQRT_2.to_string();
    assert_eq!(
        qbayes(&["run", "hardy", "--alpha", &h, "--beta", &h])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        qbayes(&["run", "example1", "--prior", "file"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(qbayes(&["check", "--dims", "1"]).status.code(), Some(1));
    assert_eq!(qbayes(&[]).status.code(), Some(1));
    assert_eq!(qbayes(&["--help"]).status.code(), Some(0));
}

#[test]
fn check_passes_on_seeded_channels() {
    let o = qbayes(&["check", "--dims", "2,3", "--trials", "10", "--seed", "42"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().count() >= 8);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
    assert_eq!(
        text,
        stdout(&qbayes(&[
            "check", "--dims", "2,3", "--trials", "10", "--seed", "42"
        ]))
    );
}
