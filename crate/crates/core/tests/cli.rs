use std::process::{Command, Output};

use cstar_flow::report::CheckReport;

fn run(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cstar-flow"));
    cmd.args(args).env_remove("CSTAR_FLOW_SEED");
    if let Some(s) = env_seed {
        cmd.env("CSTAR_FLOW_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn parse(out: &Output) -> CheckReport {
    serde_json::from_slice(&out.stdout).expect("valid report json")
}

#[test]
fn exit_code_matrix() {
    let cases: &[(&[&str], i32)] = &[
        (&["verify", "all", "--trials", "20"], 0),
        (&["verify", "module-axioms", "--dim", "2", "--cols", "1"], 0),
        (&["verify", "dynamics", "--tol", "flow_leibniz=0"], 1),
        (&["verify", "--dim", "0"], 2),
        (&["verify", "all", "--cols", "9"], 2),
        (&["verify", "all", "--tol", "nonsense=1"], 2),
        (&["verify", "unknown-suite"], 2),
        (
            &["verify", "all", "--out", "/nonexistent-dir/report.json"],
            2,
        ),
        (&["demo", "commutator-flow"], 0),
        (
            &["demo", "commutator-flow", "--zero-generator", "--dim", "3"],
            0,
        ),
        (&["demo", "commutator-flow", "--dim", "9"], 2),
        (&["--help"], 0),
    ];
    for (args, code) in cases {
        let out = run(args, None);
        assert_eq!(
            out.status.code(),
            Some(*code),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn usage_errors_name_the_flag() {
    let out = run(&["verify", "all", "--dim", "0"], None);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--dim"));
    let out = run(&["verify", "all", "--tol", "nonsense=1"], None);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--tol"));
}

#[test]
fn json_is_deterministic_apart_from_seconds() {
    let args = [
        "verify", "all", "--format", "json", "--trials", "30", "--seed", "7",
    ];
    let mut a = parse(&run(&args, None));
    let mut b = parse(&run(&args, None));
    assert!(a.passed());
    a.summary.seconds = 0.0;
    b.summary.seconds = 0.0;
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.config["seed"], 7);
}

#[test]
fn env_seed_is_a_default_only() {
    let from_env = parse(&run(&["verify", "unitary", "--format", "json"], Some("99")));
    assert_eq!(from_env.config["seed"], 99);
    let from_flag = parse(&run(
        &["verify", "unitary", "--format", "json", "--seed", "5"],
        Some("99"),
    ));
    assert_eq!(from_flag.config["seed"], 5);
}

#[test]
fn report_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(
        &[
            "verify",
            "dynamics",
            "--tol",
            "flow_leibniz=0",
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let report: CheckReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.to_json() + "\n", text);
    let failing: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    assert_eq!(failing, ["dynamics/flow-leibniz/numerical"]);
    let case = report.case("dynamics/flow-leibniz/numerical").unwrap();
    let witness = case
        .witness
        .as_ref()
        .expect("failing case carries a witness");
    assert!(witness.contains_key("a") && witness.contains_key("x"));

    let raw: serde_json::Value = serde_json::from_str(&text).unwrap();
    let x = &raw["cases"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == case.name.as_str())
        .unwrap()["witness"]["x"];
    assert_eq!(x["rows"], 3);
    assert_eq!(x["data"][0].as_array().unwrap().len(), 2);
}

#[test]
fn text_report_has_summary_line() {
    let out = run(&["verify", "derivation", "--trials", "10"], None);
    let text = String::from_utf8_lossy(&out.stdout);
    let last = text.lines().last().unwrap();
    assert!(
        last.starts_with("summary:") && last.contains("0 failed"),
        "{last}"
    );
}

#[test]
fn demo_prints_fixed_case_and_ladder() {
    let out = run(&["demo", "commutator-flow", "--seed", "1"], None);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("reproduced exactly: yes"));
    assert!(text.contains("second order"));
    let zero = run(&["demo", "commutator-flow", "--zero-generator"], None);
    assert!(String::from_utf8_lossy(&zero.stdout).contains("all errors are zero"));
}
