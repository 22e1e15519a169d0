//! CLI behavior: exit codes, structured errors on stderr, stdin input, and
//! the remaining subcommands.

use std::io::Write;
use std::process::{Command, Stdio};

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_tsquad")
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let out = Command::new(exe()).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run_with_stdin(args: &[&str], input: &str) -> Run {
    let mut child = Command::new(exe())
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

#[test]
fn quad_success_has_exit_zero_and_clean_stderr() {
    let r = run(&[
        "quad",
        "--scale",
        r#"{"kind":"continuous","a":0,"b":1}"#,
        "--rule",
        r#"{"rule":"trapezoid"}"#,
        "--f",
        "t^2",
    ]);
    assert_eq!(r.code, 0);
    assert!(r.stderr.is_empty());
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert!((v["abs_error"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-9);

    // a constant integrand has zero error under any feasible rule
    let r = run(&[
        "quad",
        "--scale",
        r#"{"kind":"continuous","a":0,"b":1}"#,
        "--rule",
        r#"{"rule":"simpson"}"#,
        "--f",
        "1",
    ]);
    assert_eq!(r.code, 0);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["abs_error"].as_f64().unwrap(), 0.0);
}

#[test]
fn domain_errors_exit_one_with_structured_json() {
    let r = run(&[
        "quad",
        "--scale",
        r#"{"kind":"integers","a":0,"b":3}"#,
        "--rule",
        r#"{"rule":"midpoint"}"#,
        "--f",
        "t",
    ]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.is_empty(), "no partial output on stdout");
    let v: serde_json::Value = serde_json::from_str(&r.stderr).unwrap();
    assert_eq!(v["error"], "MembershipViolation");

    let r = run(&[
        "quad",
        "--scale",
        r#"{"kind":"qlattice","q":0.5,"m":0,"n":3}"#,
        "--rule",
        r#"{"rule":"trapezoid"}"#,
        "--f",
        "t",
    ]);
    assert_eq!(r.code, 1);
    let v: serde_json::Value = serde_json::from_str(&r.stderr).unwrap();
    assert_eq!(v["error"], "MalformedSpec");

    // expression problems are domain errors too
    let r = run(&[
        "quad",
        "--scale",
        r#"{"kind":"continuous","a":0,"b":1}"#,
        "--rule",
        r#"{"rule":"trapezoid"}"#,
        "--f",
        "t +",
    ]);
    assert_eq!(r.code, 1);
    let v: serde_json::Value = serde_json::from_str(&r.stderr).unwrap();
    assert_eq!(v["error"], "SyntaxError");
}

#[test]
fn usage_errors_exit_two() {
    // unknown flag
    let r = run(&["quad", "--nope"]);
    assert_eq!(r.code, 2);
    let v: serde_json::Value = serde_json::from_str(&r.stderr).unwrap();
    assert_eq!(v["error"], "UsageError");

    // zero trials rejected
    let r = run(&["verify", "--seed", "1", "--trials", "0"]);
    assert_eq!(r.code, 2);

    // seed is mandatory
    let r = run(&["verify", "--trials", "10"]);
    assert_eq!(r.code, 2);

    // unparseable scale JSON
    let r = run(&[
        "quad",
        "--scale",
        "{nope",
        "--rule",
        r#"{"rule":"trapezoid"}"#,
        "--f",
        "t",
    ]);
    assert_eq!(r.code, 2);
}

#[test]
fn stdin_fills_missing_inputs() {
    let r = run_with_stdin(
        &["quad", "--stdin", "--f", "t^2"],
        r#"{"scale":{"kind":"continuous","a":0,"b":1},"rule":{"rule":"trapezoid"}}"#,
    );
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert!((v["q_value"].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn monomial_prints_bare_number() {
    let r = run(&[
        "monomial",
        "--scale",
        r#"{"kind":"integers","a":0,"b":6}"#,
        "--k",
        "2",
        "--t",
        "5",
        "--s",
        "2",
    ]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout, "3.0\n");

    let r = run(&[
        "monomial",
        "--scale",
        r#"{"kind":"qlattice","q":2,"m":0,"n":3}"#,
        "--k",
        "2",
        "--t",
        "4",
        "--s",
        "1",
    ]);
    assert_eq!(r.stdout, "2.0\n");

    // h_0 = 1 everywhere
    let r = run(&[
        "monomial",
        "--scale",
        r#"{"kind":"continuous","a":0,"b":1}"#,
        "--k",
        "0",
        "--t",
        "0.3",
        "--s",
        "0.9",
    ]);
    assert_eq!(r.stdout, "1.0\n");
}

#[test]
fn bound_accepts_m_or_integrand() {
    let scale = r#"{"kind":"continuous","a":0,"b":1}"#;
    let rule = r#"{"rule":"trapezoid"}"#;
    let r = run(&["bound", "--scale", scale, "--rule", rule, "--m", "2"]);
    assert_eq!(r.code, 0);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["bound"].as_f64().unwrap(), 0.5);
    assert_eq!(v["closed_form"].as_f64().unwrap(), 0.5);

    let r = run(&["bound", "--scale", scale, "--rule", rule, "--f", "t^2"]);
    assert_eq!(r.code, 0);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert!((v["bound"].as_f64().unwrap() - 0.5).abs() < 1e-6);

    // closed form omitted off its scale kinds
    let r = run(&[
        "bound",
        "--scale",
        r#"{"kind":"qlattice","q":2,"m":0,"n":3}"#,
        "--rule",
        r#"{"rule":"left_rectangle"}"#,
        "--m",
        "1",
    ]);
    assert_eq!(r.code, 0);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["bound"].as_f64().unwrap(), 35.0);
    assert!(v.get("closed_form").is_none());

    let r = run(&["bound", "--scale", scale, "--rule", rule]);
    assert_eq!(r.code, 2, "needs --m or --f");
}

#[test]
fn identity_reports_residual_decomposition() {
    let r = run(&[
        "identity",
        "--scale",
        r#"{"kind":"integers","a":0,"b":2}"#,
        "--rule",
        r#"{"rule":"custom","xs":[0,2],"alphas":[0,1,2]}"#,
        "--f",
        "t^2",
    ]);
    assert_eq!(r.code, 0);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["q_value"].as_f64().unwrap(), 4.0);
    assert_eq!(v["integral_sigma"].as_f64().unwrap(), 5.0);
    assert_eq!(v["kernel_integral"].as_f64().unwrap(), -1.0);
    assert_eq!(v["residual"].as_f64().unwrap(), 0.0);
}

#[test]
fn rules_lists_expansions_and_infeasibilities() {
    let r = run(&["rules", "--scale", r#"{"kind":"integers","a":0,"b":2}"#]);
    assert_eq!(r.code, 0);
    let rows: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 6);
    let by_name = |name: &str| {
        rows.iter()
            .find(|row| row["rule"] == name)
            .unwrap_or_else(|| panic!("{name} missing"))
    };
    assert_eq!(by_name("midpoint")["xs"], serde_json::json!([0.0, 1.0, 2.0]));
    assert_eq!(
        by_name("midpoint")["alphas"],
        serde_json::json!([0.0, 0.0, 2.0, 2.0])
    );
    assert_eq!(by_name("trapezoid")["weights"], serde_json::json!([1.0, 1.0]));
    // sixth-points are not integers here
    assert_eq!(by_name("simpson")["error"], "MembershipViolation");
}

#[test]
fn quad_snap_reports_adjustments() {
    let r = run(&[
        "quad",
        "--scale",
        r#"{"kind":"integers","a":0,"b":3}"#,
        "--rule",
        r#"{"rule":"midpoint"}"#,
        "--f",
        "t",
        "--snap",
    ]);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    let snapped = v["snapped"].as_array().unwrap();
    assert_eq!(snapped.len(), 1);
    assert_eq!(snapped[0]["requested"].as_f64().unwrap(), 1.5);
    assert_eq!(snapped[0]["used"].as_f64().unwrap(), 1.0);
}

#[test]
fn verify_out_writes_file() {
    let dir = std::env::temp_dir().join(format!("tsquad-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let r = run(&[
        "verify",
        "--seed",
        "5",
        "--trials",
        "10",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["trials_run"], 10);
    assert_eq!(v["seed"], 5);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_transcendental_flag_stays_clean() {
    let r = run(&["verify", "--seed", "9", "--trials", "60", "--transcendental"]);
    assert_eq!(r.code, 0);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["identity_failures"], 0);
    assert_eq!(v["inequality_failures"], 0);
}

#[test]
fn help_exits_zero() {
    let r = run(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("quad"));
}
