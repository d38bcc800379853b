//! Golden-file tests for the command-line interface: output schemas, exit
//! codes, and byte-level determinism across parallelism widths.

use std::fs;
use std::path::PathBuf;

use tempfile::TempDir;

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let argv: Vec<String> =
        std::iter::once("diagcount").chain(args.iter().copied()).map(String::from).collect();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = diagcount::cli::run(&argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_file(dir: &TempDir, name: &str, contents: &str) -> String {
    let path: PathBuf = dir.path().join(name);
    fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

const DEMO_F5: &str = r#"{"field":{"p":5,"m":1},"t":2,"n":1,"exponents":[3,3],"matrix":[[1,1]],"lhs":{"kind":"powers"},"rhs":{"kind":"constants","values":[2]}}"#;

const MAIN_1X3: &str = r#"{"field":{"p":5,"m":1},"t":3,"n":1,"exponents":[4,3,2],"matrix":[[1,1,1]],"lhs":{"kind":"powers"},"rhs":{"kind":"constants","values":[1]}}"#;

const BOX_31: &str = r#"{"field":{"p":31,"m":1},"t":3,"n":1,"exponents":[4,3,2],"matrix":[[1,2,3]],"lhs":{"kind":"powers"},"rhs":{"kind":"constants","values":[0]}}"#;

/// Drops the trailing elapsed_ms column from every CSV line.
fn strip_elapsed(csv: &str) -> String {
    csv.lines()
        .map(|line| match line.rsplit_once(',') {
            Some((rest, _)) => rest.to_string(),
            None => line.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn validate_passes_and_fails_with_exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = write_file(&dir, "good.json", MAIN_1X3);
    let (code, out, _) = run_cli(&["validate", &good]);
    assert_eq!(code, 0);
    assert!(out.contains("pass: true"));
    assert!(out.contains("applicable bounds: main_constants, existence_general"));

    // Characteristic divides an exponent: a gate fails.
    let bad = write_file(
        &dir,
        "bad.json",
        r#"{"field":{"p":3,"m":1},"t":3,"n":1,"exponents":[4,3,2],"matrix":[[1,1,1]],"lhs":{"kind":"powers"},"rhs":{"kind":"constants","values":[1]}}"#,
    );
    let (code, out, _) = run_cli(&["validate", &bad]);
    assert_eq!(code, 1);
    assert!(out.contains("pass: false"));
    assert!(out.contains("characteristic ok: false"));
}

#[test]
fn count_both_engines_agree_on_demo_system() {
    let dir = TempDir::new().unwrap();
    let demo = write_file(&dir, "demo.json", DEMO_F5);
    let (code, out, _) = run_cli(&["count", &demo, "--engine", "both"]);
    assert_eq!(code, 0);
    assert!(out.contains("count: 5"));
    assert!(out.contains("bruteforce, convolution (agree)"));

    let (code, out, _) =
        run_cli(&["count", &demo, "--engine", "auto", "--format", "structured"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"count\":\"5\""));
}

#[test]
fn count_restrictions() {
    let dir = TempDir::new().unwrap();
    let demo = write_file(&dir, "demo.json", DEMO_F5);
    // x³ + y³ = 2 over F_5 with x, y ≠ 0: solutions among the 5 total are
    // those avoiding zero coordinates; x=0 forces y³=2 (one y), and
    // symmetrically, so N* = 5 − 2 = 3.
    let (code, out, _) = run_cli(&["count", &demo, "--restrict", "nonzero"]);
    assert_eq!(code, 0);
    assert!(out.contains("count: 3"));

    let (code, out, _) = run_cli(&["count", &demo, "--restrict", "box:1"]);
    assert_eq!(code, 0, "{out}");

    let (code, _, err) = run_cli(&["count", &demo, "--restrict", "box:x"]);
    assert_eq!(code, 2);
    assert!(err.contains("invalid box margin"));

    let (code, _, err) = run_cli(&["count", &demo, "--restrict", "half"]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown restriction"));
}

#[test]
fn bound_reports_applicable_regimes() {
    let dir = TempDir::new().unwrap();
    let file = write_file(&dir, "sys.json", MAIN_1X3);
    let (code, out, _) = run_cli(&["bound", &file, "--count", "25"]);
    assert_eq!(code, 0);
    assert!(out.contains("bound main_constants: main 25"));
    assert!(out.contains("verdict holds"));
    assert!(out.contains("existence existence_general"));

    let (code, _, err) = run_cli(&["bound", &file, "--count", "25x"]);
    assert_eq!(code, 2);
    assert!(err.contains("invalid decimal count"));
}

#[test]
fn bound_with_margins_evaluates_congruence_box() {
    let dir = TempDir::new().unwrap();
    let file = write_file(&dir, "box.json", BOX_31);
    // 801 is the exact boxed count at margin 2 (see the verify test below).
    let (code, out, _) = run_cli(&["bound", &file, "--count", "801", "--margin", "2"]);
    assert_eq!(code, 0);
    assert!(out.contains("bound congruence_box: main 841, error 41140224, margin 2"));
    assert!(out.contains("verdict holds"));
}

#[test]
fn verify_bijection_reports_zero_difference() {
    let dir = TempDir::new().unwrap();
    // gcd(d_i, q−1) = 1 for d = 3 over F_5: exactly q^{t−n} = 25 solutions.
    let file = write_file(
        &dir,
        "bij.json",
        r#"{"field":{"p":5,"m":1},"t":3,"n":1,"exponents":[3,3,3],"matrix":[[1,2,3]],"lhs":{"kind":"powers"},"rhs":{"kind":"constants","values":[2]}}"#,
    );
    let (code, out, _) = run_cli(&["verify", &file]);
    assert_eq!(code, 0);
    assert!(out.contains("count: 25 (convolution, cross-checked)"));
    assert!(out.contains("bound main_constants: main 25"));
    assert!(out.contains("critical: false"));
}

#[test]
fn verify_structured_with_margins_is_deterministic_across_widths() {
    let dir = TempDir::new().unwrap();
    let file = write_file(&dir, "box.json", BOX_31);
    let args = |w: &'static str| {
        [
            "verify", &file, "--margin", "1", "--margin", "2", "--margin", "3", "--format",
            "structured", "--parallelism", w,
        ]
        .map(String::from)
    };
    let run = |w| {
        let argv: Vec<String> =
            std::iter::once("diagcount".to_string()).chain(args(w)).collect();
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = diagcount::cli::run(&argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap())
    };
    let (code1, out1) = run("1");
    let (code8, out8) = run("8");
    assert_eq!(code1, 0);
    assert_eq!(code8, 0);
    assert_eq!(out1, out8, "structured verify output must not depend on parallelism");
    assert!(out1.contains("\"margin\":2"));
    assert!(out1.contains("\"main_term\":\"841\""));
    assert!(out1.contains("\"error_bound\":\"41140224\""));
    assert!(out1.contains("\"critical\":false"));
    // Structured output never carries timings.
    assert!(!out1.contains("elapsed"));
}

#[test]
fn sweep_emits_sorted_csv_rows() {
    let dir = TempDir::new().unwrap();
    let template = write_file(&dir, "tpl.json", MAIN_1X3);
    // The set is deliberately unsorted; rows come out ordered by q.
    let (code, out, _) =
        run_cli(&["sweep", "--template", &template, "--vary", "q", "--set", "13,5,11,7"]);
    assert_eq!(code, 0);
    let stripped = strip_elapsed(&out);
    let expected = "\
q,p,m,t,n,regime,count,main_term,bound_or_bound_sq,verdict,engine
5,5,1,3,1,thm_main_constants,25,25,13759414272000,holds,convolution
7,7,1,3,1,thm_main_constants,35,49,37755832762368,holds,convolution
11,11,1,3,1,thm_main_constants,121,121,146510243168256,holds,convolution
13,13,1,3,1,thm_main_constants,195,169,241835465244672,holds,convolution";
    assert_eq!(stripped, expected);
}

#[test]
fn sweep_is_deterministic_across_widths() {
    let dir = TempDir::new().unwrap();
    let template = write_file(&dir, "tpl.json", MAIN_1X3);
    let run = |w: &str| {
        let (code, out, _) = run_cli(&[
            "sweep",
            "--template",
            &template,
            "--vary",
            "q",
            "--set",
            "5,7,11,13",
            "--parallelism",
            w,
        ]);
        assert_eq!(code, 0);
        strip_elapsed(&out)
    };
    assert_eq!(run("1"), run("8"));
}

#[test]
fn sweep_rejects_unsupported_vary() {
    let dir = TempDir::new().unwrap();
    let template = write_file(&dir, "tpl.json", MAIN_1X3);
    let (code, _, err) =
        run_cli(&["sweep", "--template", &template, "--vary", "t", "--set", "5"]);
    assert_eq!(code, 2);
    assert!(err.contains("only --vary q"));
}

#[test]
fn waring_frozen_golden() {
    let (code, out, _) = run_cli(&["waring", "--n", "1", "--d1", "2", "--q", "149"]);
    assert_eq!(code, 0);
    assert!(out.contains("gamma upper bound: 439"));
    assert!(out.contains("h(q) in [438.804181, 438.804181]"));
    assert!(out.contains("witness: 149^437 >= 12^880"));

    let (code, out, _) =
        run_cli(&["waring", "--n", "1", "--d1", "2", "--q", "149", "--format", "structured"]);
    assert_eq!(code, 0);
    assert_eq!(
        out.trim(),
        r#"{"d1":2,"gamma_upper":439,"h_hi":"438.804181","h_lo":"438.804181","n":1,"q":149,"witness_inequality":"149^437 >= 12^880"}"#
    );

    // Below the q-threshold the bound refuses.
    let (code, _, err) = run_cli(&["waring", "--n", "1", "--d1", "2", "--q", "144"]);
    assert_eq!(code, 2);
    assert!(err.contains("does not exceed"));
}

#[test]
fn generate_is_deterministic_and_valid() {
    for rhs in ["constants", "polynomials", "markoff-hurwitz"] {
        let args =
            ["generate", "--n", "2", "--t", "5", "--p", "11", "--seed", "9", "--rhs", rhs];
        let (code1, out1, _) = run_cli(&args);
        let (code2, out2, _) = run_cli(&args);
        assert_eq!(code1, 0);
        assert_eq!(code2, 0);
        assert_eq!(out1, out2, "generation must be deterministic per seed");

        // The emitted document parses and satisfies (H).
        let dir = TempDir::new().unwrap();
        let file = write_file(&dir, "gen.json", out1.trim());
        let (code, out, _) = run_cli(&["validate", &file]);
        assert_eq!(code, 0, "generated {rhs} system must validate: {out}");
        assert!(out.contains("hypothesis (H): true"));
    }

    // Different seeds give different matrices.
    let (_, a, _) = run_cli(&["generate", "--n", "1", "--t", "4", "--p", "101", "--seed", "1"]);
    let (_, b, _) = run_cli(&["generate", "--n", "1", "--t", "4", "--p", "101", "--seed", "2"]);
    assert_ne!(a, b);
}

#[test]
fn dickson_coefficients_golden() {
    // D_4(X, 2) = X⁴ − 8X² + 8 ≡ X⁴ + 6X² + 1 over F_7.
    let (code, out, _) = run_cli(&["dickson", "--d", "4", "--a", "2", "--p", "7"]);
    assert_eq!(code, 0);
    assert!(out.contains("coefficients (low to high): 1, 0, 6, 0, 1"));
    assert!(out.contains("identity D_d(y + a/y, a) = y^d + (a/y)^d: holds"));

    let (code, out, _) =
        run_cli(&["dickson", "--d", "3", "--a", "2", "--p", "5", "--format", "structured"]);
    assert_eq!(code, 0);
    // D_3(X, 2) = X³ − 6X ≡ X³ + 4X over F_5.
    assert_eq!(
        out.trim(),
        r#"{"a":2,"coefficients":[0,4,0,1],"d":3,"identity_holds":true,"m":1,"p":5}"#
    );

    // Element code out of range for the field.
    let (code, _, err) = run_cli(&["dickson", "--d", "3", "--a", "9", "--p", "5"]);
    assert_eq!(code, 2);
    assert!(err.contains("out of range"));
}

#[test]
fn exit_codes_follow_the_contract() {
    // Usage: unknown subcommand, missing file, bad flag value.
    let (code, _, _) = run_cli(&["frobnicate"]);
    assert_eq!(code, 2);
    let (code, _, err) = run_cli(&["count", "/nonexistent/system.json"]);
    assert_eq!(code, 2);
    assert!(err.contains("cannot read"));
    let (code, _, _) = run_cli(&["waring", "--n", "1", "--d1", "2", "--q", "nope"]);
    assert_eq!(code, 2);

    // Parse errors in the document are usage errors.
    let dir = TempDir::new().unwrap();
    let garbled = write_file(&dir, "garbled.json", "{\"field\": [}");
    let (code, _, _) = run_cli(&["validate", &garbled]);
    assert_eq!(code, 2);

    // Cap exhaustion maps to exit 3.
    let file = write_file(&dir, "sys.json", MAIN_1X3);
    let (code, _, err) =
        run_cli(&["verify", &file, "--max-enum", "5", "--max-memory", "2"]);
    assert_eq!(code, 3);
    assert!(err.contains("cap"));

    // Zero caps are rejected as usage errors.
    let (code, _, _) = run_cli(&["verify", &file, "--max-enum", "0"]);
    assert_eq!(code, 2);

    // Help prints to stdout and exits 0.
    let (code, out, _) = run_cli(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("Usage"));
}

#[test]
fn env_cap_override_is_honored() {
    // The environment override is exercised through the real binary so the
    // in-process tests never mutate shared process state.
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("sys.json");
    fs::write(&path, MAIN_1X3).unwrap();
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_diagcount"))
        .arg("count")
        .arg(&path)
        .arg("--engine")
        .arg("brute")
        .env("DIAGCOUNT_MAX_ENUM", "5")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("bruteforce_evals"), "{err}");

    // The command-line flag takes precedence over the environment.
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_diagcount"))
        .arg("count")
        .arg(&path)
        .arg("--engine")
        .arg("brute")
        .arg("--max-enum")
        .arg("1000000")
        .env("DIAGCOUNT_MAX_ENUM", "5")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
}
